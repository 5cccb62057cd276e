#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "oppsched/error.hpp"
#include "oppsched/plan.hpp"

namespace oppsched {

/// SplitMix64 finalizer. Fixed across releases: seeded results depend on it.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed for trial `index` of a batch seeded with `batch_seed`: the
/// (index+1)-th output of the SplitMix64 stream started at `batch_seed`.
/// Fixed across releases so that batch results are reproducible.
constexpr std::uint64_t trial_seed(std::uint64_t batch_seed, std::uint64_t index) {
    return splitmix64(batch_seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

/// Unbiased integer in [0, bound) drawn from `rng` by rejection sampling.
/// Implementation-defined distributions are avoided on purpose: the visible
/// sequences must be identical on every platform for a given seed.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// The stochastic bin. Parts are addressed by index 0..n-1 (a plan's part
/// indices). At any time the vision system recognizes a uniform random
/// subset of the parts still in the bin, of size min(window, bin size); the
/// rest of the bin is hidden. The visible set is fully resampled after every
/// acquisition and after every shake, and only then (memoryless).
///
/// Deterministic: the whole sequence of visible sets is a pure function of
/// (part count, window, seed, action sequence).
class BinWorld {
public:
    BinWorld(int part_count, int window, std::uint64_t seed);

    /// Removes a visible part from the bin and resamples the visible set.
    /// The part must currently be visible (the robot cannot grasp an
    /// unrecognized part).
    void acquire(PartIndex part);

    /// Resamples the visible set from the whole bin without removing
    /// anything. The bin must be nonempty.
    void shake();

    /// Currently recognized parts, in sample order.
    std::span<const PartIndex> visible() const { return visible_; }
    PartSet visible_set() const { return visible_set_; }
    PartSet hidden() const { return bin_ - visible_set_; }
    PartSet bin() const { return bin_; }
    bool bin_empty() const { return bin_.empty(); }
    int window() const { return window_; }

private:
    void resample();

    PartSet bin_;
    PartSet visible_set_;
    std::vector<PartIndex> visible_;
    int window_;
    std::mt19937_64 rng_;
};

}  // namespace oppsched
