#include "oppsched/binworld.hpp"

#include <algorithm>

namespace oppsched {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    // Classic unbiased bounded draw: reject the low sliver of the range.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

BinWorld::BinWorld(int part_count, int window, std::uint64_t seed)
    : window_(window), rng_(seed) {
    if (part_count < 1) throw Error("world needs at least one part");
    if (part_count > PartSet::kMaxParts) {
        throw Error("world part count exceeds the limit of " +
                    std::to_string(PartSet::kMaxParts));
    }
    if (window < 1) throw Error("visibility window must be at least 1");
    bin_ = PartSet::full(part_count);
    resample();
}

void BinWorld::acquire(PartIndex part) {
    if (!visible_set_.contains(part)) {
        throw Error("part is not visible and cannot be acquired");
    }
    bin_.erase(part);
    resample();
}

void BinWorld::shake() {
    if (bin_.empty()) throw Error("cannot shake an empty bin");
    resample();
}

void BinWorld::resample() {
    std::vector<PartIndex> pool(bin_.begin(), bin_.end());
    const int k = std::min<int>(window_, static_cast<int>(pool.size()));
    // Partial Fisher-Yates: the first k entries are a uniform k-subset, in
    // sample order.
    for (int i = 0; i < k; ++i) {
        std::uint64_t j = i + uniform_below(rng_, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    visible_.assign(pool.begin(), pool.begin() + k);
    visible_set_ = PartSet{};
    for (PartIndex p : visible_) visible_set_.insert(p);
}

}  // namespace oppsched
