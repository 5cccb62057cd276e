#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oppsched/binworld.hpp"
#include "oppsched/plan.hpp"
#include "oppsched/policy.hpp"

namespace oppsched {

/// One line of a Table-1 style trace: the state a decision was made in and
/// the action taken. The final row of a finished episode has no action.
struct TraceRow {
    std::vector<PartIndex> visible;
    std::vector<PartIndex> buffered;
    std::vector<PartIndex> installed;
    std::optional<Action> action;
};

using Trace = std::vector<TraceRow>;

struct TrialStats {
    int installs_from_bin = 0;
    int installs_from_layout = 0;
    int buffers = 0;
    int shakes = 0;
    int motions = 0;  // installs + buffers; shakes are counted separately
    int peak_buffer = 0;
    int steps = 0;
    bool censored = false;  // step cap hit before the assembly finished
};

struct MetricSummary {
    double mean = 0;
    double stddev = 0;  // population standard deviation
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct BatchSummary {
    std::string policy_name;
    int trials = 0;
    MetricSummary motions;
    MetricSummary shakes;
    double peak_buffer_mean = 0;
    int censored = 0;  // trials cut off at the step cap, excluded from stats
    std::uint64_t seed = 0;
    int window = 0;
    double shake_cost = 1.0;  // motion-equivalents per shake
    double cost_mean = 0;     // motions.mean + shake_cost * shakes.mean
};

struct RunLimits {
    // Shake policies can in principle run forever; trials hitting the cap
    // are reported as censored, not failed.
    int max_steps = 10000;
};

/// Runs one policy-vs-world episode to completion (or to the step cap).
/// Every decision is audited: installs must be of ready available parts,
/// buffers of visible parts, and the visible/hidden/buffered/installed
/// partition of the part set must hold after every step.
std::pair<Trace, TrialStats> run_trial(const Plan& plan, const Policy& policy, int window,
                                       std::uint64_t seed, const RunLimits& limits = {});

/// Same loop as run_trial, but visibility comes from a script of
/// observations instead of a world. The script advances only after an
/// action that takes a part out of the bin (install-from-bin or buffer);
/// once every part has been acquired the visible set is empty and the
/// script is no longer consulted. Each observation must be disjoint from
/// the parts already buffered or installed when it comes into force.
std::pair<Trace, TrialStats> replay_scripted(const Plan& plan, const Policy& policy,
                                             std::span<const std::vector<std::string>> script,
                                             const RunLimits& limits = {});

/// Runs `trials` independent episodes with per-trial seeds derived via
/// trial_seed(seed, i) and aggregates their stats. Accumulation is exact
/// (integer sums), so the result is identical for any execution order;
/// `threads` > 1 splits the trials across worker threads.
BatchSummary run_batch(const Plan& plan, const Policy& policy, int window, int trials,
                       std::uint64_t seed, int threads = 1, const RunLimits& limits = {},
                       double shake_cost = 1.0);

/// Tab-separated rendering with the Table-1 column heads
/// (Visible/Buffered/Installed/Action); cells are comma-joined ids in the
/// order the parts entered each set.
std::string format_trace(const Plan& plan, const Trace& trace);

/// One key=value line of trial stats.
std::string format_stats(const TrialStats& stats);

/// Stable-key JSON for a list of batch summaries. plan_name, window and
/// seed are top-level context (taken from the first summary; omitted when
/// the list is empty).
std::string export_summary(std::span<const BatchSummary> summaries, std::string_view plan_name);

/// Re-checks a finished trace row by row: legality of every action, row-to-
/// row consistency of the buffered/installed sets, and disjointness.
/// Throws Error on the first violation.
void verify_trace(const Plan& plan, const Trace& trace);

/// Script file format: one observation per line, comma-separated part ids.
/// `#` comment lines and blank lines are ignored.
std::vector<std::vector<std::string>> parse_script(std::string_view text);

}  // namespace oppsched
