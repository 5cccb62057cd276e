// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its runtime budget.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oppsched/harness.hpp"
#include "random_poset.hpp"

using namespace oppsched;

namespace {

std::string read_asset(const std::string& name) {
    std::ifstream in(std::string(OPPSCHED_ASSET_DIR) + "/" + name, std::ios::binary);
    if (!in) throw Error("missing asset " + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::vector<std::string> kTable1Order = {"ca", "ba", "ri", "dr", "sm",
                                               "m1", "ra", "co", "st", "cl"};

const std::vector<std::string> kTable1Actions = {
    "buffer ri",  "install ca", "buffer m1",  "buffer dr",  "install ba",
    "install ri", "install dr", "buffer co",  "install sm", "install m1",
    "buffer cl",  "install ra", "install co", "install st", "install cl"};

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

// Trace auditor, independent of the harness internals: re-derives readiness
// and set transitions for every row. Returns the number of checks performed;
// any violation flips `check`.
std::size_t audit_trace(const Plan& plan, const Trace& trace, Check& check) {
    std::size_t audited = 0;
    PartSet everything = plan.all_parts();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const TraceRow& row = trace[k];
        PartSet vis, buf, ins;
        for (PartIndex p : row.visible) vis.insert(p);
        for (PartIndex p : row.buffered) buf.insert(p);
        for (PartIndex p : row.installed) ins.insert(p);

        // Four-way partition: the three explicit sets are disjoint subsets
        // of the part set; whatever is left is hidden in the bin.
        ++audited;
        check.require(!vis.intersects(buf) && !vis.intersects(ins) && !buf.intersects(ins),
                      "trace sets overlap");
        check.require((vis | buf | ins).is_subset_of(everything), "trace set outside the plan");
        check.require(plan.is_downward_closed(ins), "installed set is not an order ideal");

        if (k + 1 == trace.size()) {
            check.require(!row.action.has_value(), "final row carries an action");
            continue;
        }
        if (!row.action) {
            check.require(false, "intermediate row without an action");
            continue;
        }

        const Action& a = *row.action;
        PartSet next_buf, next_ins;
        for (PartIndex p : trace[k + 1].buffered) next_buf.insert(p);
        for (PartIndex p : trace[k + 1].installed) next_ins.insert(p);

        ++audited;
        switch (a.kind) {
            case ActionKind::install: {
                PartSet ready = ready_set(plan, ins);
                check.require(ready.contains(a.part), "install of a part that is not ready");
                check.require((vis | buf).contains(a.part),
                              "install of a part that is not available");
                check.require(a.source == Source::bin ? vis.contains(a.part)
                                                      : buf.contains(a.part),
                              "install source does not match the state");
                check.require(next_ins == ins.with(a.part), "installed set did not advance");
                check.require(next_buf == (a.source == Source::layout ? buf.without(a.part) : buf),
                              "buffered set mismatch after install");
                break;
            }
            case ActionKind::buffer:
                check.require(vis.contains(a.part), "buffer of a part that is not visible");
                check.require(next_buf == buf.with(a.part), "buffered set did not advance");
                check.require(next_ins == ins, "installed set changed on a buffer");
                break;
            case ActionKind::shake:
                check.require(next_buf == buf && next_ins == ins, "shake changed the sets");
                break;
        }
    }
    return audited;
}

struct Criterion {
    int number;
    std::string title;
    double budget_seconds;
    std::function<void(Check&)> body;
};

}  // namespace

int main() {
    Plan plan = parse_plan(read_asset("gearbox.plan"));
    auto script = parse_script(read_asset("table1.script"));
    Policy opportunistic = Policy::opportunistic();
    Policy layout = Policy::layout_all(plan, kTable1Order);
    Policy shaker = Policy::shake_fixed(plan, kTable1Order);

    Trace replay_trace;
    TrialStats replay_stats;
    std::size_t audited_trials = 0;
    std::size_t audited_checks = 0;

    auto audit_batch = [&](const Policy& policy, int trials, std::uint64_t seed, int window,
                           Check& check) {
        for (int i = 0; i < trials; ++i) {
            auto [trace, stats] = run_trial(plan, policy, window, trial_seed(seed, i));
            audited_checks += audit_trace(plan, trace, check);
            ++audited_trials;
        }
    };

    std::vector<Criterion> criteria;

    criteria.push_back({1, "Table 1 replay fidelity", 1.0, [&](Check& check) {
        auto [trace, stats] = replay_scripted(plan, opportunistic, script);
        replay_trace = trace;
        replay_stats = stats;
        std::vector<std::string> actions;
        for (const TraceRow& row : trace) {
            if (row.action) actions.push_back(row.action->to_string(plan));
        }
        check.require(actions == kTable1Actions, "action column differs from the reference");
        check.require(trace.size() == 16 && !trace.back().action.has_value(),
                      "missing terminal row");
    }});

    criteria.push_back({2, "replay stats (10 installs, 5 buffers, 15 motions, 0 shakes)", 1.0,
                        [&](Check& check) {
        check.require(replay_stats.installs_from_bin + replay_stats.installs_from_layout == 10,
                      "install count");
        check.require(replay_stats.buffers == 5, "buffer count");
        check.require(replay_stats.motions == 15, "motion count");
        check.require(replay_stats.shakes == 0, "shake count");
    }});

    criteria.push_back({3, "completion-count oracle agreement", 120.0, [&](Check& check) {
        std::mt19937_64 rng(1001);
        for (int iter = 0; iter < 200; ++iter) {
            Plan random = testutil::random_plan(rng, 1 + int(rng() % 7));
            PartSet installed = testutil::random_down_set(rng, random);
            check.require(count_completions(random, installed) ==
                              count_completions_bruteforce(random, installed),
                          "dynamic program disagrees with brute force");
        }
        check.require(count_completions_bruteforce(plan, {}) == 2,
                      "10! enumeration of the shipped plan is not 2");
        check.require(count_completions(plan, {}) == 2,
                      "dynamic program on the shipped plan is not 2");
    }});

    criteria.push_back({4, "completion-count recurrence over down-sets", 60.0, [&](Check& check) {
        std::mt19937_64 rng(1002);
        for (int iter = 0; iter < 200; ++iter) {
            Plan random = testutil::random_plan(rng, 1 + int(rng() % 7));
            for (PartSet s : testutil::all_down_sets(random)) {
                PartSet ready = ready_set(random, s);
                if (ready.empty()) continue;
                std::uint64_t total = 0;
                for (PartIndex p : ready) total += count_completions(random, s.with(p));
                check.require(count_completions(random, s) == total, "recurrence violated");
            }
        }
    }});

    criteria.push_back({5, "motion accounting and dominance", 30.0, [&](Check& check) {
        BatchSummary fixed = run_batch(plan, layout, 2, 1000, 0);
        check.require(fixed.motions.mean == 20.0 && fixed.motions.stddev == 0.0,
                      "layout_all is not exactly 20 motions");
        BatchSummary opp = run_batch(plan, opportunistic, 2, 10000, 0);
        check.require(opp.motions.min >= 10 && opp.motions.max <= 20,
                      "an opportunistic trial left [10, 20]");
        check.require(opp.motions.mean < 20.0, "opportunistic mean is not below 20");
        check.require(opp.motions.mean < fixed.motions.mean,
                      "opportunistic does not dominate layout_all");
    }});

    criteria.push_back({6, "shake behavior", 30.0, [&](Check& check) {
        BatchSummary shake = run_batch(plan, shaker, 2, 1000, 0);
        check.require(shake.shakes.mean > 0.0, "shake_fixed never shakes");
        check.require(shake.shakes.stddev > 0.0, "shake counts have zero variance");
        check.require(shake.censored == 0, "shake trials were censored");
        BatchSummary opp = run_batch(plan, opportunistic, 2, 1000, 0);
        check.require(opp.shakes.max == 0, "opportunistic emitted a shake");
    }});

    criteria.push_back({7, "batch determinism across runs and schedules", 60.0,
                        [&](Check& check) {
        for (const Policy* policy : {&opportunistic, &shaker}) {
            BatchSummary first = run_batch(plan, *policy, 2, 2000, 0, 1);
            BatchSummary second = run_batch(plan, *policy, 2, 2000, 0, 1);
            BatchSummary parallel = run_batch(plan, *policy, 2, 2000, 0, 4);
            std::vector<BatchSummary> a{first}, b{second}, c{parallel};
            check.require(export_summary(a, "gearbox") == export_summary(b, "gearbox"),
                          "repeated run differs");
            check.require(export_summary(a, "gearbox") == export_summary(c, "gearbox"),
                          "parallel run differs");
        }
    }});

    criteria.push_back({8, "legality audit over every simulated trial", 600.0,
                        [&](Check& check) {
        audited_checks += audit_trace(plan, replay_trace, check);
        audit_batch(layout, 1000, 0, 2, check);     // criterion 5 workload
        audit_batch(opportunistic, 10000, 0, 2, check);
        audit_batch(shaker, 1000, 0, 2, check);     // criterion 6 workload
        audit_batch(opportunistic, 1000, 0, 2, check);
        audit_batch(opportunistic, 2000, 0, 2, check);  // criterion 7 workload
        audit_batch(shaker, 2000, 0, 2, check);
        check.require(audited_trials == 17000, "unexpected audit coverage");
        check.require(audited_checks > 0, "no checks performed");
    }});

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        double elapsed = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start).count();
        check.require(elapsed < criterion.budget_seconds, "runtime budget exceeded");

        if (check.ok) {
            std::printf("PASS criterion %d: %s (%.2fs)\n", criterion.number,
                        criterion.title.c_str(), elapsed);
        } else {
            ++failures;
            std::printf("FAIL criterion %d: %s (%.2fs) - %s\n", criterion.number,
                        criterion.title.c_str(), elapsed, check.detail.c_str());
        }
        std::fflush(stdout);
    }

    if (failures == 0) {
        std::printf("all %zu criteria passed; audited %zu trials (%zu checks)\n",
                    criteria.size(), audited_trials, audited_checks);
    }
    return failures == 0 ? 0 : 1;
}
