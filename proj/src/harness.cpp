#include "oppsched/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "json.hpp"

namespace oppsched {

namespace {

std::string audit_fail(const std::string& what) { return "legality audit: " + what; }

// Always-on checks on every decision, before it is applied.
void audit_decision(const Plan& plan, PolicyKind kind, const ExecState& state, const Action& a) {
    switch (a.kind) {
        case ActionKind::install: {
            if (!ready_set(plan, state.installed).contains(a.part)) {
                throw Error(audit_fail("install of a part that is not ready"));
            }
            if (a.source == Source::bin && !state.visible.contains(a.part)) {
                throw Error(audit_fail("install from bin of a part that is not visible"));
            }
            if (a.source == Source::layout && !state.buffered.contains(a.part)) {
                throw Error(audit_fail("install from layout of a part that is not buffered"));
            }
            break;
        }
        case ActionKind::buffer: {
            if (!state.visible.contains(a.part)) {
                throw Error(audit_fail("buffer of a part that is not visible"));
            }
            if (kind == PolicyKind::shake_fixed) {
                throw Error(audit_fail("shake_fixed policy emitted a buffer"));
            }
            if (kind == PolicyKind::opportunistic &&
                !(ready_set(plan, state.installed) & state.available()).empty()) {
                throw Error(audit_fail("opportunistic buffered while a part was installable"));
            }
            break;
        }
        case ActionKind::shake: {
            if (kind != PolicyKind::shake_fixed) {
                throw Error(audit_fail(std::string(to_string(kind)) + " policy emitted a shake"));
            }
            break;
        }
    }
}

// Four-way partition of the part set between the world and the state.
void audit_partition(const Plan& plan, const BinWorld& world, const ExecState& state) {
    if ((world.bin() | state.buffered | state.installed) != plan.all_parts() ||
        world.bin().intersects(state.buffered) || world.bin().intersects(state.installed)) {
        throw Error(audit_fail("bin/buffered/installed do not partition the part set"));
    }
    if (state.visible != world.visible_set()) {
        throw Error(audit_fail("state visible set disagrees with the world"));
    }
    int expected = std::min(world.window(), world.bin().size());
    if (state.visible.size() != expected) {
        throw Error(audit_fail("visible set size is not min(window, bin size)"));
    }
}

void bump_stats(TrialStats& stats, const Action& a, const ExecState& state) {
    switch (a.kind) {
        case ActionKind::install:
            ++(a.source == Source::bin ? stats.installs_from_bin : stats.installs_from_layout);
            break;
        case ActionKind::buffer: ++stats.buffers; break;
        case ActionKind::shake: ++stats.shakes; break;
    }
    ++stats.steps;
    stats.peak_buffer = std::max(stats.peak_buffer, state.buffered.size());
    stats.motions = stats.installs_from_bin + stats.installs_from_layout + stats.buffers;
}

void push_row(Trace* trace, const ExecState& state, std::optional<Action> action) {
    if (!trace) return;
    trace->push_back({state.visible_order, state.buffered_order, state.installed_order,
                      std::move(action)});
}

void audit_termination(const Plan& plan, const Policy& policy, const TrialStats& stats) {
    if (stats.censored || policy.kind() == PolicyKind::shake_fixed) return;
    if (stats.steps > 2 * plan.part_count()) {
        throw Error(audit_fail("non-shake policy exceeded 2n steps"));
    }
}

TrialStats run_trial_impl(const Plan& plan, const Policy& policy, int window, std::uint64_t seed,
                          const RunLimits& limits, Trace* trace) {
    TrialStats stats;
    const int n = plan.part_count();
    if (n == 0) return stats;

    BinWorld world(n, window, seed);
    ExecState state;
    state.set_visible(world.visible());

    while (!state.complete(plan)) {
        if (stats.steps >= limits.max_steps) {
            stats.censored = true;
            break;
        }
        Action a = policy.next(plan, state);
        audit_decision(plan, policy.kind(), state, a);
        push_row(trace, state, a);
        switch (a.kind) {
            case ActionKind::install:
                state.apply_install(a.part, a.source);
                if (a.source == Source::bin) world.acquire(a.part);
                break;
            case ActionKind::buffer:
                state.apply_buffer(a.part);
                world.acquire(a.part);
                break;
            case ActionKind::shake:
                world.shake();
                break;
        }
        state.set_visible(world.visible());
        state.check_invariants(plan);
        audit_partition(plan, world, state);
        bump_stats(stats, a, state);
    }

    push_row(trace, state, std::nullopt);
    audit_termination(plan, policy, stats);
    return stats;
}

}  // namespace

std::pair<Trace, TrialStats> run_trial(const Plan& plan, const Policy& policy, int window,
                                       std::uint64_t seed, const RunLimits& limits) {
    Trace trace;
    TrialStats stats = run_trial_impl(plan, policy, window, seed, limits, &trace);
    return {std::move(trace), stats};
}

std::pair<Trace, TrialStats> replay_scripted(const Plan& plan, const Policy& policy,
                                             std::span<const std::vector<std::string>> script,
                                             const RunLimits& limits) {
    Trace trace;
    TrialStats stats;
    const int n = plan.part_count();
    if (n == 0) return {std::move(trace), stats};

    ExecState state;
    std::size_t next_obs = 0;
    bool need_observation = true;

    while (!state.complete(plan)) {
        if (stats.steps >= limits.max_steps) {
            stats.censored = true;
            break;
        }
        const bool bin_empty = state.installed.size() + state.buffered.size() == n;
        if (bin_empty) {
            state.set_visible({});
        } else if (need_observation) {
            if (next_obs >= script.size()) {
                throw ScriptError("script exhausted before the episode completed");
            }
            std::vector<PartIndex> obs;
            PartSet seen;
            for (const std::string& id : script[next_obs]) {
                PartIndex p = plan.require(id);
                if (seen.contains(p)) {
                    throw ScriptError("duplicate part '" + id + "' in scripted observation " +
                                      std::to_string(next_obs + 1));
                }
                seen.insert(p);
                obs.push_back(p);
            }
            if (seen.intersects(state.installed) || seen.intersects(state.buffered)) {
                throw ScriptError("scripted observation " + std::to_string(next_obs + 1) +
                                  " overlaps parts already buffered or installed");
            }
            ++next_obs;
            state.set_visible(obs);
            need_observation = false;
        }

        Action a = policy.next(plan, state);
        audit_decision(plan, policy.kind(), state, a);
        push_row(&trace, state, a);
        switch (a.kind) {
            case ActionKind::install:
                state.apply_install(a.part, a.source);
                if (a.source == Source::bin) need_observation = true;
                break;
            case ActionKind::buffer:
                state.apply_buffer(a.part);
                need_observation = true;
                break;
            case ActionKind::shake:
                // The observation in force does not change; only bin
                // interaction advances the script.
                break;
        }
        state.check_invariants(plan);
        bump_stats(stats, a, state);
    }

    push_row(&trace, state, std::nullopt);
    audit_termination(plan, policy, stats);
    return {std::move(trace), stats};
}

namespace {

struct Accumulator {
    std::int64_t completed = 0;
    std::int64_t censored = 0;
    std::uint64_t motions_sum = 0, motions_sq = 0;
    std::uint64_t shakes_sum = 0, shakes_sq = 0;
    std::uint64_t peak_sum = 0;
    std::int64_t motions_min = std::numeric_limits<std::int64_t>::max(), motions_max = 0;
    std::int64_t shakes_min = std::numeric_limits<std::int64_t>::max(), shakes_max = 0;

    void add(const TrialStats& t) {
        if (t.censored) {
            ++censored;
            return;
        }
        ++completed;
        motions_sum += t.motions;
        motions_sq += std::uint64_t(t.motions) * t.motions;
        motions_min = std::min<std::int64_t>(motions_min, t.motions);
        motions_max = std::max<std::int64_t>(motions_max, t.motions);
        shakes_sum += t.shakes;
        shakes_sq += std::uint64_t(t.shakes) * t.shakes;
        shakes_min = std::min<std::int64_t>(shakes_min, t.shakes);
        shakes_max = std::max<std::int64_t>(shakes_max, t.shakes);
        peak_sum += t.peak_buffer;
    }

    void merge(const Accumulator& o) {
        completed += o.completed;
        censored += o.censored;
        motions_sum += o.motions_sum;
        motions_sq += o.motions_sq;
        motions_min = std::min(motions_min, o.motions_min);
        motions_max = std::max(motions_max, o.motions_max);
        shakes_sum += o.shakes_sum;
        shakes_sq += o.shakes_sq;
        shakes_min = std::min(shakes_min, o.shakes_min);
        shakes_max = std::max(shakes_max, o.shakes_max);
        peak_sum += o.peak_sum;
    }
};

MetricSummary finalize_metric(std::uint64_t sum, std::uint64_t sq, std::int64_t min,
                              std::int64_t max, std::int64_t count) {
    MetricSummary m;
    if (count == 0) return m;
    m.mean = static_cast<double>(sum) / static_cast<double>(count);
    double var = static_cast<double>(sq) / static_cast<double>(count) - m.mean * m.mean;
    m.stddev = std::sqrt(std::max(0.0, var));
    m.min = min;
    m.max = max;
    return m;
}

}  // namespace

BatchSummary run_batch(const Plan& plan, const Policy& policy, int window, int trials,
                       std::uint64_t seed, int threads, const RunLimits& limits,
                       double shake_cost) {
    if (trials < 1) throw Error("batch needs at least one trial");
    if (threads < 1) throw Error("batch needs at least one thread");
    threads = std::min(threads, trials);

    std::vector<Accumulator> partial(threads);
    std::vector<std::exception_ptr> failures(threads);
    auto work = [&](int t) {
        const int begin = static_cast<int>(std::int64_t(trials) * t / threads);
        const int end = static_cast<int>(std::int64_t(trials) * (t + 1) / threads);
        try {
            for (int i = begin; i < end; ++i) {
                TrialStats s =
                    run_trial_impl(plan, policy, window, trial_seed(seed, i), limits, nullptr);
                partial[t].add(s);
            }
        } catch (...) {
            failures[t] = std::current_exception();
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    Accumulator total;
    for (const Accumulator& p : partial) total.merge(p);

    BatchSummary out;
    out.policy_name = std::string(policy.name());
    out.trials = trials;
    out.motions = finalize_metric(total.motions_sum, total.motions_sq, total.motions_min,
                                  total.motions_max, total.completed);
    out.shakes = finalize_metric(total.shakes_sum, total.shakes_sq, total.shakes_min,
                                 total.shakes_max, total.completed);
    out.peak_buffer_mean = total.completed == 0 ? 0.0
                                                : static_cast<double>(total.peak_sum) /
                                                      static_cast<double>(total.completed);
    out.censored = static_cast<int>(total.censored);
    out.seed = seed;
    out.window = window;
    out.shake_cost = shake_cost;
    out.cost_mean = out.motions.mean + shake_cost * out.shakes.mean;
    return out;
}

namespace {
std::string join_cell(const Plan& plan, const std::vector<PartIndex>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += plan.id(parts[i]);
    }
    return out;
}
}  // namespace

std::string format_trace(const Plan& plan, const Trace& trace) {
    std::string out = "Visible\tBuffered\tInstalled\tAction\n";
    for (const TraceRow& row : trace) {
        out += join_cell(plan, row.visible);
        out += '\t';
        out += join_cell(plan, row.buffered);
        out += '\t';
        out += join_cell(plan, row.installed);
        out += '\t';
        if (row.action) out += row.action->to_string(plan);
        out += '\n';
    }
    return out;
}

std::string format_stats(const TrialStats& s) {
    std::string out;
    out += "installs_from_bin=" + std::to_string(s.installs_from_bin);
    out += " installs_from_layout=" + std::to_string(s.installs_from_layout);
    out += " buffers=" + std::to_string(s.buffers);
    out += " shakes=" + std::to_string(s.shakes);
    out += " motions=" + std::to_string(s.motions);
    out += " peak_buffer=" + std::to_string(s.peak_buffer);
    out += " steps=" + std::to_string(s.steps);
    out += " censored=" + std::to_string(s.censored ? 1 : 0);
    return out;
}

std::string export_summary(std::span<const BatchSummary> summaries, std::string_view plan_name) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    if (!summaries.empty()) {
        j["plan_name"] = std::string(plan_name);
        j["window"] = summaries.front().window;
        j["seed"] = summaries.front().seed;
    }
    auto metric = [](const MetricSummary& m) {
        return nlohmann::ordered_json{
            {"mean", m.mean}, {"stddev", m.stddev}, {"min", m.min}, {"max", m.max}};
    };
    j["policies"] = nlohmann::ordered_json::array();
    for (const BatchSummary& s : summaries) {
        j["policies"].push_back(nlohmann::ordered_json{{"name", s.policy_name},
                                                       {"trials", s.trials},
                                                       {"motions", metric(s.motions)},
                                                       {"shakes", metric(s.shakes)},
                                                       {"peak_buffer_mean", s.peak_buffer_mean},
                                                       {"censored", s.censored},
                                                       {"shake_cost", s.shake_cost},
                                                       {"cost_mean", s.cost_mean}});
    }
    return j.dump(2) + "\n";
}

void verify_trace(const Plan& plan, const Trace& trace) {
    auto fail = [](const std::string& what, std::size_t row) {
        throw Error("trace consistency: " + what + " at row " + std::to_string(row + 1));
    };
    auto as_set = [&](const std::vector<PartIndex>& parts, std::size_t row) {
        PartSet s;
        for (PartIndex p : parts) {
            if (p < 0 || p >= plan.part_count()) fail("part index out of range", row);
            if (s.contains(p)) fail("duplicate part within one cell", row);
            s.insert(p);
        }
        return s;
    };

    for (std::size_t k = 0; k < trace.size(); ++k) {
        const TraceRow& row = trace[k];
        PartSet vis = as_set(row.visible, k);
        PartSet buf = as_set(row.buffered, k);
        PartSet ins = as_set(row.installed, k);
        if (vis.intersects(buf) || vis.intersects(ins) || buf.intersects(ins)) {
            fail("visible/buffered/installed overlap", k);
        }
        if (!plan.is_downward_closed(ins)) fail("installed set is not downward-closed", k);

        const bool last = (k + 1 == trace.size());
        if (last) {
            if (row.action) fail("final row carries an action", k);
            continue;
        }
        if (!row.action) fail("non-final row without an action", k);

        const Action& a = *row.action;
        std::vector<PartIndex> want_buf = row.buffered;
        std::vector<PartIndex> want_ins = row.installed;
        switch (a.kind) {
            case ActionKind::install:
                if (!ready_set(plan, ins).contains(a.part)) fail("install of unready part", k);
                if (a.source == Source::bin && !vis.contains(a.part)) {
                    fail("install from bin of invisible part", k);
                }
                if (a.source == Source::layout) {
                    if (!buf.contains(a.part)) fail("install from layout of unbuffered part", k);
                    std::erase(want_buf, a.part);
                }
                want_ins.push_back(a.part);
                break;
            case ActionKind::buffer:
                if (!vis.contains(a.part)) fail("buffer of invisible part", k);
                want_buf.push_back(a.part);
                break;
            case ActionKind::shake:
                break;
        }
        if (trace[k + 1].buffered != want_buf || trace[k + 1].installed != want_ins) {
            fail("applying the action does not yield the next row", k);
        }
    }
}

std::vector<std::vector<std::string>> parse_script(std::string_view text) {
    std::vector<std::vector<std::string>> script;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

        auto trim = [](std::string_view s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.remove_prefix(1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
                s.remove_suffix(1);
            return s;
        };
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string> obs;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            std::string_view token = (comma == std::string_view::npos)
                                         ? line.substr(start)
                                         : line.substr(start, comma - start);
            token = trim(token);
            if (token.empty()) {
                throw ScriptError("empty part id in script observation " +
                                  std::to_string(script.size() + 1));
            }
            obs.emplace_back(token);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        script.push_back(std::move(obs));
    }
    return script;
}

}  // namespace oppsched
