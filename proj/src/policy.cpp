#include "oppsched/policy.hpp"

#include <algorithm>

namespace oppsched {

std::string Action::to_string(const Plan& plan) const {
    switch (kind) {
        case ActionKind::install: return "install " + plan.id(part);
        case ActionKind::buffer: return "buffer " + plan.id(part);
        case ActionKind::shake: return "shake";
    }
    return {};
}

void ExecState::set_visible(std::span<const PartIndex> parts) {
    visible_order.assign(parts.begin(), parts.end());
    visible = PartSet{};
    for (PartIndex p : parts) visible.insert(p);
}

void ExecState::apply_buffer(PartIndex part) {
    if (!visible.contains(part)) throw Error("buffered part is not visible");
    visible.erase(part);
    std::erase(visible_order, part);
    buffered.insert(part);
    buffered_order.push_back(part);
}

void ExecState::apply_install(PartIndex part, Source source) {
    if (source == Source::bin) {
        if (!visible.contains(part)) throw Error("installed part is not visible in the bin");
        visible.erase(part);
        std::erase(visible_order, part);
    } else {
        if (!buffered.contains(part)) throw Error("installed part is not in the layout");
        buffered.erase(part);
        std::erase(buffered_order, part);
    }
    installed.insert(part);
    installed_order.push_back(part);
}

void ExecState::check_invariants(const Plan& plan) const {
    if (visible.intersects(buffered) || visible.intersects(installed) ||
        buffered.intersects(installed)) {
        throw Error("execution state sets are not pairwise disjoint");
    }
    auto mirror = [](const std::vector<PartIndex>& order, PartSet mask) {
        PartSet s;
        for (PartIndex p : order) s.insert(p);
        return s == mask && static_cast<int>(order.size()) == mask.size();
    };
    if (!mirror(visible_order, visible) || !mirror(buffered_order, buffered) ||
        !mirror(installed_order, installed)) {
        throw Error("execution state order vectors disagree with the set masks");
    }
    if (!is_admissible(plan, installed_order)) {
        throw Error("installed order is not admissible for the plan");
    }
}

PartIndex install_tie_break(const Plan& plan, const ExecState& state, PartSet candidates) {
    if (candidates.empty()) throw Error("install tie-break on an empty candidate set");
    PartIndex best = -1;
    std::uint64_t best_count = 0;
    bool best_visible = false;
    for (PartIndex p : candidates) {
        std::uint64_t c = count_completions(plan, state.installed.with(p));
        bool vis = state.visible.contains(p);
        bool better = best < 0 || c > best_count ||
                      (c == best_count && vis && !best_visible) ||
                      (c == best_count && vis == best_visible && plan.id(p) < plan.id(best));
        if (better) {
            best = p;
            best_count = c;
            best_visible = vis;
        }
    }
    return best;
}

PartIndex buffer_tie_break(const Plan& plan, const ExecState& state, PartSet candidates) {
    if (candidates.empty()) throw Error("buffer tie-break on an empty candidate set");
    PartIndex best = -1;
    int best_need = 0;
    for (PartIndex p : candidates) {
        int need = uninstalled_ancestor_count(plan, state.installed, p);
        bool better = best < 0 || need < best_need ||
                      (need == best_need && plan.id(p) < plan.id(best));
        if (better) {
            best = p;
            best_need = need;
        }
    }
    return best;
}

namespace {

void require_incomplete(const Plan& plan, const ExecState& state) {
    if (state.complete(plan)) throw Error("assembly is already complete");
}

PartIndex next_uninstalled(const ExecState& state, std::span<const PartIndex> fixed_order) {
    for (PartIndex p : fixed_order) {
        if (!state.installed.contains(p)) return p;
    }
    throw Error("fixed order has no uninstalled part left");
}

bool bin_nonempty(const Plan& plan, const ExecState& state) {
    // Every part not yet buffered or installed is still in the bin.
    return state.installed.size() + state.buffered.size() < plan.part_count();
}

}  // namespace

Action opportunistic_next(const Plan& plan, const ExecState& state) {
    require_incomplete(plan, state);
    PartSet candidates = ready_set(plan, state.installed) & state.available();
    if (!candidates.empty()) {
        PartIndex p = install_tie_break(plan, state, candidates);
        return Action::install(p, state.visible.contains(p) ? Source::bin : Source::layout);
    }
    if (!state.visible.empty()) {
        return Action::buffer(buffer_tie_break(plan, state, state.visible));
    }
    throw DeadlockError("nothing is installable and nothing is visible to buffer");
}

Action layout_all_next(const Plan& plan, const ExecState& state,
                       std::span<const PartIndex> fixed_order) {
    require_incomplete(plan, state);
    if (bin_nonempty(plan, state)) {
        if (state.visible.empty()) {
            throw DeadlockError("bin is nonempty but nothing is visible to buffer");
        }
        PartIndex best = -1;
        for (PartIndex p : state.visible) {
            if (best < 0 || plan.id(p) < plan.id(best)) best = p;
        }
        return Action::buffer(best);
    }
    return Action::install(next_uninstalled(state, fixed_order), Source::layout);
}

Action shake_fixed_next(const Plan& plan, const ExecState& state,
                        std::span<const PartIndex> fixed_order) {
    require_incomplete(plan, state);
    PartIndex p = next_uninstalled(state, fixed_order);
    if (state.visible.contains(p)) return Action::install(p, Source::bin);
    return Action::shake();
}

Action buffer_fixed_next(const Plan& plan, const ExecState& state,
                         std::span<const PartIndex> fixed_order) {
    require_incomplete(plan, state);
    PartIndex p = next_uninstalled(state, fixed_order);
    if (state.visible.contains(p)) return Action::install(p, Source::bin);
    if (state.buffered.contains(p)) return Action::install(p, Source::layout);
    for (PartIndex q : fixed_order) {
        if (state.visible.contains(q)) return Action::buffer(q);
    }
    throw DeadlockError("next needed part is unavailable and nothing is visible to buffer");
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::opportunistic: return "opportunistic";
        case PolicyKind::layout_all: return "layout_all";
        case PolicyKind::shake_fixed: return "shake_fixed";
        case PolicyKind::buffer_fixed: return "buffer_fixed";
    }
    return {};
}

PolicyKind policy_kind_from_name(std::string_view name) {
    if (name == "opportunistic") return PolicyKind::opportunistic;
    if (name == "layout_all") return PolicyKind::layout_all;
    if (name == "shake_fixed") return PolicyKind::shake_fixed;
    if (name == "buffer_fixed") return PolicyKind::buffer_fixed;
    throw Error("unknown policy '" + std::string(name) +
                "' (expected opportunistic, layout_all, shake_fixed or buffer_fixed)");
}

namespace {

std::vector<PartIndex> checked_fixed_order(const Plan& plan,
                                           std::span<const std::string> fixed_order) {
    std::vector<PartIndex> order;
    order.reserve(fixed_order.size());
    for (const std::string& id : fixed_order) order.push_back(plan.require(id));
    if (static_cast<int>(order.size()) != plan.part_count() || !is_admissible(plan, order)) {
        throw Error("fixed order is not a full admissible sequence of the plan");
    }
    return order;
}

}  // namespace

Policy Policy::opportunistic() { return Policy(PolicyKind::opportunistic, {}); }

Policy Policy::layout_all(const Plan& plan, std::span<const std::string> fixed_order) {
    return Policy(PolicyKind::layout_all, checked_fixed_order(plan, fixed_order));
}

Policy Policy::shake_fixed(const Plan& plan, std::span<const std::string> fixed_order) {
    return Policy(PolicyKind::shake_fixed, checked_fixed_order(plan, fixed_order));
}

Policy Policy::buffer_fixed(const Plan& plan, std::span<const std::string> fixed_order) {
    return Policy(PolicyKind::buffer_fixed, checked_fixed_order(plan, fixed_order));
}

Policy Policy::from_name(const Plan& plan, std::string_view name,
                         std::span<const std::string> fixed_order) {
    switch (policy_kind_from_name(name)) {
        case PolicyKind::opportunistic: return opportunistic();
        case PolicyKind::layout_all: return layout_all(plan, fixed_order);
        case PolicyKind::shake_fixed: return shake_fixed(plan, fixed_order);
        case PolicyKind::buffer_fixed: return buffer_fixed(plan, fixed_order);
    }
    throw Error("unknown policy");
}

Action Policy::next(const Plan& plan, const ExecState& state) const {
    switch (kind_) {
        case PolicyKind::opportunistic: return opportunistic_next(plan, state);
        case PolicyKind::layout_all: return layout_all_next(plan, state, fixed_order_);
        case PolicyKind::shake_fixed: return shake_fixed_next(plan, state, fixed_order_);
        case PolicyKind::buffer_fixed: return buffer_fixed_next(plan, state, fixed_order_);
    }
    throw Error("unknown policy kind");
}

}  // namespace oppsched
