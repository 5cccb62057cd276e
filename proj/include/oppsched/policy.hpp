#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oppsched/plan.hpp"

namespace oppsched {

enum class ActionKind { install, buffer, shake };
enum class Source { bin, layout };

struct Action {
    ActionKind kind = ActionKind::shake;
    PartIndex part = -1;           // -1 for shake
    Source source = Source::bin;   // meaningful for install only

    static Action install(PartIndex p, Source s) { return {ActionKind::install, p, s}; }
    static Action buffer(PartIndex p) { return {ActionKind::buffer, p, Source::bin}; }
    static Action shake() { return {ActionKind::shake, -1, Source::bin}; }

    bool operator==(const Action&) const = default;

    /// "install ca" | "buffer ri" | "shake"
    std::string to_string(const Plan& plan) const;
};

/// Execution state as a policy sees it: what is recognized in the bin, what
/// has been moved to layout locations, and what is already installed.
/// The three sets are pairwise disjoint and the install order is admissible.
/// Order vectors remember when parts entered each set; the masks mirror them.
struct ExecState {
    std::vector<PartIndex> visible_order;
    std::vector<PartIndex> buffered_order;
    std::vector<PartIndex> installed_order;
    PartSet visible, buffered, installed;

    PartSet available() const { return visible | buffered; }
    bool complete(const Plan& plan) const { return installed == plan.all_parts(); }

    void set_visible(std::span<const PartIndex> parts);
    void apply_buffer(PartIndex part);                 // visible -> buffered
    void apply_install(PartIndex part, Source source); // visible/buffered -> installed

    /// Throws when the sets overlap, the masks disagree with the order
    /// vectors, or the install order is not admissible.
    void check_invariants(const Plan& plan) const;
};

enum class PolicyKind { opportunistic, layout_all, shake_fixed, buffer_fixed };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_name(std::string_view name);

/// A dispatch strategy. The three baselines carry a fixed order, validated
/// at construction to be a full admissible sequence of the plan.
class Policy {
public:
    static Policy opportunistic();
    static Policy layout_all(const Plan& plan, std::span<const std::string> fixed_order);
    static Policy shake_fixed(const Plan& plan, std::span<const std::string> fixed_order);
    static Policy buffer_fixed(const Plan& plan, std::span<const std::string> fixed_order);
    static Policy from_name(const Plan& plan, std::string_view name,
                            std::span<const std::string> fixed_order);

    PolicyKind kind() const { return kind_; }
    std::string_view name() const { return to_string(kind_); }
    std::span<const PartIndex> fixed_order() const { return fixed_order_; }

    /// Pure decision function: same plan and state, same action.
    Action next(const Plan& plan, const ExecState& state) const;

private:
    Policy(PolicyKind kind, std::vector<PartIndex> order)
        : kind_(kind), fixed_order_(std::move(order)) {}

    PolicyKind kind_;
    std::vector<PartIndex> fixed_order_;
};

/// Install whatever is ready and available; otherwise buffer the visible
/// part needed earliest. Never shakes. Throws DeadlockError when nothing is
/// installable and nothing is visible.
Action opportunistic_next(const Plan& plan, const ExecState& state);

/// Acquire-everything baseline: while the bin is nonempty, buffer the
/// visible part with the least id; once the bin is empty, install along the
/// fixed order from layout.
Action layout_all_next(const Plan& plan, const ExecState& state,
                       std::span<const PartIndex> fixed_order);

/// Fixed-sequence baseline with shaking: install the next part of the order
/// if it is visible, otherwise shake. Never buffers.
Action shake_fixed_next(const Plan& plan, const ExecState& state,
                        std::span<const PartIndex> fixed_order);

/// Fixed-sequence baseline with buffering: install the next part of the
/// order if it is available, otherwise buffer the visible part that occurs
/// earliest in the order.
Action buffer_fixed_next(const Plan& plan, const ExecState& state,
                         std::span<const PartIndex> fixed_order);

/// The candidate whose installation preserves the most future sequencing
/// options: maximal completion count, ties preferring bin over layout, then
/// least id. Candidates must be ready and available.
PartIndex install_tie_break(const Plan& plan, const ExecState& state, PartSet candidates);

/// The candidate needed earliest: fewest uninstalled ancestors, ties by
/// least id. Candidates must be visible.
PartIndex buffer_tie_break(const Plan& plan, const ExecState& state, PartSet candidates);

}  // namespace oppsched
