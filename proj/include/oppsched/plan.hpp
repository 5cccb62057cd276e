#pragma once

#include <bit>
#include <cstddef>
#include <iterator>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oppsched/error.hpp"

namespace oppsched {

/// Index of a part within its plan (declaration order).
using PartIndex = int;

/// Set of parts of one plan, stored as a bitmask over part indices.
/// Plans are capped at kMaxParts so a set always fits in one word.
class PartSet {
public:
    static constexpr int kMaxParts = 64;

    constexpr PartSet() = default;
    static constexpr PartSet from_bits(std::uint64_t bits) { return PartSet(bits); }
    static constexpr PartSet full(int n) {
        return PartSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
    }

    constexpr bool contains(PartIndex i) const { return (bits_ >> i) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr std::uint64_t bits() const { return bits_; }

    constexpr PartSet& insert(PartIndex i) { bits_ |= std::uint64_t{1} << i; return *this; }
    constexpr PartSet& erase(PartIndex i) { bits_ &= ~(std::uint64_t{1} << i); return *this; }
    constexpr PartSet with(PartIndex i) const { PartSet s = *this; return s.insert(i); }
    constexpr PartSet without(PartIndex i) const { PartSet s = *this; return s.erase(i); }

    constexpr bool is_subset_of(PartSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool intersects(PartSet o) const { return (bits_ & o.bits_) != 0; }

    friend constexpr PartSet operator|(PartSet a, PartSet b) { return PartSet(a.bits_ | b.bits_); }
    friend constexpr PartSet operator&(PartSet a, PartSet b) { return PartSet(a.bits_ & b.bits_); }
    friend constexpr PartSet operator-(PartSet a, PartSet b) { return PartSet(a.bits_ & ~b.bits_); }
    constexpr PartSet& operator|=(PartSet o) { bits_ |= o.bits_; return *this; }
    constexpr PartSet& operator&=(PartSet o) { bits_ &= o.bits_; return *this; }
    constexpr bool operator==(const PartSet&) const = default;

    /// Iterates member indices in ascending order.
    class iterator {
    public:
        using value_type = PartIndex;
        using difference_type = std::ptrdiff_t;
        using pointer = const PartIndex*;
        using reference = PartIndex;
        using iterator_category = std::forward_iterator_tag;

        iterator() = default;
        PartIndex operator*() const { return std::countr_zero(bits_); }
        iterator& operator++() { bits_ &= bits_ - 1; return *this; }
        iterator operator++(int) { iterator old = *this; ++*this; return old; }
        bool operator==(const iterator&) const = default;

    private:
        friend class PartSet;
        explicit constexpr iterator(std::uint64_t b) : bits_(b) {}
        std::uint64_t bits_ = 0;
    };
    iterator begin() const { return iterator(bits_); }
    iterator end() const { return iterator(0); }

private:
    explicit constexpr PartSet(std::uint64_t bits) : bits_(bits) {}
    std::uint64_t bits_ = 0;
};

struct PartDecl {
    std::string id;
    std::string display_name;  // optional, may be empty
};

struct Edge {
    PartIndex pred = -1;
    PartIndex succ = -1;
    bool operator==(const Edge&) const = default;
};

/// Raw plan description before validation, e.g. fresh out of the parser.
/// Line numbers refer to the source text and are 0 for programmatic drafts.
struct PlanDraft {
    struct Part {
        std::string id;
        std::string display_name;
        int line = 0;
    };
    struct EdgeDecl {
        std::string pred;
        std::string succ;
        int line = 0;
    };
    std::vector<Part> parts;
    std::vector<EdgeDecl> edges;
};

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    int line = 0;  // 0 when not tied to an input line
    std::string message;
};

/// Immutable assembly plan: a set of parts plus acyclic precedence edges.
///
/// Construction rejects malformed or duplicate ids, unknown edge endpoints,
/// self-edges and cycles. Stored edges are kept as given (deduplicated) and
/// need not be transitively reduced; parse_plan() reduces what it returns,
/// and transitive_reduction() reduces any plan.
class Plan {
public:
    static Plan make(std::vector<PartDecl> parts,
                     const std::vector<std::pair<std::string, std::string>>& edges);
    static Plan from_draft(const PlanDraft& draft);

    int part_count() const { return static_cast<int>(parts_.size()); }
    PartSet all_parts() const { return PartSet::full(part_count()); }

    const std::string& id(PartIndex i) const { return parts_[i].id; }
    const std::string& display_name(PartIndex i) const { return parts_[i].display_name; }
    std::optional<PartIndex> find(std::string_view id) const;
    PartIndex require(std::string_view id) const;  // throws PlanError on unknown id

    std::span<const Edge> edges() const { return edges_; }
    PartSet direct_preds(PartIndex i) const { return preds_[i]; }
    PartSet direct_succs(PartIndex i) const { return succs_[i]; }
    /// Strict transitive predecessors / successors.
    PartSet ancestors(PartIndex i) const { return anc_[i]; }
    PartSet descendants(PartIndex i) const { return desc_[i]; }

    /// True when no stored edge is implied by a longer path.
    bool is_reduced() const { return reduced_; }
    /// Stored edges that are implied by a path of length >= 2.
    std::vector<Edge> implied_edges() const;

    /// True when `s` contains every ancestor of each of its members
    /// (an order ideal; exactly the legal "installed" states).
    bool is_downward_closed(PartSet s) const;

    PartSet set_of(std::span<const std::string> ids) const;  // throws on unknown/duplicate
    std::vector<std::string> ids_of(PartSet s) const;        // ascending index order

private:
    Plan(std::vector<PartDecl> parts, std::vector<Edge> edges);

    std::vector<PartDecl> parts_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, PartIndex> index_;
    std::vector<PartSet> preds_, succs_, anc_, desc_;
    std::vector<int> topo_order_;
    bool reduced_ = true;
};

/// Parses the line-oriented plan format:
///
///   # comment
///   part <id> ["display name"]
///   edge <pred-id> <succ-id>
///
/// Blank lines are ignored. Throws PlanError (with a line number where one
/// applies) on the first syntax or structural problem. The returned plan is
/// validated and transitively reduced.
Plan parse_plan(std::string_view text);

/// Never-throwing variant for tooling: returns every diagnostic found in the
/// text, syntax and structure alike. Empty result means parse_plan succeeds.
std::vector<Diagnostic> validate_plan_text(std::string_view text);

/// Diagnostics for a constructed plan: transitively implied stored edges and
/// isolated parts. Acyclicity holds by construction. Returns an empty list
/// for a reduced, fully connected plan.
std::vector<Diagnostic> validate_plan(const Plan& plan);

/// The unique minimal edge set generating the same partial order. Idempotent.
Plan transitive_reduction(const Plan& plan);

/// Uninstalled parts whose predecessors are all installed.
/// `installed` must be downward-closed.
PartSet ready_set(const Plan& plan, PartSet installed);

/// True iff the sequence is a prefix of some linear extension of the plan.
/// Throws on duplicate or unknown entries.
bool is_admissible(const Plan& plan, std::span<const PartIndex> sequence);
bool is_admissible(const Plan& plan, std::span<const std::string> sequence);

/// Number of linear extensions of the sub-poset induced on uninstalled
/// parts, i.e. how many complete orderings remain. Dynamic programming over
/// down-sets of the remaining poset; exact integer arithmetic with overflow
/// detection. At most 20 uninstalled parts (2^20 DP states).
std::uint64_t count_completions(const Plan& plan, PartSet installed);

/// Independent oracle for count_completions: enumerates every permutation of
/// the uninstalled parts and counts the admissible ones. At most 10
/// uninstalled parts.
std::uint64_t count_completions_bruteforce(const Plan& plan, PartSet installed);

/// Number of strict ancestors of `part` not yet installed; 0 iff the part is
/// ready. The part itself must be uninstalled.
int uninstalled_ancestor_count(const Plan& plan, PartSet installed, PartIndex part);
int uninstalled_ancestor_count(const Plan& plan, PartSet installed, std::string_view part);

}  // namespace oppsched
