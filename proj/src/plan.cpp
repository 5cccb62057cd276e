#include "oppsched/plan.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace oppsched {

namespace {

bool valid_id(std::string_view id) {
    if (id.empty()) return false;
    for (char c : id) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '"') return false;
    }
    return true;
}

std::string join_ids(const std::vector<std::string>& ids, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

// Finds one concrete cycle in the (pred -> succ) graph, as a closed id path.
// Only called when a cycle is known to exist.
std::string describe_cycle(int n, const std::vector<std::vector<int>>& succs,
                           const std::vector<std::string>& ids) {
    std::vector<int> color(n, 0);  // 0 white, 1 gray, 2 black
    std::vector<int> parent(n, -1);
    int cycle_head = -1, cycle_tail = -1;

    auto dfs = [&](auto&& self, int u) -> bool {
        color[u] = 1;
        for (int v : succs[u]) {
            if (color[v] == 1) {
                cycle_head = v;
                cycle_tail = u;
                return true;
            }
            if (color[v] == 0) {
                parent[v] = u;
                if (self(self, v)) return true;
            }
        }
        color[u] = 2;
        return false;
    };

    for (int s = 0; s < n; ++s) {
        if (color[s] == 0 && dfs(dfs, s)) break;
    }

    std::vector<std::string> path;
    for (int u = cycle_tail; u != cycle_head; u = parent[u]) path.push_back(ids[u]);
    path.push_back(ids[cycle_head]);
    std::reverse(path.begin(), path.end());
    path.push_back(ids[cycle_head]);
    return "cycle detected: " + join_ids(path, " -> ");
}

struct ScannedLine {
    int number = 0;
    std::string_view content;
};

std::vector<ScannedLine> split_lines(std::string_view text) {
    std::vector<ScannedLine> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) lines.push_back({++number, text.substr(pos)});
            break;
        }
        lines.push_back({++number, text.substr(pos, nl - pos)});
        pos = nl + 1;
    }
    return lines;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Scans the text into a draft, appending syntax diagnostics for lines it
// cannot make sense of. Bad lines are skipped so scanning can continue.
PlanDraft scan_plan_text(std::string_view text, std::vector<Diagnostic>& diags) {
    PlanDraft draft;
    for (const ScannedLine& line : split_lines(text)) {
        std::string_view s = trim(line.content);
        if (s.empty() || s.front() == '#') continue;

        std::istringstream in{std::string(s)};
        std::string directive;
        in >> directive;

        if (directive == "part") {
            std::string id;
            in >> id;
            if (id.empty()) {
                diags.push_back({Diagnostic::Severity::error, line.number,
                                 "part directive needs an id"});
                continue;
            }
            std::string rest;
            std::getline(in, rest);
            std::string_view display = trim(rest);
            std::string display_name;
            if (!display.empty()) {
                if (display.size() < 2 || display.front() != '"' || display.back() != '"') {
                    diags.push_back({Diagnostic::Severity::error, line.number,
                                     "display name must be a double-quoted string"});
                    continue;
                }
                display_name = std::string(display.substr(1, display.size() - 2));
            }
            draft.parts.push_back({std::move(id), std::move(display_name), line.number});
        } else if (directive == "edge") {
            std::string pred, succ, extra;
            in >> pred >> succ >> extra;
            if (pred.empty() || succ.empty() || !extra.empty()) {
                diags.push_back({Diagnostic::Severity::error, line.number,
                                 "edge directive needs exactly two part ids"});
                continue;
            }
            draft.edges.push_back({std::move(pred), std::move(succ), line.number});
        } else {
            diags.push_back({Diagnostic::Severity::error, line.number,
                             "unknown directive '" + directive + "'"});
        }
    }
    return draft;
}

// Structural checks shared by Plan::from_draft and validate_plan_text.
// Appends one diagnostic per problem; never throws.
void validate_draft(const PlanDraft& draft, std::vector<Diagnostic>& diags) {
    std::unordered_map<std::string, int> index;
    std::vector<std::string> ids;
    for (const auto& part : draft.parts) {
        if (!valid_id(part.id)) {
            diags.push_back({Diagnostic::Severity::error, part.line,
                             "invalid part id '" + part.id +
                                 "' (must be nonempty, no whitespace, quotes or commas)"});
            continue;
        }
        if (index.count(part.id)) {
            diags.push_back({Diagnostic::Severity::error, part.line,
                             "duplicate part '" + part.id + "'"});
            continue;
        }
        index.emplace(part.id, static_cast<int>(ids.size()));
        ids.push_back(part.id);
    }

    const int n = static_cast<int>(ids.size());
    if (n > PartSet::kMaxParts) {
        diags.push_back({Diagnostic::Severity::error, 0,
                         "plan has " + std::to_string(n) + " parts; the limit is " +
                             std::to_string(PartSet::kMaxParts)});
        return;
    }

    std::vector<std::vector<int>> succs(n);
    std::vector<std::uint64_t> touched(n, 0);
    bool edges_ok = true;
    for (const auto& edge : draft.edges) {
        auto p = index.find(edge.pred);
        auto q = index.find(edge.succ);
        if (p == index.end() || q == index.end()) {
            const std::string& missing = (p == index.end()) ? edge.pred : edge.succ;
            diags.push_back({Diagnostic::Severity::error, edge.line,
                             "edge references undeclared part '" + missing + "'"});
            edges_ok = false;
            continue;
        }
        if (p->second == q->second) {
            diags.push_back({Diagnostic::Severity::error, edge.line,
                             "self-edge on part '" + edge.pred + "'"});
            edges_ok = false;
            continue;
        }
        succs[p->second].push_back(q->second);
        touched[p->second] = touched[q->second] = 1;
    }

    // Cycle check over the well-formed edges only.
    std::vector<int> indegree(n, 0);
    for (int u = 0; u < n; ++u)
        for (int v : succs[u]) ++indegree[v];
    std::vector<int> queue;
    for (int u = 0; u < n; ++u)
        if (indegree[u] == 0) queue.push_back(u);
    int removed = 0;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        ++removed;
        for (int v : succs[u])
            if (--indegree[v] == 0) queue.push_back(v);
    }
    if (removed != n) {
        diags.push_back({Diagnostic::Severity::error, 0, describe_cycle(n, succs, ids)});
        return;
    }

    if (edges_ok && n > 1) {
        for (int u = 0; u < n; ++u) {
            if (!touched[u]) {
                diags.push_back({Diagnostic::Severity::warning, 0,
                                 "part '" + ids[u] + "' is isolated (no ordering constraints)"});
            }
        }
    }
}

// An edge (u, v) is implied iff some other direct successor of u reaches v.
bool edge_implied(const Plan& plan, const Edge& e) {
    for (PartIndex w : plan.direct_succs(e.pred)) {
        if (w != e.succ && plan.descendants(w).contains(e.succ)) return true;
    }
    return false;
}

}  // namespace

Plan::Plan(std::vector<PartDecl> parts, std::vector<Edge> edges)
    : parts_(std::move(parts)) {
    const int n = part_count();
    if (n > PartSet::kMaxParts) {
        throw PlanError("plan has " + std::to_string(n) + " parts; the limit is " +
                        std::to_string(PartSet::kMaxParts));
    }
    for (int i = 0; i < n; ++i) {
        if (!valid_id(parts_[i].id)) {
            throw PlanError("invalid part id '" + parts_[i].id +
                            "' (must be nonempty, no whitespace, quotes or commas)");
        }
        if (!index_.emplace(parts_[i].id, i).second) {
            throw PlanError("duplicate part '" + parts_[i].id + "'");
        }
    }

    preds_.assign(n, {});
    succs_.assign(n, {});
    for (const Edge& e : edges) {
        if (e.pred == e.succ) throw PlanError("self-edge on part '" + id(e.pred) + "'");
        if (succs_[e.pred].contains(e.succ)) continue;  // duplicate edge, set semantics
        succs_[e.pred].insert(e.succ);
        preds_[e.succ].insert(e.pred);
        edges_.push_back(e);
    }

    // Kahn topological order; any leftover node sits on a cycle.
    std::vector<int> indegree(n);
    for (int i = 0; i < n; ++i) indegree[i] = preds_[i].size();
    std::vector<int> queue;
    for (int i = n - 1; i >= 0; --i)
        if (indegree[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        topo_order_.push_back(u);
        for (PartIndex v : succs_[u])
            if (--indegree[v] == 0) queue.push_back(v);
    }
    if (static_cast<int>(topo_order_.size()) != n) {
        std::vector<std::vector<int>> adj(n);
        std::vector<std::string> ids(n);
        for (int u = 0; u < n; ++u) {
            ids[u] = id(u);
            for (PartIndex v : succs_[u]) adj[u].push_back(v);
        }
        throw PlanError(describe_cycle(n, adj, ids));
    }

    // Transitive closure along the topological order.
    anc_.assign(n, {});
    desc_.assign(n, {});
    for (int k = 0; k < n; ++k) {
        int u = topo_order_[k];
        for (PartIndex p : preds_[u]) anc_[u] |= anc_[p].with(p);
    }
    for (int k = n - 1; k >= 0; --k) {
        int u = topo_order_[k];
        for (PartIndex s : succs_[u]) desc_[u] |= desc_[s].with(s);
    }

    for (const Edge& e : edges_) {
        if (!edge_implied(*this, e)) continue;
        reduced_ = false;
        break;
    }
}

std::vector<Edge> Plan::implied_edges() const {
    std::vector<Edge> out;
    for (const Edge& e : edges_)
        if (edge_implied(*this, e)) out.push_back(e);
    return out;
}

Plan Plan::make(std::vector<PartDecl> parts,
                const std::vector<std::pair<std::string, std::string>>& edges) {
    PlanDraft draft;
    for (auto& p : parts) draft.parts.push_back({std::move(p.id), std::move(p.display_name), 0});
    for (const auto& [pred, succ] : edges) draft.edges.push_back({pred, succ, 0});
    return from_draft(draft);
}

Plan Plan::from_draft(const PlanDraft& draft) {
    std::unordered_map<std::string, PartIndex> index;
    std::vector<PartDecl> parts;
    for (const auto& part : draft.parts) {
        if (!valid_id(part.id)) {
            throw PlanError("invalid part id '" + part.id +
                                "' (must be nonempty, no whitespace, quotes or commas)",
                            part.line);
        }
        if (index.count(part.id)) throw PlanError("duplicate part '" + part.id + "'", part.line);
        index.emplace(part.id, static_cast<int>(parts.size()));
        parts.push_back({part.id, part.display_name});
    }
    std::vector<Edge> edges;
    for (const auto& edge : draft.edges) {
        auto p = index.find(edge.pred);
        auto q = index.find(edge.succ);
        if (p == index.end() || q == index.end()) {
            const std::string& missing = (p == index.end()) ? edge.pred : edge.succ;
            throw PlanError("edge references undeclared part '" + missing + "'", edge.line);
        }
        if (p->second == q->second) {
            throw PlanError("self-edge on part '" + edge.pred + "'", edge.line);
        }
        edges.push_back({p->second, q->second});
    }
    return Plan(std::move(parts), std::move(edges));
}

std::optional<PartIndex> Plan::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

PartIndex Plan::require(std::string_view id) const {
    auto idx = find(id);
    if (!idx) throw PlanError("unknown part '" + std::string(id) + "'");
    return *idx;
}

bool Plan::is_downward_closed(PartSet s) const {
    for (PartIndex i : s)
        if (!anc_[i].is_subset_of(s)) return false;
    return true;
}

PartSet Plan::set_of(std::span<const std::string> ids) const {
    PartSet s;
    for (const std::string& id : ids) {
        PartIndex i = require(id);
        if (s.contains(i)) throw PlanError("duplicate part '" + id + "' in list");
        s.insert(i);
    }
    return s;
}

std::vector<std::string> Plan::ids_of(PartSet s) const {
    std::vector<std::string> out;
    out.reserve(s.size());
    for (PartIndex i : s) out.push_back(id(i));
    return out;
}

Plan parse_plan(std::string_view text) {
    std::vector<Diagnostic> diags;
    PlanDraft draft = scan_plan_text(text, diags);
    for (const Diagnostic& d : diags) {
        if (d.severity == Diagnostic::Severity::error) throw PlanError(d.message, d.line);
    }
    return transitive_reduction(Plan::from_draft(draft));
}

std::vector<Diagnostic> validate_plan_text(std::string_view text) {
    std::vector<Diagnostic> diags;
    PlanDraft draft = scan_plan_text(text, diags);
    validate_draft(draft, diags);
    return diags;
}

std::vector<Diagnostic> validate_plan(const Plan& plan) {
    std::vector<Diagnostic> diags;
    for (const Edge& e : plan.implied_edges()) {
        diags.push_back({Diagnostic::Severity::warning, 0,
                         "edge " + plan.id(e.pred) + " -> " + plan.id(e.succ) +
                             " is transitively implied"});
    }
    if (plan.part_count() > 1) {
        for (PartIndex i : plan.all_parts()) {
            if (plan.direct_preds(i).empty() && plan.direct_succs(i).empty()) {
                diags.push_back({Diagnostic::Severity::warning, 0,
                                 "part '" + plan.id(i) + "' is isolated (no ordering constraints)"});
            }
        }
    }
    return diags;
}

Plan transitive_reduction(const Plan& plan) {
    std::vector<PartDecl> parts;
    parts.reserve(plan.part_count());
    for (PartIndex i : plan.all_parts()) parts.push_back({plan.id(i), plan.display_name(i)});

    std::vector<std::pair<std::string, std::string>> kept;
    for (const Edge& e : plan.edges()) {
        if (!edge_implied(plan, e)) kept.emplace_back(plan.id(e.pred), plan.id(e.succ));
    }
    return Plan::make(std::move(parts), kept);
}

namespace {
void require_downward_closed(const Plan& plan, PartSet installed) {
    if (!plan.is_downward_closed(installed)) {
        throw Error("installed set is not downward-closed");
    }
}
}  // namespace

PartSet ready_set(const Plan& plan, PartSet installed) {
    require_downward_closed(plan, installed);
    PartSet ready;
    for (PartIndex i : plan.all_parts() - installed) {
        if (plan.ancestors(i).is_subset_of(installed)) ready.insert(i);
    }
    return ready;
}

bool is_admissible(const Plan& plan, std::span<const PartIndex> sequence) {
    PartSet seen;
    for (PartIndex i : sequence) {
        if (i < 0 || i >= plan.part_count()) throw PlanError("part index out of range");
        if (seen.contains(i)) throw PlanError("duplicate part '" + plan.id(i) + "' in sequence");
        seen.insert(i);
    }
    PartSet installed;
    for (PartIndex i : sequence) {
        if (!plan.ancestors(i).is_subset_of(installed)) return false;
        installed.insert(i);
    }
    return true;
}

bool is_admissible(const Plan& plan, std::span<const std::string> sequence) {
    std::vector<PartIndex> indices;
    indices.reserve(sequence.size());
    for (const std::string& id : sequence) indices.push_back(plan.require(id));
    return is_admissible(plan, indices);
}

std::uint64_t count_completions(const Plan& plan, PartSet installed) {
    require_downward_closed(plan, installed);
    PartSet remaining = plan.all_parts() - installed;
    const int m = remaining.size();
    if (m > 20) {
        throw Error(std::to_string(m) +
                    " uninstalled parts exceed the completion-count limit of 20");
    }
    if (m == 0) return 1;

    // Compact the remaining parts to bits 0..m-1. anc_in[j] are the
    // ancestors of j that are themselves remaining; everything else is
    // installed already (installed is downward-closed).
    std::vector<PartIndex> members(remaining.begin(), remaining.end());
    std::vector<std::uint32_t> anc_in(m, 0), desc_in(m, 0);
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
            if (plan.ancestors(members[j]).contains(members[k])) anc_in[j] |= 1u << k;
            if (plan.descendants(members[j]).contains(members[k])) desc_in[j] |= 1u << k;
        }
    }

    // f[S] = number of linear extensions of the sub-poset induced on S,
    // for every down-set S; 0 for subsets that are not down-sets.
    std::vector<std::uint64_t> f(std::size_t{1} << m, 0);
    f[0] = 1;
    const std::uint32_t all = (1u << m) - 1;
    for (std::uint32_t s = 1; s <= all; ++s) {
        bool down_set = true;
        for (std::uint32_t rest = s; rest;) {
            int j = std::countr_zero(rest);
            rest &= rest - 1;
            if ((anc_in[j] & ~s) != 0) {
                down_set = false;
                break;
            }
        }
        if (!down_set) continue;
        std::uint64_t total = 0;
        for (std::uint32_t rest = s; rest;) {
            int j = std::countr_zero(rest);
            rest &= rest - 1;
            if ((desc_in[j] & s) != 0) continue;  // j is not maximal in s
            if (__builtin_add_overflow(total, f[s ^ (1u << j)], &total)) {
                throw Error("completion count overflow");
            }
        }
        f[s] = total;
    }
    return f[all];
}

std::uint64_t count_completions_bruteforce(const Plan& plan, PartSet installed) {
    require_downward_closed(plan, installed);
    PartSet remaining = plan.all_parts() - installed;
    const int m = remaining.size();
    if (m > 10) {
        throw Error(std::to_string(m) + " uninstalled parts exceed the brute-force limit of 10");
    }
    std::vector<PartIndex> perm(remaining.begin(), remaining.end());
    std::uint64_t count = 0;
    do {
        // Admissibility of the permutation relative to the installed base.
        PartSet done = installed;
        bool ok = true;
        for (PartIndex i : perm) {
            if (!plan.ancestors(i).is_subset_of(done)) {
                ok = false;
                break;
            }
            done.insert(i);
        }
        if (ok) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

int uninstalled_ancestor_count(const Plan& plan, PartSet installed, PartIndex part) {
    if (part < 0 || part >= plan.part_count()) throw PlanError("part index out of range");
    if (installed.contains(part)) {
        throw Error("part '" + plan.id(part) + "' is already installed");
    }
    return (plan.ancestors(part) - installed).size();
}

int uninstalled_ancestor_count(const Plan& plan, PartSet installed, std::string_view part) {
    return uninstalled_ancestor_count(plan, installed, plan.require(part));
}

}  // namespace oppsched
