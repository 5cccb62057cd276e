#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oppsched/plan.hpp"
#include "random_poset.hpp"

using namespace oppsched;

namespace {

std::string read_asset(const std::string& name) {
    std::ifstream in(std::string(OPPSCHED_ASSET_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Plan gearbox() { return parse_plan(read_asset("gearbox.plan")); }

const std::vector<std::string> kTable1Order = {"ca", "ba", "ri", "dr", "sm",
                                               "m1", "ra", "co", "st", "cl"};

bool has_diag(const std::vector<Diagnostic>& diags, const std::string& needle) {
    return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) {
        return d.message.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("parse_plan handles a minimal two-node chain") {
    Plan plan = parse_plan("part a\npart b\nedge a b");
    CHECK(plan.part_count() == 2);
    REQUIRE(plan.edges().size() == 1);
    CHECK(plan.id(plan.edges()[0].pred) == "a");
    CHECK(plan.id(plan.edges()[0].succ) == "b");
}

TEST_CASE("parse_plan accepts the shipped gearbox plan") {
    Plan plan = gearbox();
    CHECK(plan.part_count() == 10);
    CHECK(plan.id(0) == "ca");
    CHECK(plan.id(9) == "cl");
    CHECK(plan.display_name(plan.require("ri")) == "ring gear");
    CHECK(plan.display_name(plan.require("ca")) == "");
    CHECK(plan.is_reduced());
    // The file's ri->co edge is implied by the chain through ra, so the
    // parsed edge set is one smaller.
    CHECK(plan.edges().size() == 9);
}

TEST_CASE("parse_plan rejects self-edges") {
    CHECK_THROWS_WITH_AS(parse_plan("part a\nedge a a"),
                         doctest::Contains("self-edge"), PlanError);
}

TEST_CASE("parse_plan reports syntax problems with line numbers") {
    try {
        parse_plan("part a\nwidget b\n");
        FAIL("expected PlanError");
    } catch (const PlanError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("unknown directive") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_plan("part a\npart a\n"), PlanError);
    CHECK_THROWS_WITH_AS(parse_plan("part a\nedge a b\n"),
                         doctest::Contains("undeclared"), PlanError);
    CHECK_THROWS_AS(parse_plan("part a \"unterminated\n"), PlanError);
    CHECK_THROWS_AS(parse_plan("edge a\n"), PlanError);
}

TEST_CASE("parse_plan ignores comments and blank lines") {
    Plan plan = parse_plan("# header\n\npart a \"part a\"\n  # indented comment\npart b\n");
    CHECK(plan.part_count() == 2);
    CHECK(plan.display_name(0) == "part a");
}

TEST_CASE("validate_plan flags transitively implied edges") {
    Plan chord = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}},
                            {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    CHECK_FALSE(chord.is_reduced());
    auto diags = validate_plan(chord);
    CHECK(has_diag(diags, "edge a -> c is transitively implied"));

    CHECK(validate_plan(gearbox()).empty());
}

TEST_CASE("validate_plan_text reports cycles with their members") {
    auto diags = validate_plan_text("part a\npart b\npart c\nedge a b\nedge b c\nedge c a\n");
    CHECK(has_diag(diags, "cycle"));
    CHECK(has_diag(diags, "a"));
    CHECK(has_diag(diags, "b"));
    CHECK(has_diag(diags, "c"));

    CHECK(validate_plan_text(read_asset("gearbox.plan")).empty());
}

TEST_CASE("validate_plan_text warns about isolated parts") {
    auto diags = validate_plan_text("part a\npart b\npart c\nedge a b\n");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].severity == Diagnostic::Severity::warning);
    CHECK(diags[0].message.find("'c' is isolated") != std::string::npos);
}

TEST_CASE("transitive_reduction removes the classic redundant chord") {
    Plan chord = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}},
                            {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    Plan reduced = transitive_reduction(chord);
    REQUIRE(reduced.edges().size() == 2);
    CHECK(reduced.is_reduced());

    Plan again = transitive_reduction(reduced);
    CHECK(std::vector<Edge>(again.edges().begin(), again.edges().end()) ==
          std::vector<Edge>(reduced.edges().begin(), reduced.edges().end()));

    Plan antichain = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}}, {});
    CHECK(transitive_reduction(antichain).edges().empty());
}

TEST_CASE("transitive_reduction preserves reachability and is idempotent") {
    std::mt19937_64 rng(20240811);
    for (int iter = 0; iter < 100; ++iter) {
        Plan plan = testutil::random_plan(rng, 2 + int(rng() % 7), 0.5);
        Plan reduced = transitive_reduction(plan);
        for (PartIndex i : plan.all_parts()) {
            CHECK(plan.ancestors(i) == reduced.ancestors(i));
            CHECK(plan.descendants(i) == reduced.descendants(i));
        }
        Plan twice = transitive_reduction(reduced);
        CHECK(twice.edges().size() == reduced.edges().size());
        CHECK(reduced.is_reduced());
    }
}

TEST_CASE("ready_set on the gearbox plan") {
    Plan plan = gearbox();
    CHECK(plan.ids_of(ready_set(plan, {})) == std::vector<std::string>{"ca"});

    std::vector<std::string> eight(kTable1Order.begin(), kTable1Order.begin() + 8);
    PartSet installed = plan.set_of(eight);
    CHECK(plan.ids_of(ready_set(plan, installed)) == std::vector<std::string>{"st", "cl"});
}

TEST_CASE("ready_set on a chain and error on a non-ideal") {
    Plan chain = parse_plan("part a\npart b\nedge a b");
    PartSet a = chain.set_of(std::vector<std::string>{"a"});
    CHECK(chain.ids_of(ready_set(chain, a)) == std::vector<std::string>{"b"});

    PartSet b = chain.set_of(std::vector<std::string>{"b"});
    CHECK_THROWS_WITH_AS(ready_set(chain, b), doctest::Contains("downward-closed"), Error);
}

TEST_CASE("is_admissible on the gearbox plan") {
    Plan plan = gearbox();
    CHECK(is_admissible(plan, kTable1Order));
    // co before ri violates the ring-gear-before-cover constraint.
    CHECK_FALSE(is_admissible(plan, std::vector<std::string>{"ca", "ba", "co"}));
    CHECK(is_admissible(plan, std::vector<std::string>{}));
    CHECK_THROWS_AS(is_admissible(plan, std::vector<std::string>{"ca", "ca"}), PlanError);
    CHECK_THROWS_AS(is_admissible(plan, std::vector<std::string>{"zz"}), PlanError);
}

TEST_CASE("count_completions on fixed shapes") {
    Plan chain = parse_plan("part a\npart b\npart c\nedge a b\nedge b c");
    CHECK(count_completions(chain, {}) == 1);

    Plan antichain = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}}, {});
    CHECK(count_completions(antichain, {}) == 6);

    CHECK(count_completions(gearbox(), {}) == 2);
}

TEST_CASE("count_completions_bruteforce on fixed shapes") {
    Plan mixed = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}}, {{"a", "b"}});
    CHECK(count_completions_bruteforce(mixed, {}) == 3);

    Plan chain = parse_plan("part a\npart b\npart c\nedge a b\nedge b c");
    CHECK(count_completions_bruteforce(chain, {}) == 1);

    Plan antichain = Plan::make({{"a", ""}, {"b", ""}, {"c", ""}, {"d", ""}}, {});
    CHECK(count_completions_bruteforce(antichain, {}) == 24);
}

TEST_CASE("counting limits are enforced") {
    std::vector<PartDecl> many;
    for (int i = 0; i < 21; ++i) many.push_back({"q" + std::to_string(i), ""});
    Plan wide = Plan::make(many, {});
    CHECK_THROWS_WITH_AS(count_completions(wide, {}), doctest::Contains("limit of 20"), Error);
    CHECK_THROWS_WITH_AS(count_completions_bruteforce(wide, {}),
                         doctest::Contains("limit of 10"), Error);

    std::vector<PartDecl> over;
    for (int i = 0; i < PartSet::kMaxParts + 1; ++i) over.push_back({"q" + std::to_string(i), ""});
    CHECK_THROWS_AS(Plan::make(over, {}), PlanError);
}

TEST_CASE("uninstalled_ancestor_count on the gearbox plan") {
    Plan plan = gearbox();
    CHECK(uninstalled_ancestor_count(plan, {}, "ri") == 2);
    CHECK(uninstalled_ancestor_count(plan, {}, "ra") == 6);
    CHECK(uninstalled_ancestor_count(plan, {}, "ca") == 0);

    PartSet ca = plan.set_of(std::vector<std::string>{"ca"});
    CHECK(uninstalled_ancestor_count(plan, ca, "ri") == 1);
    CHECK_THROWS_AS(uninstalled_ancestor_count(plan, ca, "ca"), Error);
    CHECK_THROWS_AS(uninstalled_ancestor_count(plan, {}, "zz"), PlanError);
}

TEST_CASE("property: completion counts satisfy the ready-set recurrence") {
    std::mt19937_64 rng(1);
    for (int iter = 0; iter < 200; ++iter) {
        Plan plan = testutil::random_plan(rng, 1 + int(rng() % 7));
        for (PartSet s : testutil::all_down_sets(plan)) {
            PartSet ready = ready_set(plan, s);
            if (ready.empty()) {
                CHECK(count_completions(plan, s) == 1);  // everything installed
                continue;
            }
            std::uint64_t total = 0;
            for (PartIndex p : ready) total += count_completions(plan, s.with(p));
            CHECK(count_completions(plan, s) == total);
        }
    }
}

TEST_CASE("property: dynamic program agrees with the brute-force oracle") {
    std::mt19937_64 rng(2);
    for (int iter = 0; iter < 200; ++iter) {
        Plan plan = testutil::random_plan(rng, 1 + int(rng() % 8));
        PartSet installed = testutil::random_down_set(rng, plan);
        CHECK(count_completions(plan, installed) ==
              count_completions_bruteforce(plan, installed));
    }
}

TEST_CASE("property: installing one ready part never disqualifies another") {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 200; ++iter) {
        Plan plan = testutil::random_plan(rng, 2 + int(rng() % 6));
        PartSet installed = testutil::random_down_set(rng, plan);
        PartSet ready = ready_set(plan, installed);
        for (PartIndex p : ready) {
            PartSet after = ready_set(plan, installed.with(p));
            CHECK((ready - PartSet{}.with(p)).is_subset_of(after));
        }
    }
}

TEST_CASE("property: admissible full permutations are exactly the counted extensions") {
    std::mt19937_64 rng(4);
    for (int iter = 0; iter < 50; ++iter) {
        Plan plan = testutil::random_plan(rng, 1 + int(rng() % 6));
        std::vector<PartIndex> perm(plan.all_parts().begin(), plan.all_parts().end());
        std::uint64_t admissible = 0;
        do {
            if (is_admissible(plan, perm)) ++admissible;
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(admissible == count_completions(plan, {}));
    }
}

TEST_CASE("property: zero uninstalled ancestors is the same as ready") {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 200; ++iter) {
        Plan plan = testutil::random_plan(rng, 1 + int(rng() % 7));
        PartSet installed = testutil::random_down_set(rng, plan);
        PartSet ready = ready_set(plan, installed);
        for (PartIndex p : plan.all_parts() - installed) {
            bool zero = uninstalled_ancestor_count(plan, installed, p) == 0;
            CHECK(zero == ready.contains(p));
        }
    }
}
