#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <arb/cascade.hpp>
#include <arb/curves.hpp>
#include <arb/error.hpp>

#include "fixtures.hpp"

using namespace arb;

namespace {

CascadePolicy policy2(double cap_a, double cap_b,
                      const std::string& a = "alpha", const std::string& b = "beta") {
    CascadePolicy p;
    p.entries = {CapEntry{a, cap_a}, CapEntry{b, cap_b}};
    return p;
}

} // namespace

TEST_CASE("budget allocation fills caps in order") {
    const auto p = policy2(0.08, 0.92);
    CHECK(allocate_budget(p, 0.05) == std::vector<double>{0.05, 0.0});
    CHECK(allocate_budget(p, 0.08) == std::vector<double>{0.08, 0.0});
    CHECK(allocate_budget(p, 0.5) == std::vector<double>{0.08, 0.42});
    CHECK(allocate_budget(p, 1.0) == std::vector<double>{0.08, 0.92});
    // budgets past the total caps are left unspent
    CHECK(allocate_budget(p, 2.0) == std::vector<double>{0.08, 0.92});
    CHECK(allocate_budget(p, 0.0) == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(allocate_budget(p, -0.1), Error);
}

TEST_CASE("policy validation rejects malformed cascades") {
    CHECK_THROWS_AS(CascadePolicy{}.validate(), Error);
    CHECK_THROWS_AS(policy2(0.5, 0.5, "x", "x").validate(), Error);
    CHECK_THROWS_AS(policy2(-0.1, 0.5).validate(), Error);
    auto short_caps = policy2(0.1, 0.2);
    short_caps.budget_ceiling = 1.0;
    CHECK_THROWS_AS(short_caps.validate(), Error);
    short_caps.budget_ceiling = 0.3;
    CHECK_NOTHROW(short_caps.validate());
    CHECK(policy2(0.08, 0.92).total_cap() == 1.0);
    CHECK(policy2(0.25, 0.5).cumulative_caps() == std::vector<double>{0.25, 0.75});
}

TEST_CASE("a one-provider cascade is the provider itself") {
    const Dataset d = fixtures::uniform(1);
    CascadePolicy p;
    p.entries = {CapEntry{"p1", 1.0}};
    const auto st = d.stats_at(0, 0);
    for (double b : {0.0, 0.3, 0.5, 0.75, 1.0})
        CHECK(cascade_issue_prob(p, d, st.problem_id, b) == pass_at_budget(st, b));
}

TEST_CASE("independent slices compound the issue success probability") {
    // each slice solves with probability 1/2 at its full cap
    std::vector<ProblemStats> rows{
        fixtures::row("x", "q", 2, 1, 0.25),
        fixtures::row("y", "q", 2, 1, 0.25),
    };
    const Dataset d = Dataset::from_stats(rows, CostUnit::abstract_unit);
    const auto p = policy2(0.25, 0.25, "x", "y");

    CHECK(cascade_issue_prob(p, d, "q", 0.25) == Catch::Approx(0.5).margin(1e-15));
    CHECK(cascade_issue_prob(p, d, "q", 0.5) == Catch::Approx(0.75).margin(1e-15));
    // second slice at half cap contributes a quarter
    CHECK(cascade_issue_prob(p, d, "q", 0.375) == Catch::Approx(0.625).margin(1e-15));
    CHECK(cascade_issue_prob(p, d, "q", 0.0) == 0.0);
    CHECK(cascade_performance(p, d, 0.5) == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("a full-cap single cascade reproduces the provider curve bitwise") {
    const Dataset d = fixtures::mixed_pair();
    CascadePolicy p;
    p.entries = {CapEntry{"A", 1.0}};
    const BudgetGrid grid{1.0, 0.001};

    const auto provider = build_provider_curve(d, "A", grid);
    const auto cascade = cascade_curve(p, d, grid, "A");

    REQUIRE(cascade.budgets == provider.budgets);
    REQUIRE(cascade.performance.size() == provider.performance.size());
    for (std::size_t i = 0; i < provider.budgets.size(); ++i) {
        CHECK(cascade.performance[i] == provider.performance[i]);
        CHECK(cascade.expected_cost[i] == provider.expected_cost[i]);
    }
}

TEST_CASE("interior cap boundaries become integration nodes") {
    const Dataset d = fixtures::mixed_pair();
    auto p = policy2(0.25, 0.75, "A", "B");
    const auto curve = cascade_curve(p, d, BudgetGrid{1.0, 0.1});
    CHECK(std::find(curve.budgets.begin(), curve.budgets.end(), 0.25) != curve.budgets.end());
    // caps that cannot serve the grid are refused
    CascadePolicy thin;
    thin.entries = {CapEntry{"A", 0.5}};
    CHECK_THROWS_AS(cascade_curve(thin, d, BudgetGrid{1.0, 0.1}), Error);
}

TEST_CASE("appending a provider never lowers cascade performance") {
    const Dataset d = fixtures::mixed_pair();
    CascadePolicy solo;
    solo.entries = {CapEntry{"A", 0.5}};
    const auto duo = policy2(0.5, 0.5, "A", "B");
    for (double b : {0.2, 0.5, 0.7, 1.0}) {
        CHECK(cascade_performance(duo, d, b) >=
              cascade_performance(solo, d, std::min(b, 0.5)) - 1e-15);
    }
    // performance is monotone in the consumer budget
    double prev = -1.0;
    for (double b : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
        const double perf = cascade_performance(duo, d, b);
        CHECK(perf >= prev);
        prev = perf;
    }
}

TEST_CASE("revenue shares attribute every spending cell to one provider") {
    const Dataset d = fixtures::two_segment();
    const auto p = policy2(0.08, 0.92);

    for (double b : {0.05, 0.08, 0.3, 1.0}) {
        const auto shares = revenue_split(p, d, b, 0.001);
        REQUIRE(shares.size() == 2);
        CHECK(shares[0] >= 0.0);
        CHECK(shares[1] >= 0.0);
        const double total = shares[0] + shares[1];
        CHECK(total == Catch::Approx(cascade_expected_cost(p, d, b, 0.001)).epsilon(1e-12));
    }

    // below the first cap only the first provider earns
    const auto early = revenue_split(p, d, 0.05, 0.001);
    CHECK(early[1] == 0.0);
    CHECK(early[0] > 0.0);

    // past the total caps spending stops growing
    const auto full = revenue_split(p, d, 1.0, 0.001);
    const auto over = revenue_split(p, d, 5.0, 0.001);
    CHECK(over[0] == Catch::Approx(full[0]).epsilon(1e-12));
    CHECK(over[1] == Catch::Approx(full[1]).epsilon(1e-12));

    CHECK(revenue_split(p, d, 0.0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("a single provider keeps the whole expected spend") {
    const Dataset d = fixtures::uniform(5);
    CascadePolicy p;
    p.entries = {CapEntry{"p1", 1.0}};
    const auto shares = revenue_split(p, d, 0.8, 0.001);
    REQUIRE(shares.size() == 1);
    CHECK(shares[0] == cascade_expected_cost(p, d, 0.8, 0.001));
    // and the cascade's expected cost is the provider's expected cost
    CHECK(cascade_expected_cost(p, d, 0.8, 0.001) ==
          provider_expected_cost(d, "p1", 0.8, 0.001));
}

TEST_CASE("default ordering puts cheap fast solvers first") {
    const Dataset d = fixtures::two_segment();
    const auto order = default_provider_order(d);
    REQUIRE(order.size() == 2);
    CHECK(order[0] == "alpha");
    CHECK(order[1] == "beta");

    // identical cost profiles fall back to id order
    std::vector<ProblemStats> rows{
        fixtures::row("zeta", "q", 4, 2, 0.5),
        fixtures::row("acme", "q", 4, 2, 0.5),
    };
    const Dataset tied = Dataset::from_stats(rows, CostUnit::abstract_unit);
    const auto tie_order = default_provider_order(tied);
    CHECK(tie_order == std::vector<std::string>{"acme", "zeta"});

    CHECK_THROWS_AS(default_provider_order(Dataset{}), Error);
    CHECK_THROWS_AS(default_provider_order(d, 0.0), Error);
}

TEST_CASE("policies survive a save and load round trip") {
    auto p = policy2(0.08, 0.92);
    p.budget_ceiling = 1.0;
    const std::string path = "/tmp/arbkit_policy_rt.json";
    save_policy(p, path);
    const auto back = load_policy(path);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].provider_id == "alpha");
    CHECK(back.entries[0].cap == 0.08);
    CHECK(back.entries[1].provider_id == "beta");
    CHECK(back.entries[1].cap == 0.92);
    CHECK(*back.budget_ceiling == 1.0);

    std::ofstream("/tmp/arbkit_policy_bad.json") << "{ not json";
    CHECK_THROWS_AS(load_policy("/tmp/arbkit_policy_bad.json"), Error);
    std::ofstream("/tmp/arbkit_policy_miss.json") << "{\"schema\":\"arbkit-policy-v1\"}";
    CHECK_THROWS_AS(load_policy("/tmp/arbkit_policy_miss.json"), Error);
    CHECK_THROWS_AS(load_policy("/tmp/arbkit_no_such_policy.json"), Error);
    CHECK_THROWS_AS(save_policy(CascadePolicy{}, "/tmp/arbkit_policy_invalid.json"), Error);
}
