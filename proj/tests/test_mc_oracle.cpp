#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <arb/cascade.hpp>
#include <arb/curves.hpp>
#include <arb/error.hpp>
#include <arb/mc_oracle.hpp>
#include <arb/passk.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace arb;

namespace {

SimConfig cfg(std::int64_t trials, std::uint64_t seed, SpendMode mode) {
    SimConfig c;
    c.trials = trials;
    c.seed = seed;
    c.mode = mode;
    return c;
}

} // namespace

TEST_CASE("degenerate simulations are exact, not just close") {
    // every attempt succeeds: one attempt, one bill
    const auto sure = fixtures::row("p", "q", 3, 3, 0.5);
    const auto s1 = simulate_provider(sure, 2.0, cfg(500, 7, SpendMode::lumpy));
    CHECK(s1.solve_rate == 1.0);
    CHECK(s1.mean_spend == 0.5);

    // no attempt succeeds: lumpy billing stops at whole affordable attempts
    const auto never = fixtures::row("p", "q", 4, 0, 0.5);
    const auto s2 = simulate_provider(never, 1.2, cfg(500, 7, SpendMode::lumpy));
    CHECK(s2.solve_rate == 0.0);
    CHECK(s2.mean_spend == 1.0);  // floor(1.2 / 0.5) = 2 attempts
    const auto s3 = simulate_provider(never, 9.0, cfg(500, 7, SpendMode::lumpy));
    CHECK(s3.mean_spend == 2.0);  // the recorded attempts run out

    // continuous billing spends the whole budget on an unsolved problem; the
    // mean over trials re-rounds, so it is only ulp-close for non-binary b
    const auto s4 = simulate_provider(never, 1.2, cfg(500, 7, SpendMode::continuous));
    CHECK(s4.solve_rate == 0.0);
    CHECK(std::fabs(s4.mean_spend - 1.2) < 1e-12);

    // unobserved pair: never solves, pays the budget only under continuous billing
    auto ghost = fixtures::row("p", "q", 1, 0, 1.0);
    ghost.attempts = 0;
    ghost.successes = 0;
    CHECK(std::fabs(simulate_provider(ghost, 0.7, cfg(100, 7, SpendMode::continuous)).mean_spend -
                    0.7) < 1e-12);
    CHECK(simulate_provider(ghost, 0.7, cfg(100, 7, SpendMode::lumpy)).mean_spend == 0.0);

    // zero budget: nothing happens in either mode
    for (auto mode : {SpendMode::continuous, SpendMode::lumpy}) {
        const auto z = simulate_provider(sure, 0.0, cfg(100, 7, mode));
        CHECK(z.solve_rate == 0.0);
        CHECK(z.mean_spend == 0.0);
    }

    // a lumpy budget below one attempt affords nothing
    const auto s5 = simulate_provider(sure, 0.4, cfg(500, 7, SpendMode::lumpy));
    CHECK(s5.solve_rate == 0.0);
    CHECK(s5.mean_spend == 0.0);
}

TEST_CASE("simulated solve rates follow the interpolated attempt law") {
    const auto st = fixtures::row("p", "q", 6, 3, 0.25);
    const std::int64_t trials = 200000;

    // attempt boundaries k * s_hat and a mid-attempt budget
    for (double b : {0.25, 0.5, 1.0, 1.5, 0.375}) {
        const auto sim = simulate_provider(st, b, cfg(trials, 11, SpendMode::continuous));
        const double want = pass_at_budget(st, b);
        const double sigma =
            std::sqrt(want * (1.0 - want) / static_cast<double>(trials));
        CHECK(sim.solve_rate == Catch::Approx(want).margin(4.0 * sigma + 1e-6));
    }

    // below a single attempt the success time is uniform inside the attempt
    const auto one = fixtures::row("p", "q", 1, 1, 0.5);
    const auto frac = simulate_provider(one, 0.4, cfg(50000, 13, SpendMode::continuous));
    CHECK(frac.solve_rate == Catch::Approx(0.8).margin(0.008));
}

TEST_CASE("lumpy and continuous billing agree on attempt boundaries") {
    const auto st = fixtures::row("p", "q", 8, 2, 0.125);
    for (double b : {0.125, 0.25, 0.5, 1.0}) {
        const auto cont = simulate_provider(st, b, cfg(20000, 17, SpendMode::continuous));
        const auto lump = simulate_provider(st, b, cfg(20000, 17, SpendMode::lumpy));
        // same seed, same resampling walk: the solved indicator is identical
        CHECK(cont.solve_rate == lump.solve_rate);
    }
}

TEST_CASE("simulated spend matches the survival integral") {
    const auto st = fixtures::row("p", "q", 6, 3, 0.25);
    const double b = 1.0;
    const auto sim = simulate_provider(st, b, cfg(200000, 19, SpendMode::continuous));
    const double want = oracle::exact_survival_integral(pass_at_k_table(6, 3), 0.25, b);
    CHECK(sim.mean_spend == Catch::Approx(want).margin(0.005));
}

TEST_CASE("simulations are reproducible by seed") {
    const auto st = fixtures::row("p", "q", 10, 4, 0.1);
    const auto a = simulate_provider(st, 0.7, cfg(5000, 23, SpendMode::continuous));
    const auto b = simulate_provider(st, 0.7, cfg(5000, 23, SpendMode::continuous));
    CHECK(a.solve_rate == b.solve_rate);
    CHECK(a.mean_spend == b.mean_spend);

    const auto c = simulate_provider(st, 0.7, cfg(5000, 24, SpendMode::continuous));
    CHECK(a.mean_spend != c.mean_spend);

    const Dataset d = fixtures::two_segment(6, 4);
    CascadePolicy policy;
    policy.entries = {CapEntry{"alpha", 0.08}, CapEntry{"beta", 0.92}};
    const auto r1 = simulate_cascade(policy, d, 1.0, cfg(2000, 29, SpendMode::continuous));
    const auto r2 = simulate_cascade(policy, d, 1.0, cfg(2000, 29, SpendMode::continuous));
    CHECK(r1.performance == r2.performance);
    CHECK(r1.mean_total_spend == r2.mean_total_spend);
    CHECK(r1.provider_spend == r2.provider_spend);
}

TEST_CASE("a one-entry cascade replays the provider simulation stream") {
    std::vector<ProblemStats> rows{fixtures::row("p", "q", 6, 3, 0.25)};
    const Dataset d = Dataset::from_stats(rows, CostUnit::abstract_unit);
    CascadePolicy policy;
    policy.entries = {CapEntry{"p", 0.6}};

    const auto casc = simulate_cascade(policy, d, 1.0, cfg(3000, 31, SpendMode::continuous));
    // the cascade clamps the budget to the cap before simulating
    const auto solo = simulate_provider(rows[0], 0.6, cfg(3000, 31, SpendMode::continuous));
    CHECK(casc.performance == solo.solve_rate);
    CHECK(casc.mean_total_spend == solo.mean_spend);
    REQUIRE(casc.provider_spend.size() == 1);
    CHECK(casc.provider_spend[0] == casc.mean_total_spend);
}

TEST_CASE("cascade simulation tracks the analytic curve and splits spend") {
    const Dataset d = fixtures::two_segment();
    CascadePolicy policy;
    policy.entries = {CapEntry{"alpha", 0.08}, CapEntry{"beta", 0.92}};
    const double b = 1.0;
    const std::int64_t trials = 20000;
    const auto sim = simulate_cascade(policy, d, b, cfg(trials, 37, SpendMode::continuous));

    CHECK(sim.performance ==
          Catch::Approx(cascade_performance(policy, d, b)).margin(0.01));
    CHECK(sim.mean_total_spend ==
          Catch::Approx(cascade_expected_cost(policy, d, b, 0.001)).epsilon(0.02));

    const auto split = revenue_split(policy, d, b, 0.001);
    REQUIRE(sim.provider_spend.size() == 2);
    CHECK(sim.provider_spend[0] == Catch::Approx(split[0]).epsilon(0.05));
    CHECK(sim.provider_spend[1] == Catch::Approx(split[1]).epsilon(0.05));
    // per-provider spends add up to the total by construction
    CHECK(sim.provider_spend[0] + sim.provider_spend[1] ==
          Catch::Approx(sim.mean_total_spend).epsilon(1e-9));
}

TEST_CASE("simulation configuration is validated") {
    const auto st = fixtures::row("p", "q", 4, 2, 0.5);
    CHECK_THROWS_AS(simulate_provider(st, 1.0, cfg(0, 0, SpendMode::continuous)), Error);
    CHECK_THROWS_AS(simulate_provider(st, -1.0, cfg(10, 0, SpendMode::continuous)), Error);

    const Dataset d = fixtures::uniform(2);
    CascadePolicy ghost;
    ghost.entries = {CapEntry{"missing", 1.0}};
    CHECK_THROWS_AS(simulate_cascade(ghost, d, 1.0, cfg(10, 0, SpendMode::continuous)), Error);
    CHECK_THROWS_AS(simulate_cascade(CascadePolicy{}, d, 1.0, cfg(10, 0, SpendMode::continuous)),
                    Error);
}
