#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "arb/cascade.hpp"
#include "arb/error.hpp"
#include "arb/rng.hpp"
#include "arb/types.hpp"

namespace arb {

enum class SpendMode { continuous, lumpy };

struct SimConfig {
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    SpendMode mode = SpendMode::continuous;

    void validate() const {
        if (trials < 1) throw Error(Errc::bad_config, "simulation needs at least one trial");
    }
};

namespace detail {

struct SliceOutcome {
    bool solved = false;
    double spend = 0.0;
};

/**
 * One provider slice of one trial: resample the recorded attempts without
 * replacement until the first success, then bill it per spend mode.
 * Continuous mode bills fractionally and lets the success land uniformly
 * inside its attempt, matching the linear interpolation between attempt
 * boundaries; an unsolved slice bills the whole slice budget. Lumpy mode
 * bills whole attempts and stops once the recorded attempts run out.
 */
inline SliceOutcome run_slice(Rng& rng, int n, int m, double s_hat, double b, SpendMode mode) {
    if (b <= 0.0) return {};
    if (n <= 0) return {false, mode == SpendMode::continuous ? b : 0.0};
    int t_star = 0;  // position of the first success; 0 when the walk has none
    int left_m = m;
    for (int t = 1; t <= n && left_m > 0; ++t) {
        const auto pool = static_cast<std::uint64_t>(n - (t - 1));
        if (rng.below(pool) < static_cast<std::uint64_t>(left_m)) {
            t_star = t;
            break;
        }
    }
    if (mode == SpendMode::continuous) {
        if (t_star > 0) {
            const double T = (static_cast<double>(t_star - 1) + rng.uniform()) * s_hat;
            if (T <= b) return {true, T};
        }
        return {false, b};
    }
    const int affordable = std::min(n, static_cast<int>(std::floor(b / s_hat + 1e-9)));
    if (t_star > 0 && t_star <= affordable)
        return {true, static_cast<double>(t_star) * s_hat};
    return {false, static_cast<double>(affordable) * s_hat};
}

} // namespace detail

struct ProviderSimResult {
    double solve_rate = 0.0;
    double mean_spend = 0.0;
    std::int64_t trials = 0;
};

/// Empirical pass probability and spend for one provider on one problem.
inline ProviderSimResult simulate_provider(const ProblemStats& stats, double b,
                                           const SimConfig& config) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    config.validate();
    std::int64_t solved = 0;
    double spend = 0.0;
    for (std::int64_t t = 0; t < config.trials; ++t) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(t));
        const auto out = detail::run_slice(rng, stats.attempts, stats.successes, stats.mean_cost,
                                           b, config.mode);
        solved += out.solved ? 1 : 0;
        spend += out.spend;
    }
    ProviderSimResult r;
    r.trials = config.trials;
    r.solve_rate = static_cast<double>(solved) / static_cast<double>(config.trials);
    r.mean_spend = spend / static_cast<double>(config.trials);
    return r;
}

struct CascadeSimResult {
    double performance = 0.0;        // solved share over (trial, problem) pairs
    double mean_total_spend = 0.0;   // summed over problems, averaged over trials
    std::vector<double> provider_spend;  // per policy entry, same averaging
    std::int64_t trials = 0;
};

/**
 * Full cascade simulation: per trial and problem, providers run in policy
 * order on their budget slices until one solves the problem. Per-provider
 * spends sum to the total spend by construction.
 */
inline CascadeSimResult simulate_cascade(const CascadePolicy& policy, const Dataset& dataset,
                                         double b, const SimConfig& config) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    config.validate();
    policy.validate();
    if (dataset.problem_count() == 0) throw Error(Errc::empty_input, "dataset has no problems");

    const auto slices = allocate_budget(policy, b);
    struct SliceStats {
        int n;
        int m;
        double s_hat;
    };
    // [policy entry][problem]
    std::vector<std::vector<SliceStats>> stats(policy.entries.size());
    for (std::size_t e = 0; e < policy.entries.size(); ++e) {
        const std::size_t p = dataset.require_provider(policy.entries[e].provider_id);
        for (std::size_t j = 0; j < dataset.problem_count(); ++j) {
            const ProblemStats s = dataset.stats_at(p, j);
            stats[e].push_back(SliceStats{s.attempts, s.successes, s.mean_cost});
        }
    }

    const auto problems = dataset.problem_count();
    std::int64_t solved_pairs = 0;
    double total_spend = 0.0;
    std::vector<double> provider_spend(policy.entries.size(), 0.0);
    for (std::int64_t t = 0; t < config.trials; ++t) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(t));
        for (std::size_t j = 0; j < problems; ++j) {
            for (std::size_t e = 0; e < policy.entries.size(); ++e) {
                const auto& s = stats[e][j];
                const auto out = detail::run_slice(rng, s.n, s.m, s.s_hat, slices[e], config.mode);
                provider_spend[e] += out.spend;
                total_spend += out.spend;
                if (out.solved) {
                    ++solved_pairs;
                    break;
                }
            }
        }
    }
    CascadeSimResult r;
    r.trials = config.trials;
    const double denom = static_cast<double>(config.trials);
    r.performance = static_cast<double>(solved_pairs) / (denom * static_cast<double>(problems));
    r.mean_total_spend = total_spend / denom;
    r.provider_spend.resize(policy.entries.size());
    for (std::size_t e = 0; e < policy.entries.size(); ++e)
        r.provider_spend[e] = provider_spend[e] / denom;
    return r;
}

} // namespace arb
