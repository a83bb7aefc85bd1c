#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "arb/arbitrage.hpp"
#include "arb/curves.hpp"
#include "arb/error.hpp"
#include "arb/rng.hpp"
#include "arb/types.hpp"

namespace arb {

/**
 * What an arbitrageur learns for a limited search budget: a uniform subsample
 * of problems, each probed on every provider up to the per-query cap.
 */
struct SearchSample {
    Dataset data;
    std::vector<std::string> problem_ids;  // sampled problems, sorted
    double charged_spend = 0.0;            // worst-case: cap per sampled problem
    double actual_spend = 0.0;             // truncated attempt costs actually incurred
    std::uint64_t seed = 0;
};

/**
 * Samples problems without replacement until the budget covers no further
 * worst-case price comparison, then truncates each provider's attempts to
 * the per-query cap. Pairs with retained attempt logs truncate in recorded
 * order; aggregated-only pairs keep a hypergeometric subsample of the same
 * size a random ordering would allow.
 */
inline SearchSample draw_search_sample(const Dataset& dataset, double total_budget,
                                       double per_query_cap, std::uint64_t seed) {
    if (!(total_budget > 0.0)) throw Error(Errc::bad_config, "search budget must be > 0");
    if (!(per_query_cap > 0.0)) throw Error(Errc::bad_config, "per-query cap must be > 0");
    if (dataset.empty()) throw Error(Errc::empty_input, "cannot sample an empty dataset");
    const auto comparisons =
        static_cast<std::size_t>(std::floor(total_budget / per_query_cap + 1e-9));
    if (comparisons == 0)
        throw Error(Errc::empty_input, "search budget below one price comparison");
    const std::size_t take = std::min(comparisons, dataset.problem_count());

    Rng rng(seed);
    std::vector<std::size_t> order(dataset.problem_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(static_cast<std::uint64_t>(order.size() - i));
        std::swap(order[i], order[j]);
    }

    SearchSample sample;
    sample.seed = seed;
    sample.charged_spend = static_cast<double>(take) * per_query_cap;
    for (std::size_t i = 0; i < take; ++i)
        sample.problem_ids.push_back(dataset.problems()[order[i]]);
    std::sort(sample.problem_ids.begin(), sample.problem_ids.end());

    std::vector<ProblemStats> rows;
    for (const auto& problem : sample.problem_ids) {
        const std::size_t j = dataset.require_problem(problem);
        for (std::size_t p = 0; p < dataset.provider_count(); ++p) {
            if (!dataset.observed(p, j)) continue;
            const ProblemStats full = dataset.stats_at(p, j);
            ProblemStats kept = full;
            kept.attempts = 0;
            kept.successes = 0;
            double spent = 0.0;
            if (const auto* log = dataset.attempt_log(p, j)) {
                for (const auto& a : *log) {
                    if (spent + a.cost > per_query_cap * (1.0 + 1e-12)) break;
                    spent += a.cost;
                    ++kept.attempts;
                    if (a.success) ++kept.successes;
                }
                if (kept.attempts > 0) kept.mean_cost = spent / kept.attempts;
            } else {
                const int afford = static_cast<int>(std::floor(per_query_cap / full.mean_cost + 1e-9));
                kept.attempts = std::min(full.attempts, afford);
                int left_m = full.successes;
                int pool = full.attempts;
                for (int t = 0; t < kept.attempts; ++t) {
                    if (left_m > 0 &&
                        rng.below(static_cast<std::uint64_t>(pool)) <
                            static_cast<std::uint64_t>(left_m)) {
                        ++kept.successes;
                        --left_m;
                    }
                    --pool;
                }
                spent = kept.mean_cost * kept.attempts;
            }
            sample.actual_spend += spent;
            if (kept.attempts > 0) rows.push_back(std::move(kept));
        }
    }
    if (rows.empty())
        throw Error(Errc::empty_input, "per-query cap too small to afford any attempt");
    sample.data = Dataset::from_stats(std::move(rows), dataset.unit());
    return sample;
}

struct FitResult {
    CascadePolicy policy;
    double fit_profit = 0.0;    // optimizer objective on the sample
    double eval_margin = 0.0;   // mean margin against the evaluation market
};

/**
 * Fits caps on the sample and scores the fitted policy against the
 * evaluation dataset's market prices: mean margin over [u_min, u_max].
 */
inline FitResult fit_and_evaluate(const Dataset& fit_data, const Dataset& eval_data,
                                  const OptimizerConfig& cfg, double u_min, double u_max) {
    if (fit_data.empty()) throw Error(Errc::empty_input, "empty fitting dataset");
    if (eval_data.empty()) throw Error(Errc::empty_input, "empty evaluation dataset");
    FitResult result;
    const OptimizeResult fitted = optimize_policy(fit_data, cfg);
    result.policy = fitted.policy;
    result.fit_profit = fitted.profit;

    const BudgetGrid grid{cfg.b_max, cfg.budget_step};
    const auto pgrid = performance_grid(cfg.perf_step);
    std::vector<PriceFrontier> frontiers;
    for (const auto& id : eval_data.providers())
        frontiers.push_back(frontier_from_curve(build_provider_curve(eval_data, id, grid), pgrid));
    const MarketFrontier market = market_frontier(frontiers);
    const PriceFrontier mine = cascade_frontier(result.policy, eval_data, grid, pgrid);
    result.eval_margin = mean_margin(profit_curve(market, mine), u_min, u_max);
    return result;
}

inline FitResult fit_and_evaluate(const SearchSample& sample, const Dataset& eval_data,
                                  const OptimizerConfig& cfg, double u_min, double u_max) {
    return fit_and_evaluate(sample.data, eval_data, cfg, u_min, u_max);
}

struct BootstrapResult {
    double mean = 0.0;
    double lo = 0.0;    // 2.5th percentile
    double hi = 0.0;    // 97.5th percentile
    std::vector<double> margins;  // one per replicate, in replicate order
};

inline double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) throw Error(Errc::empty_input, "percentile of an empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/**
 * Repeats draw -> fit -> evaluate with independent per-replicate seeds and
 * reports the mean margin with a percentile interval.
 */
inline BootstrapResult bootstrap_profit_ci(const Dataset& dataset, double total_budget,
                                           double per_query_cap, int resamples,
                                           std::uint64_t seed, const OptimizerConfig& cfg,
                                           double u_min, double u_max) {
    if (resamples < 1) throw Error(Errc::bad_config, "bootstrap needs at least one replicate");
    BootstrapResult out;
    out.margins.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        const auto rep_seed = Rng::substream_seed(seed, static_cast<std::uint64_t>(r));
        const SearchSample sample = draw_search_sample(dataset, total_budget, per_query_cap, rep_seed);
        out.margins.push_back(fit_and_evaluate(sample, dataset, cfg, u_min, u_max).eval_margin);
    }
    out.mean = std::accumulate(out.margins.begin(), out.margins.end(), 0.0) /
               static_cast<double>(out.margins.size());
    std::vector<double> sorted = out.margins;
    std::sort(sorted.begin(), sorted.end());
    out.lo = percentile(sorted, 0.025);
    out.hi = percentile(sorted, 0.975);
    return out;
}

/**
 * Distribution-shift check: fit on one split, score on the other. The splits
 * must not share problems unless overlap is explicitly allowed.
 */
inline FitResult ood_evaluate(const Dataset& train, const Dataset& test, const OptimizerConfig& cfg,
                              double u_min, double u_max, bool allow_overlap = false) {
    if (!allow_overlap)
        for (const auto& id : train.problems())
            if (test.problem_index(id))
                throw Error(Errc::overlapping_split,
                            "problem '" + id + "' appears in both splits");
    return fit_and_evaluate(train, test, cfg, u_min, u_max);
}

} // namespace arb
