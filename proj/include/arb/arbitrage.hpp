#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arb/cascade.hpp"
#include "arb/curves.hpp"
#include "arb/error.hpp"
#include "arb/types.hpp"

namespace arb {

inline double margin_of(double sell, double buy) {
    return sell > 0.0 ? (sell - buy) / sell : 0.0;
}

inline double markup_of(double sell, double buy) {
    return buy > 0.0 ? (sell - buy) / buy : 0.0;
}

/**
 * Per-performance-level gap between the market price and a policy's cost.
 * profit = max(market - policy, 0) when both are reachable, else 0. Points
 * where only the policy reaches u face no market reference; they are flagged
 * and skipped by aggregation.
 */
struct ProfitPoint {
    double u = 0.0;
    std::optional<double> market_cost;  // cheapest competing offer
    std::optional<double> policy_cost;  // the policy's own buy cost
    double profit = 0.0;
    double margin = 0.0;                // profit / market_cost
    double markup = 0.0;                // profit / policy_cost
    bool unbounded_reference = false;
};

struct ProfitCurve {
    std::vector<ProfitPoint> points;
};

inline ProfitPoint profit_point(double u, std::optional<double> market_cost,
                                std::optional<double> policy_cost) {
    ProfitPoint pt;
    pt.u = u;
    pt.market_cost = market_cost;
    pt.policy_cost = policy_cost;
    if (market_cost && policy_cost) {
        pt.profit = std::max(*market_cost - *policy_cost, 0.0);
        pt.margin = *market_cost > 0.0 ? pt.profit / *market_cost : 0.0;
        pt.markup = *policy_cost > 0.0 ? pt.profit / *policy_cost : 0.0;
    } else if (!market_cost && policy_cost) {
        pt.unbounded_reference = true;
    }
    return pt;
}

inline ProfitCurve profit_curve(const MarketFrontier& market, const PriceFrontier& policy) {
    if (market.performance_grid != policy.performance_grid)
        throw Error(Errc::bad_config, "market and policy frontiers use different grids");
    ProfitCurve out;
    out.points.reserve(market.performance_grid.size());
    for (std::size_t i = 0; i < market.performance_grid.size(); ++i)
        out.points.push_back(profit_point(market.performance_grid[i], market.cost[i], policy.cost[i]));
    return out;
}

inline double marginal_profit(const MarketFrontier& market, const PriceFrontier& policy, double u) {
    const auto cp = market_cost_at(market, u);
    const auto cq = frontier_cost_at(policy, u);
    if (!cp || !cq) return 0.0;
    return std::max(*cp - *cq, 0.0);
}

/** True when the policy undercuts the market price somewhere on the grid. */
struct Opportunity {
    bool found = false;
    double witness_u = 0.0;  // lowest grid u with policy cost < market price
};

inline Opportunity detect_opportunity(const MarketFrontier& market, const PriceFrontier& policy) {
    if (market.performance_grid != policy.performance_grid)
        throw Error(Errc::bad_config, "market and policy frontiers use different grids");
    for (std::size_t i = 0; i < market.performance_grid.size(); ++i)
        if (market.cost[i] && policy.cost[i] && *policy.cost[i] < *market.cost[i])
            return Opportunity{true, market.performance_grid[i]};
    return Opportunity{};
}

/**
 * Demand weight per performance grid point; empty means uniform demand 1.
 */
struct DemandWeights {
    std::vector<double> values;

    double at(std::size_t i) const { return values.empty() ? 1.0 : values[i]; }

    void validate(std::size_t grid_size) const {
        if (values.empty()) return;
        if (values.size() != grid_size)
            throw Error(Errc::bad_config, "demand weights do not match the performance grid");
        for (double v : values)
            if (v < 0.0) throw Error(Errc::bad_config, "negative demand weight");
    }
};

/**
 * Demand-weighted profit integral over [u_min, u_max], trapezoid rule on the
 * grid points inside the range. Unbounded-reference points contribute 0.
 */
inline double aggregate_profit(const ProfitCurve& curve, const DemandWeights& weights,
                               double u_min, double u_max) {
    if (!(u_min >= 0.0 && u_max <= 1.0 && u_min <= u_max))
        throw Error(Errc::bad_config, "profit aggregation range must satisfy 0 <= u_min <= u_max <= 1");
    weights.validate(curve.points.size());
    std::vector<std::pair<double, double>> vals;  // (u, weighted profit)
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        if (pt.u < u_min - 1e-12 || pt.u > u_max + 1e-12) continue;
        const double f = pt.unbounded_reference ? 0.0 : pt.profit * weights.at(i);
        vals.emplace_back(pt.u, f);
    }
    if (vals.empty())
        throw Error(Errc::bad_config, "profit aggregation range misses the performance grid");
    double sum = 0.0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        sum += 0.5 * (vals[i].first - vals[i - 1].first) * (vals[i].second + vals[i - 1].second);
    return sum;
}

inline double aggregate_profit(const MarketFrontier& market, const PriceFrontier& policy,
                               const DemandWeights& weights, double u_min, double u_max) {
    return aggregate_profit(profit_curve(market, policy), weights, u_min, u_max);
}

/// Mean profit margin over grid points in [u_min, u_max], skipping flagged points.
inline double mean_margin(const ProfitCurve& curve, double u_min, double u_max) {
    if (!(u_min >= 0.0 && u_max <= 1.0 && u_min <= u_max))
        throw Error(Errc::bad_config, "margin range must satisfy 0 <= u_min <= u_max <= 1");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& pt : curve.points) {
        if (pt.u < u_min - 1e-12 || pt.u > u_max + 1e-12) continue;
        if (pt.unbounded_reference) continue;
        sum += pt.margin;
        ++count;
    }
    if (count == 0) throw Error(Errc::bad_config, "margin range misses the performance grid");
    return sum / static_cast<double>(count);
}

/**
 * Sell frontier: undercut the market by a fraction, floored at own buy cost.
 * Levels only the policy reaches sell at cost (no reference to undercut).
 */
inline PriceFrontier sell_prices(const PriceFrontier& policy, const MarketFrontier& market,
                                 double undercut_fraction) {
    if (!(undercut_fraction > 0.0 && undercut_fraction < 1.0))
        throw Error(Errc::bad_config, "undercut fraction must lie in (0,1)");
    if (market.performance_grid != policy.performance_grid)
        throw Error(Errc::bad_config, "market and policy frontiers use different grids");
    PriceFrontier out;
    out.owner_id = policy.owner_id + ":sell";
    out.performance_grid = policy.performance_grid;
    out.cost.resize(policy.cost.size());
    for (std::size_t i = 0; i < policy.cost.size(); ++i) {
        if (!policy.cost[i]) continue;
        const double buy = *policy.cost[i];
        out.cost[i] = market.cost[i] ? std::max(buy, *market.cost[i] * (1.0 - undercut_fraction)) : buy;
    }
    return out;
}

struct OptimizerConfig {
    double b_max = kDefaultBudgetMax;
    double budget_step = kDefaultBudgetStep;
    double cap_step = kDefaultCapStep;
    double perf_step = kDefaultPerfStep;
    double u_min = 0.0;   // aggregation range; [0,1] covers the reachable range
    double u_max = 1.0;
    bool exhaustive_orderings = false;  // permutations, allowed up to 4 providers
    DemandWeights weights;
    // called as (policies evaluated, total, best profit so far)
    std::function<void(std::size_t, std::size_t, double)> progress;
};

struct OptimizeResult {
    CascadePolicy policy;
    double profit = 0.0;
};

namespace detail {

/// Visits every cap-step composition (c_0..c_{P-1}), sum fixed to `steps`.
template <class Fn>
void for_each_composition(std::size_t providers, std::size_t steps, std::vector<std::size_t>& caps,
                          std::size_t slot, std::size_t used, Fn&& fn) {
    if (slot + 1 == providers) {
        caps[slot] = steps - used;
        fn(caps);
        return;
    }
    for (std::size_t c = 0; c + used <= steps; ++c) {
        caps[slot] = c;
        for_each_composition(providers, steps, caps, slot + 1, used + c, fn);
    }
}

inline std::size_t composition_count(std::size_t providers, std::size_t steps) {
    // C(steps + providers - 1, providers - 1)
    std::size_t n = steps + providers - 1;
    std::size_t k = providers - 1;
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return static_cast<std::size_t>(std::llround(c));
}

/// Caps from step counts; the last provider absorbs rounding residue.
inline std::vector<double> caps_from_steps(const std::vector<std::size_t>& steps, double cap_step,
                                           double b_max) {
    std::vector<double> caps(steps.size());
    double used = 0.0;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        caps[i] = static_cast<double>(steps[i]) * cap_step;
        used += caps[i];
    }
    caps.back() = b_max - used;
    return caps;
}

} // namespace detail

/**
 * Exhaustive grid search for the profit-maximizing cascade caps. Cap vectors
 * sum to b_max; the candidate provider order is the ascending-cost heuristic,
 * or every permutation when exhaustive_orderings is set (at most 4
 * providers). Ties prefer the earliest order and then the lexicographically
 * greatest cap vector, which parks the whole budget on the earliest providers.
 */
inline OptimizeResult optimize_policy(const Dataset& dataset, const OptimizerConfig& cfg) {
    if (dataset.provider_count() < 2)
        throw Error(Errc::bad_config, "cap search needs at least two providers");
    if (!(cfg.cap_step > 0.0)) throw Error(Errc::bad_config, "cap step must be > 0");
    const BudgetGrid grid{cfg.b_max, cfg.budget_step};
    grid.validate();
    const auto pgrid = performance_grid(cfg.perf_step);
    cfg.weights.validate(pgrid.size());

    std::vector<PriceFrontier> frontiers;
    for (const auto& id : dataset.providers())
        frontiers.push_back(frontier_from_curve(build_provider_curve(dataset, id, grid), pgrid));
    const MarketFrontier market = market_frontier(frontiers);

    std::vector<std::vector<std::string>> orders;
    if (cfg.exhaustive_orderings) {
        if (dataset.provider_count() > 4)
            throw Error(Errc::bad_config, "exhaustive ordering search is limited to 4 providers");
        std::vector<std::string> ids = dataset.providers();
        std::sort(ids.begin(), ids.end());
        do orders.push_back(ids);
        while (std::next_permutation(ids.begin(), ids.end()));
    } else {
        orders.push_back(default_provider_order(dataset, cfg.budget_step));
    }

    const auto steps_total = static_cast<std::size_t>(std::llround(cfg.b_max / cfg.cap_step));
    if (steps_total == 0) throw Error(Errc::bad_config, "cap step exceeds b_max");
    const std::size_t total =
        orders.size() * detail::composition_count(dataset.provider_count(), steps_total);

    OptimizeResult best;
    std::vector<double> best_caps;
    std::size_t evaluated = 0;
    for (const auto& order : orders) {
        std::vector<std::size_t> slots(order.size(), 0);
        detail::for_each_composition(order.size(), steps_total, slots, 0, 0,
                                     [&](const std::vector<std::size_t>& comp) {
            const auto caps = detail::caps_from_steps(comp, cfg.cap_step, cfg.b_max);
            CascadePolicy policy;
            for (std::size_t i = 0; i < order.size(); ++i)
                policy.entries.push_back(CapEntry{order[i], caps[i]});
            policy.budget_ceiling = cfg.b_max;
            const auto frontier = cascade_frontier(policy, dataset, grid, pgrid);
            const double profit =
                aggregate_profit(market, frontier, cfg.weights, cfg.u_min, cfg.u_max);
            bool same_order = !best_caps.empty();
            for (std::size_t i = 0; same_order && i < order.size(); ++i)
                same_order = best.policy.entries[i].provider_id == order[i];
            // earliest order wins ties; within an order, greatest caps win
            const bool better = best_caps.empty() || profit > best.profit ||
                                (profit == best.profit && same_order && caps > best_caps);
            if (better) {
                best.policy = policy;
                best.profit = profit;
                best_caps = caps;
            }
            ++evaluated;
            if (cfg.progress) cfg.progress(evaluated, total, best.profit);
        });
    }
    return best;
}

} // namespace arb
