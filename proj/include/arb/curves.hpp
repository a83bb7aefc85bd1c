#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arb/error.hpp"
#include "arb/passk.hpp"
#include "arb/types.hpp"

namespace arb {

/// Uniform per-issue budget grid {0, step, 2*step, ..., b_max}.
struct BudgetGrid {
    double b_max = kDefaultBudgetMax;
    double step = kDefaultBudgetStep;

    void validate() const {
        if (!(b_max > 0.0)) throw Error(Errc::bad_config, "b_max must be > 0");
        if (!(step > 0.0)) throw Error(Errc::bad_config, "budget grid step must be > 0");
    }

    std::vector<double> nodes() const {
        validate();
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(b_max / step) + 2);
        for (std::size_t i = 0;; ++i) {
            const double x = static_cast<double>(i) * step;
            if (x >= b_max - step * 1e-9) break;
            out.push_back(x);
        }
        out.push_back(b_max); // last node lands on b_max exactly
        return out;
    }
};

/**
 * Inserts extra interior breakpoints into a sorted node list. Breakpoints
 * within step*1e-6 of an existing node are dropped so aligned boundaries do
 * not perturb the base grid.
 */
inline std::vector<double> refine_nodes(std::vector<double> nodes, const std::vector<double>& extra) {
    if (nodes.empty()) throw Error(Errc::bad_config, "empty node list");
    const double lo = nodes.front();
    const double hi = nodes.back();
    double min_gap = hi - lo;
    for (std::size_t i = 1; i < nodes.size(); ++i) min_gap = std::min(min_gap, nodes[i] - nodes[i - 1]);
    const double eps = min_gap * 1e-6;
    for (double x : extra) {
        if (x <= lo + eps || x >= hi - eps) continue;
        auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
        const bool near_next = it != nodes.end() && *it - x < eps;
        const bool near_prev = it != nodes.begin() && x - *(it - 1) < eps;
        if (!near_next && !near_prev) nodes.insert(it, x);
    }
    return nodes;
}

/**
 * A policy's (or provider's) performance and cumulative expected cost sampled
 * on a budget grid. Both series are monotone nondecreasing and start at 0.
 */
struct ProviderCurve {
    std::string provider_id;
    std::vector<double> budgets;       // strictly increasing, budgets[0] == 0
    std::vector<double> performance;   // mean solve probability at each budget
    std::vector<double> expected_cost; // total expected spend over all problems
    std::size_t problem_count = 0;

    double performance_at(double b) const { return interp(performance, b); }
    double cost_at(double b) const { return interp(expected_cost, b); }

private:
    double interp(const std::vector<double>& y, double b) const {
        if (budgets.empty()) throw Error(Errc::empty_input, "empty curve");
        if (b <= budgets.front()) return y.front();
        if (b >= budgets.back()) return y.back();
        const auto it = std::upper_bound(budgets.begin(), budgets.end(), b);
        const std::size_t i = static_cast<std::size_t>(it - budgets.begin());
        const double t = (b - budgets[i - 1]) / (budgets[i] - budgets[i - 1]);
        return y[i - 1] + t * (y[i] - y[i - 1]);
    }
};

/**
 * Evaluates mean performance on each node and accumulates expected cost with
 * the survival identity: cost(b) = |J| * integral of (1 - perf) from 0 to b,
 * trapezoid rule between nodes. `mean_perf(b)` must be monotone in b.
 * Shared by the provider and cascade paths so degenerate cascades reproduce
 * provider curves exactly.
 */
template <class MeanPerfFn>
ProviderCurve build_curve_on_nodes(std::string id, std::vector<double> nodes,
                                   std::size_t problem_count, MeanPerfFn&& mean_perf) {
    if (nodes.empty()) throw Error(Errc::bad_config, "empty node list");
    if (problem_count == 0) throw Error(Errc::empty_input, "no problems to evaluate");
    ProviderCurve curve;
    curve.provider_id = std::move(id);
    curve.problem_count = problem_count;
    curve.budgets = std::move(nodes);
    curve.performance.resize(curve.budgets.size());
    curve.expected_cost.resize(curve.budgets.size());
    const double scale = static_cast<double>(problem_count);
    for (std::size_t i = 0; i < curve.budgets.size(); ++i) {
        curve.performance[i] = mean_perf(curve.budgets[i]);
        if (i == 0) {
            curve.expected_cost[i] = 0.0;
        } else {
            const double dx = curve.budgets[i] - curve.budgets[i - 1];
            const double survival =
                0.5 * ((1.0 - curve.performance[i - 1]) + (1.0 - curve.performance[i]));
            curve.expected_cost[i] = curve.expected_cost[i - 1] + scale * dx * survival;
        }
    }
    return curve;
}

/// Mean solve probability over a fixed set of per-problem solve curves.
inline double mean_solve_probability(const std::vector<SolveCurve>& curves, double b) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c.at_budget(b);
    return sum / static_cast<double>(curves.size());
}

/// Probability that `provider` solves an average problem within per-issue budget b.
inline double provider_performance(const Dataset& dataset, std::string_view provider, double b) {
    const std::size_t p = dataset.require_provider(provider);
    if (dataset.problem_count() == 0) throw Error(Errc::empty_input, "dataset has no problems");
    return mean_solve_probability(dataset.provider_curves(p), b);
}

/// Expected total spend for running `provider` on every problem up to per-issue budget b.
inline double provider_expected_cost(const Dataset& dataset, std::string_view provider, double b,
                                     double grid_step = kDefaultBudgetStep) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    if (b == 0.0) return 0.0;
    const std::size_t p = dataset.require_provider(provider);
    const auto curves = dataset.provider_curves(p);
    const auto nodes = BudgetGrid{b, grid_step}.nodes();
    const auto curve = build_curve_on_nodes(std::string(provider), nodes, curves.size(),
                                            [&](double x) { return mean_solve_probability(curves, x); });
    return curve.expected_cost.back();
}

inline ProviderCurve build_provider_curve(const Dataset& dataset, std::string_view provider,
                                          const BudgetGrid& grid) {
    const std::size_t p = dataset.require_provider(provider);
    const auto curves = dataset.provider_curves(p);
    if (curves.empty()) throw Error(Errc::empty_input, "dataset has no problems");
    return build_curve_on_nodes(std::string(provider), grid.nodes(), curves.size(),
                                [&](double x) { return mean_solve_probability(curves, x); });
}

/**
 * Minimal cost C(u) per target performance u; an empty cost marks levels the
 * owner cannot reach at any allowed budget. Reachable costs are monotone
 * nondecreasing and the unreachable region is a suffix of the grid.
 */
struct PriceFrontier {
    std::string owner_id;
    std::vector<double> performance_grid;      // ascending, in [0, 1]
    std::vector<std::optional<double>> cost;   // aligned with performance_grid
};

/// Uniform performance grid {0, step, ..., 1}.
inline std::vector<double> performance_grid(double step = kDefaultPerfStep) {
    if (!(step > 0.0)) throw Error(Errc::bad_config, "performance grid step must be > 0");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double u = static_cast<double>(i) * step;
        if (u >= 1.0 - step * 1e-9) break;
        out.push_back(u);
    }
    out.push_back(1.0);
    return out;
}

/**
 * Minimal expected cost at which the curve reaches performance u, linearly
 * interpolating between bracketing grid budgets. Empty when even the full
 * budget falls short.
 */
inline std::optional<double> cost_to_performance(const ProviderCurve& curve, double u) {
    if (u < 0.0 || u > 1.0) throw Error(Errc::bad_config, "target performance outside [0,1]");
    if (curve.performance.empty()) throw Error(Errc::empty_input, "empty curve");
    if (u <= curve.performance.front()) return curve.expected_cost.front();
    const auto it = std::lower_bound(curve.performance.begin(), curve.performance.end(), u);
    if (it == curve.performance.end()) return std::nullopt;
    const std::size_t i = static_cast<std::size_t>(it - curve.performance.begin());
    if (curve.performance[i] == u) return curve.expected_cost[i];
    const double span = curve.performance[i] - curve.performance[i - 1];
    const double t = (u - curve.performance[i - 1]) / span;
    return curve.expected_cost[i - 1] + t * (curve.expected_cost[i] - curve.expected_cost[i - 1]);
}

/// Minimal per-issue budget at which the curve reaches performance u.
inline std::optional<double> budget_for_performance(const ProviderCurve& curve, double u) {
    if (u < 0.0 || u > 1.0) throw Error(Errc::bad_config, "target performance outside [0,1]");
    if (curve.performance.empty()) throw Error(Errc::empty_input, "empty curve");
    if (u <= curve.performance.front()) return curve.budgets.front();
    const auto it = std::lower_bound(curve.performance.begin(), curve.performance.end(), u);
    if (it == curve.performance.end()) return std::nullopt;
    const std::size_t i = static_cast<std::size_t>(it - curve.performance.begin());
    if (curve.performance[i] == u) return curve.budgets[i];
    const double span = curve.performance[i] - curve.performance[i - 1];
    const double t = (u - curve.performance[i - 1]) / span;
    return curve.budgets[i - 1] + t * (curve.budgets[i] - curve.budgets[i - 1]);
}

inline PriceFrontier frontier_from_curve(const ProviderCurve& curve,
                                         const std::vector<double>& perf_grid) {
    PriceFrontier f;
    f.owner_id = curve.provider_id;
    f.performance_grid = perf_grid;
    f.cost.reserve(perf_grid.size());
    for (double u : perf_grid) f.cost.push_back(cost_to_performance(curve, u));
    return f;
}

/// Frontier cost at an off-grid u; empty beyond the last reachable grid point.
inline std::optional<double> frontier_cost_at(const PriceFrontier& f, double u) {
    if (u < 0.0 || u > 1.0) throw Error(Errc::bad_config, "target performance outside [0,1]");
    if (f.performance_grid.empty()) throw Error(Errc::empty_input, "empty frontier");
    const auto& g = f.performance_grid;
    if (u <= g.front()) return f.cost.front();
    const auto it = std::lower_bound(g.begin(), g.end(), u);
    if (it == g.end()) return std::nullopt;
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    if (g[i] == u) return f.cost[i];
    if (!f.cost[i] || !f.cost[i - 1]) return std::nullopt;
    const double t = (u - g[i - 1]) / (g[i] - g[i - 1]);
    return *f.cost[i - 1] + t * (*f.cost[i] - *f.cost[i - 1]);
}

/**
 * Market price: pointwise minimum over seller frontiers, remembering which
 * seller provides each level. Ties go to the lexicographically smallest id.
 */
struct MarketFrontier {
    std::vector<double> performance_grid;
    std::vector<std::optional<double>> cost;
    std::vector<std::string> provider;  // empty string where no seller reaches u
};

inline MarketFrontier market_frontier(const std::vector<PriceFrontier>& frontiers) {
    if (frontiers.empty()) throw Error(Errc::empty_input, "market has no sellers");
    const auto& grid = frontiers.front().performance_grid;
    for (const auto& f : frontiers)
        if (f.performance_grid != grid)
            throw Error(Errc::bad_config, "seller frontiers use different performance grids");
    MarketFrontier m;
    m.performance_grid = grid;
    m.cost.resize(grid.size());
    m.provider.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto& f : frontiers) {
            if (!f.cost[i]) continue;
            if (!m.cost[i] || *f.cost[i] < *m.cost[i] ||
                (*f.cost[i] == *m.cost[i] && f.owner_id < m.provider[i])) {
                m.cost[i] = f.cost[i];
                m.provider[i] = f.owner_id;
            }
        }
    }
    return m;
}

/// Market price at an off-grid u; empty beyond the last reachable grid point.
inline std::optional<double> market_cost_at(const MarketFrontier& m, double u) {
    if (u < 0.0 || u > 1.0) throw Error(Errc::bad_config, "target performance outside [0,1]");
    if (m.performance_grid.empty()) throw Error(Errc::empty_input, "empty market frontier");
    const auto& g = m.performance_grid;
    if (u <= g.front()) return m.cost.front();
    const auto it = std::lower_bound(g.begin(), g.end(), u);
    if (it == g.end()) return std::nullopt;
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    if (g[i] == u) return m.cost[i];
    if (!m.cost[i] || !m.cost[i - 1]) return std::nullopt;
    const double t = (u - g[i - 1]) / (g[i] - g[i - 1]);
    return *m.cost[i - 1] + t * (*m.cost[i] - *m.cost[i - 1]);
}

/// Cheapest offer for performance u across the market, with its seller.
struct MarketQuote {
    std::optional<double> cost;
    std::string provider_id;
};

inline MarketQuote market_price(const std::vector<PriceFrontier>& frontiers, double u) {
    if (frontiers.empty()) throw Error(Errc::empty_input, "market has no sellers");
    MarketQuote q;
    for (const auto& f : frontiers) {
        const auto c = frontier_cost_at(f, u);
        if (!c) continue;
        if (!q.cost || *c < *q.cost || (*c == *q.cost && f.owner_id < q.provider_id)) {
            q.cost = c;
            q.provider_id = f.owner_id;
        }
    }
    return q;
}

/// Pass probability of a single (provider, problem) pair at per-issue budget b.
inline double pass_at_budget(const ProblemStats& stats, double b) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    if (stats.attempts <= 0) return 0.0;
    SolveCurve curve{stats.mean_cost, pass_at_k_table(stats.attempts, stats.successes)};
    return curve.at_budget(b);
}

} // namespace arb
