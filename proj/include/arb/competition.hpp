#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arb/arbitrage.hpp"
#include "arb/cascade.hpp"
#include "arb/curves.hpp"
#include "arb/error.hpp"
#include "arb/types.hpp"

namespace arb {

/** One price-setting arbitrageur: what it pays (buy) and what it asks (sell). */
struct Seller {
    std::string id;
    PriceFrontier buy;
    PriceFrontier sell;  // always >= buy pointwise where defined
};

/**
 * Price competition state: the upstream provider market plus any number of
 * arbitrageur sellers. Sellers start by asking the full market price.
 */
struct MarketState {
    MarketFrontier provider_market;
    std::vector<Seller> sellers;
    int round = 0;
};

inline MarketState make_market_state(const MarketFrontier& provider_market,
                                     std::vector<std::pair<std::string, PriceFrontier>> entrants) {
    if (entrants.empty()) throw Error(Errc::bad_config, "price competition needs at least one seller");
    MarketState state;
    state.provider_market = provider_market;
    for (auto& [id, buy] : entrants) {
        if (buy.performance_grid != provider_market.performance_grid)
            throw Error(Errc::bad_config, "seller frontier grid differs from the market grid");
        Seller s;
        s.id = id;
        s.buy = buy;
        s.sell = buy;
        s.sell.owner_id = id + ":sell";
        for (std::size_t i = 0; i < buy.cost.size(); ++i) {
            if (!buy.cost[i]) continue;
            const auto& cp = provider_market.cost[i];
            s.sell.cost[i] = cp ? std::max(*buy.cost[i], *cp) : *buy.cost[i];
        }
        state.sellers.push_back(std::move(s));
    }
    return state;
}

/// Cheapest ask at each grid point across providers and all sellers.
inline std::vector<std::optional<double>> prevailing_price(const MarketState& state) {
    std::vector<std::optional<double>> out = state.provider_market.cost;
    for (const auto& s : state.sellers)
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!s.sell.cost[i]) continue;
            if (!out[i] || *s.sell.cost[i] < *out[i]) out[i] = s.sell.cost[i];
        }
    return out;
}

/// Cheapest ask excluding one seller's own prices (its competition).
inline std::vector<std::optional<double>> prevailing_excluding(const MarketState& state,
                                                               std::size_t seller_index) {
    std::vector<std::optional<double>> out = state.provider_market.cost;
    for (std::size_t k = 0; k < state.sellers.size(); ++k) {
        if (k == seller_index) continue;
        const auto& s = state.sellers[k];
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!s.sell.cost[i]) continue;
            if (!out[i] || *s.sell.cost[i] < *out[i]) out[i] = s.sell.cost[i];
        }
    }
    return out;
}

/**
 * One pricing turn: the seller re-prices to undercut the best competing offer
 * by the given fraction, never selling below its own buy cost. Levels without
 * any competing offer keep the current ask.
 */
inline void undercut_step(MarketState& state, std::size_t seller_index, double undercut_fraction) {
    if (!(undercut_fraction > 0.0 && undercut_fraction < 1.0))
        throw Error(Errc::bad_config, "undercut fraction must lie in (0,1)");
    if (seller_index >= state.sellers.size())
        throw Error(Errc::not_found, "no such seller in the market state");
    const auto competing = prevailing_excluding(state, seller_index);
    Seller& s = state.sellers[seller_index];
    for (std::size_t i = 0; i < s.sell.cost.size(); ++i) {
        if (!s.buy.cost[i] || !competing[i]) continue;
        // max() pins the ask to the exact buy cost once the floor binds
        s.sell.cost[i] = std::max(*s.buy.cost[i], *competing[i] * (1.0 - undercut_fraction));
    }
}

inline void undercut_step(MarketState& state, const std::string& seller_id,
                          double undercut_fraction) {
    for (std::size_t k = 0; k < state.sellers.size(); ++k)
        if (state.sellers[k].id == seller_id) {
            undercut_step(state, k, undercut_fraction);
            return;
        }
    throw Error(Errc::not_found, "no seller named '" + seller_id + "'");
}

struct RoundSnapshot {
    int round = 0;
    std::vector<std::optional<double>> prevailing;
    std::vector<PriceFrontier> asks;  // one per seller, in seller order
};

/**
 * Alternating-turn price competition. Sellers undercut in index order each
 * round; the loop stops early once a full round moves no price by more than
 * 1e-9 relative. snapshot[0] is the initial state.
 */
inline std::vector<RoundSnapshot> bertrand_simulate(MarketState& state, int rounds,
                                                    double undercut_fraction) {
    if (rounds < 0) throw Error(Errc::bad_config, "round count must be >= 0");
    if (state.sellers.empty()) throw Error(Errc::bad_config, "price competition needs a seller");
    std::vector<RoundSnapshot> trajectory;
    auto snapshot = [&]() {
        RoundSnapshot snap;
        snap.round = state.round;
        snap.prevailing = prevailing_price(state);
        for (const auto& s : state.sellers) snap.asks.push_back(s.sell);
        trajectory.push_back(std::move(snap));
    };
    snapshot();
    for (int r = 0; r < rounds; ++r) {
        const auto before = trajectory.back().prevailing;
        for (std::size_t k = 0; k < state.sellers.size(); ++k)
            undercut_step(state, k, undercut_fraction);
        ++state.round;
        snapshot();
        const auto& after = trajectory.back().prevailing;
        double max_rel = 0.0;
        for (std::size_t i = 0; i < after.size(); ++i) {
            if (!before[i] || !after[i]) continue;
            const double denom = std::max(std::abs(*before[i]), 1e-300);
            max_rel = std::max(max_rel, std::abs(*after[i] - *before[i]) / denom);
        }
        if (max_rel < 1e-9) break;
    }
    return trajectory;
}

/// Post-entry market price: the old price capped by the entrant's buy cost.
inline std::vector<std::optional<double>> equilibrium_frontier(const MarketFrontier& market,
                                                               const PriceFrontier& q_star) {
    if (market.performance_grid != q_star.performance_grid)
        throw Error(Errc::bad_config, "market and policy frontiers use different grids");
    std::vector<std::optional<double>> out = market.cost;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!q_star.cost[i]) continue;
        if (!out[i] || *q_star.cost[i] < *out[i]) out[i] = q_star.cost[i];
    }
    return out;
}

inline std::optional<double> equilibrium_price(const MarketFrontier& market,
                                               const PriceFrontier& q_star, double u) {
    const auto cp = market_cost_at(market, u);
    const auto cq = frontier_cost_at(q_star, u);
    if (!cp) return cq;
    if (!cq) return cp;
    return std::min(*cp, *cq);
}

/**
 * Cascade curve with per-provider cumulative spend tracked on the same
 * integration nodes, so revenue attribution at any budget stays consistent
 * with the curve's own cost values.
 */
class CascadeRevenueCurve {
public:
    CascadeRevenueCurve(const CascadePolicy& policy, const Dataset& dataset, const BudgetGrid& grid)
        : evaluator_(policy, dataset) {
        if (evaluator_.total_cap() < grid.b_max - 1e-12)
            throw Error(Errc::bad_config, "cascade caps sum below the requested budget grid");
        const auto cum = policy.cumulative_caps();
        const auto nodes = refine_nodes(grid.nodes(), cum);
        curve_ = build_curve_on_nodes("cascade", nodes, evaluator_.problem_count(),
                                      [&](double x) { return evaluator_.mean_performance(x); });
        cum_shares_.assign(policy.entries.size(),
                           std::vector<double>(curve_.budgets.size(), 0.0));
        const double scale = static_cast<double>(evaluator_.problem_count());
        for (std::size_t i = 1; i < curve_.budgets.size(); ++i) {
            const double dx = curve_.budgets[i] - curve_.budgets[i - 1];
            const double cell = scale * dx * 0.5 *
                                ((1.0 - curve_.performance[i - 1]) + (1.0 - curve_.performance[i]));
            const double mid = 0.5 * (curve_.budgets[i - 1] + curve_.budgets[i]);
            const auto seg = std::upper_bound(cum.begin(), cum.end(), mid);
            const std::size_t k =
                std::min(static_cast<std::size_t>(seg - cum.begin()), cum_shares_.size() - 1);
            for (std::size_t e = 0; e < cum_shares_.size(); ++e)
                cum_shares_[e][i] = cum_shares_[e][i - 1] + (e == k ? cell : 0.0);
        }
    }

    const ProviderCurve& curve() const { return curve_; }
    const CascadePolicy& policy() const { return evaluator_.policy(); }

    /// Expected payout to each cascade provider when consumers spend up to b.
    std::vector<double> shares_at_budget(double b) const {
        std::vector<double> out(cum_shares_.size(), 0.0);
        const auto& bs = curve_.budgets;
        if (b <= bs.front()) return out;
        if (b >= bs.back()) {
            for (std::size_t e = 0; e < out.size(); ++e) out[e] = cum_shares_[e].back();
            return out;
        }
        const auto i =
            static_cast<std::size_t>(std::upper_bound(bs.begin(), bs.end(), b) - bs.begin());
        const double t = (b - bs[i - 1]) / (bs[i] - bs[i - 1]);
        for (std::size_t e = 0; e < out.size(); ++e) {
            const double lo = cum_shares_[e][i - 1];
            out[e] = lo + t * (cum_shares_[e][i] - lo);
        }
        return out;
    }

private:
    CascadeEvaluator evaluator_;
    ProviderCurve curve_;
    std::vector<std::vector<double>> cum_shares_;  // [policy entry][node]
};

/** Revenue flows at one performance level, before and after arbitrage. */
struct RevenuePoint {
    double u = 0.0;
    bool feasible = false;                // the market offers u at all
    std::optional<double> expenditure;    // what the consumer pays: C_P(u)
    std::string before_provider;          // sole revenue taker pre-arbitrage
    bool arbitrage_active = false;        // policy serves u below the market price
    std::vector<double> after_share;      // payout per policy entry
    double arbitrage_profit = 0.0;        // expenditure minus payouts
};

struct RevenueReport {
    std::vector<std::string> policy_providers;      // policy entry order
    std::vector<RevenuePoint> points;
    std::map<std::string, double> before_total;     // summed expenditure per provider
    std::map<std::string, double> after_total;      // summed payouts per provider
    std::map<std::string, double> delta;            // after - before
    double profit_total = 0.0;
    std::vector<double> boundaries_before;          // u where the argmin provider flips
    std::vector<double> boundaries_after;           // u where the largest payout flips
};

/**
 * Splits consumer expenditure across providers at each grid level in
 * [u_min, u_max]. Pre-arbitrage the whole price goes to the cheapest
 * provider. Post-arbitrage, levels the policy serves below the market price
 * route payouts through the cascade; the difference stays with the
 * arbitrageur, so payouts plus profit equal expenditure identically.
 */
inline RevenueReport marginal_revenue_change(const Dataset& dataset,
                                             const std::vector<PriceFrontier>& provider_frontiers,
                                             const CascadePolicy& policy, const BudgetGrid& grid,
                                             double u_min = 0.0, double u_max = 1.0) {
    if (!(u_min >= 0.0 && u_max <= 1.0 && u_min <= u_max))
        throw Error(Errc::bad_config, "revenue range must satisfy 0 <= u_min <= u_max <= 1");
    const MarketFrontier market = market_frontier(provider_frontiers);
    const CascadeRevenueCurve rev(policy, dataset, grid);

    RevenueReport report;
    for (const auto& e : policy.entries) report.policy_providers.push_back(e.provider_id);

    std::string prev_before;
    std::string prev_after;
    for (std::size_t i = 0; i < market.performance_grid.size(); ++i) {
        const double u = market.performance_grid[i];
        if (u < u_min - 1e-12 || u > u_max + 1e-12) continue;
        RevenuePoint pt;
        pt.u = u;
        if (market.cost[i]) {
            pt.feasible = true;
            pt.expenditure = market.cost[i];
            pt.before_provider = market.provider[i];
            const auto b_star = budget_for_performance(rev.curve(), u);
            if (b_star) {
                auto shares = rev.shares_at_budget(*b_star);
                double paid = 0.0;
                for (double s : shares) paid += s;
                if (paid < *pt.expenditure) {
                    pt.arbitrage_active = true;
                    pt.after_share = std::move(shares);
                    pt.arbitrage_profit = *pt.expenditure - paid;
                }
            }
        }
        if (pt.feasible) {
            report.before_total[pt.before_provider] += *pt.expenditure;
            if (pt.arbitrage_active) {
                for (std::size_t e = 0; e < pt.after_share.size(); ++e)
                    report.after_total[report.policy_providers[e]] += pt.after_share[e];
                report.profit_total += pt.arbitrage_profit;
                std::size_t top = 0;
                for (std::size_t e = 1; e < pt.after_share.size(); ++e)
                    if (pt.after_share[e] > pt.after_share[top]) top = e;
                const std::string& top_id = report.policy_providers[top];
                if (!prev_after.empty() && top_id != prev_after)
                    report.boundaries_after.push_back(u);
                prev_after = top_id;
            } else {
                report.after_total[pt.before_provider] += *pt.expenditure;
            }
            if (!prev_before.empty() && pt.before_provider != prev_before)
                report.boundaries_before.push_back(u);
            prev_before = pt.before_provider;
        }
        report.points.push_back(std::move(pt));
    }
    std::map<std::string, double> ids;
    for (const auto& kv : report.before_total) ids[kv.first] = 0.0;
    for (const auto& kv : report.after_total) ids[kv.first] = 0.0;
    for (const auto& kv : ids) {
        const auto& id = kv.first;
        report.delta[id] = (report.after_total.count(id) ? report.after_total.at(id) : 0.0) -
                           (report.before_total.count(id) ? report.before_total.at(id) : 0.0);
    }
    return report;
}

} // namespace arb
