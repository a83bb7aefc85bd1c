#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arb/curves.hpp"
#include "arb/error.hpp"
#include "arb/types.hpp"

namespace arb {

/**
 * Ordered provider cascade with per-provider spending caps. A consumer budget
 * is routed through the providers in order, each claiming at most its cap.
 */
struct CapEntry {
    std::string provider_id;
    double cap = 0.0;
};

struct CascadePolicy {
    std::vector<CapEntry> entries;
    std::optional<double> budget_ceiling;  // largest per-issue budget the policy serves

    void validate() const {
        if (entries.empty()) throw Error(Errc::bad_config, "cascade policy has no providers");
        std::set<std::string> seen;
        for (const auto& e : entries) {
            if (e.provider_id.empty()) throw Error(Errc::bad_config, "cascade entry without provider_id");
            if (!seen.insert(e.provider_id).second)
                throw Error(Errc::bad_config, "duplicate provider '" + e.provider_id + "' in cascade");
            if (e.cap < 0.0) throw Error(Errc::bad_config, "negative cap for '" + e.provider_id + "'");
        }
        if (budget_ceiling && total_cap() < *budget_ceiling - 1e-12)
            throw Error(Errc::bad_config, "cascade caps sum below the policy's budget ceiling");
    }

    double total_cap() const {
        double sum = 0.0;
        for (const auto& e : entries) sum += e.cap;
        return sum;
    }

    /// Cumulative caps after each provider: C[i] = cap_0 + ... + cap_i.
    std::vector<double> cumulative_caps() const {
        std::vector<double> out;
        out.reserve(entries.size());
        double sum = 0.0;
        for (const auto& e : entries) {
            sum += e.cap;
            out.push_back(sum);
        }
        return out;
    }
};

/// Budget routed to each provider: remaining budget clamped to the cap.
inline std::vector<double> allocate_budget(const CascadePolicy& policy, double b) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    policy.validate();
    std::vector<double> out;
    out.reserve(policy.entries.size());
    double used = 0.0;
    for (const auto& e : policy.entries) {
        const double bi = std::min(std::max(b - used, 0.0), e.cap);
        out.push_back(bi);
        used += e.cap;
    }
    return out;
}

/**
 * Caches per-provider solve curves in policy order for repeated grid
 * evaluation. Per-issue success combines provider slices assuming
 * independence: p <- p + u * (1 - p).
 */
class CascadeEvaluator {
public:
    CascadeEvaluator(CascadePolicy policy, const Dataset& dataset) : policy_(std::move(policy)) {
        policy_.validate();
        if (dataset.problem_count() == 0) throw Error(Errc::empty_input, "dataset has no problems");
        problem_count_ = dataset.problem_count();
        double before = 0.0;
        for (const auto& e : policy_.entries) {
            const std::size_t p = dataset.require_provider(e.provider_id);
            curves_.push_back(dataset.provider_curves(p));
            prefix_.push_back(before);
            caps_.push_back(e.cap);
            before += e.cap;
        }
    }

    const CascadePolicy& policy() const { return policy_; }
    std::size_t problem_count() const { return problem_count_; }
    double total_cap() const { return prefix_.back() + caps_.back(); }

    double issue_prob(std::size_t problem, double b) const {
        double p = 0.0;
        for (std::size_t i = 0; i < caps_.size(); ++i) {
            const double bi = std::min(std::max(b - prefix_[i], 0.0), caps_[i]);
            const double u = curves_[i][problem].at_budget(bi);
            p += u * (1.0 - p);
        }
        return p;
    }

    double mean_performance(double b) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < problem_count_; ++j) sum += issue_prob(j, b);
        return sum / static_cast<double>(problem_count_);
    }

private:
    CascadePolicy policy_;
    std::size_t problem_count_ = 0;
    std::vector<std::vector<SolveCurve>> curves_;  // [policy position][problem]
    std::vector<double> prefix_;                   // caps consumed before each provider
    std::vector<double> caps_;
};

inline double cascade_issue_prob(const CascadePolicy& policy, const Dataset& dataset,
                                 std::string_view problem_id, double b) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    const std::size_t j = dataset.require_problem(problem_id);
    return CascadeEvaluator(policy, dataset).issue_prob(j, b);
}

inline double cascade_performance(const CascadePolicy& policy, const Dataset& dataset, double b) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    return CascadeEvaluator(policy, dataset).mean_performance(b);
}

/**
 * Cascade curve on the budget grid. Interior cumulative-cap boundaries are
 * inserted as extra integration nodes; a policy whose first cap already
 * exceeds the grid therefore reuses the plain grid and reproduces the
 * provider curve exactly.
 */
inline ProviderCurve cascade_curve(const CascadeEvaluator& ev, const BudgetGrid& grid,
                                   const std::string& label = "cascade") {
    if (ev.total_cap() < grid.b_max - 1e-12)
        throw Error(Errc::bad_config, "cascade caps sum below the requested budget grid");
    const auto nodes = refine_nodes(grid.nodes(), ev.policy().cumulative_caps());
    return build_curve_on_nodes(label, nodes, ev.problem_count(),
                                [&](double x) { return ev.mean_performance(x); });
}

inline ProviderCurve cascade_curve(const CascadePolicy& policy, const Dataset& dataset,
                                   const BudgetGrid& grid, const std::string& label = "cascade") {
    return cascade_curve(CascadeEvaluator(policy, dataset), grid, label);
}

inline PriceFrontier cascade_frontier(const CascadePolicy& policy, const Dataset& dataset,
                                      const BudgetGrid& grid, const std::vector<double>& perf_grid,
                                      const std::string& label = "cascade") {
    return frontier_from_curve(cascade_curve(policy, dataset, grid, label), perf_grid);
}

/**
 * Expected spend per provider at consumer budget b. Each trapezoid cell of
 * the survival integral is attributed to the provider whose spending segment
 * contains it; cells never straddle segment boundaries because boundaries are
 * integration nodes. Shares sum to the cascade's expected cost.
 */
inline std::vector<double> revenue_split(const CascadePolicy& policy, const Dataset& dataset,
                                         double b, double grid_step = kDefaultBudgetStep) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    const CascadeEvaluator ev(policy, dataset);
    std::vector<double> shares(policy.entries.size(), 0.0);
    const double x_end = std::min(b, ev.total_cap());
    if (x_end <= 0.0) return shares;
    const auto cum = policy.cumulative_caps();
    const auto nodes = refine_nodes(BudgetGrid{x_end, grid_step}.nodes(), cum);
    const double scale = static_cast<double>(ev.problem_count());
    double prev_perf = ev.mean_performance(nodes[0]);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double perf = ev.mean_performance(nodes[i]);
        const double dx = nodes[i] - nodes[i - 1];
        const double cell = scale * dx * 0.5 * ((1.0 - prev_perf) + (1.0 - perf));
        const double mid = 0.5 * (nodes[i - 1] + nodes[i]);
        const auto seg = std::upper_bound(cum.begin(), cum.end(), mid);
        const std::size_t k = std::min(static_cast<std::size_t>(seg - cum.begin()), shares.size() - 1);
        shares[k] += cell;
        prev_perf = perf;
    }
    return shares;
}

/**
 * Expected total consumer spend at budget b. Spending stops once every cap is
 * exhausted, so the integral runs to min(b, total caps).
 */
inline double cascade_expected_cost(const CascadePolicy& policy, const Dataset& dataset, double b,
                                    double grid_step = kDefaultBudgetStep) {
    if (b < 0.0) throw Error(Errc::bad_config, "budget must be >= 0");
    const CascadeEvaluator ev(policy, dataset);
    const double x_end = std::min(b, ev.total_cap());
    if (x_end <= 0.0) return 0.0;
    const auto nodes = refine_nodes(BudgetGrid{x_end, grid_step}.nodes(), policy.cumulative_caps());
    const auto curve = build_curve_on_nodes("cascade", nodes, ev.problem_count(),
                                            [&](double x) { return ev.mean_performance(x); });
    return curve.expected_cost.back();
}

/**
 * Default cascade order: ascending expected cost when each provider runs
 * alone at the smallest positive grid budget. Cheap fast solvers come first.
 * Ties break on provider id.
 */
inline std::vector<std::string> default_provider_order(const Dataset& dataset,
                                                       double probe_budget = kDefaultBudgetStep) {
    if (dataset.provider_count() == 0) throw Error(Errc::empty_input, "dataset has no providers");
    if (!(probe_budget > 0.0)) throw Error(Errc::bad_config, "probe budget must be > 0");
    std::vector<std::pair<double, std::string>> keyed;
    for (const auto& id : dataset.providers())
        keyed.emplace_back(provider_expected_cost(dataset, id, probe_budget, probe_budget), id);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> out;
    out.reserve(keyed.size());
    for (auto& [cost, id] : keyed) out.push_back(std::move(id));
    return out;
}

inline void save_policy(const CascadePolicy& policy, const std::string& path) {
    policy.validate();
    nlohmann::json j{{"schema", "arbkit-policy-v1"}};
    if (policy.budget_ceiling) j["budget_ceiling"] = *policy.budget_ceiling;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : policy.entries)
        j["entries"].push_back({{"provider_id", e.provider_id}, {"cap", e.cap}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write policy '" + path + "'");
    out << j.dump(2) << '\n';
}

inline CascadePolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open policy '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, path + ": bad JSON: " + e.what());
    }
    CascadePolicy policy;
    try {
        if (j.contains("budget_ceiling")) policy.budget_ceiling = j.at("budget_ceiling").get<double>();
        for (const auto& e : j.at("entries"))
            policy.entries.push_back(
                CapEntry{e.at("provider_id").get<std::string>(), e.at("cap").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, path + ": bad field: " + e.what());
    }
    policy.validate();
    return policy;
}

} // namespace arb
