#pragma once

// Synthetic datasets shared between the unit and acceptance suites.

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <arb/types.hpp>

namespace fixtures {

inline arb::ProblemStats row(std::string provider, std::string problem, int n, int m, double s,
                             std::set<std::string> tags = {}) {
    arb::ProblemStats st;
    st.provider_id = std::move(provider);
    st.problem_id = std::move(problem);
    st.attempts = n;
    st.successes = m;
    st.mean_cost = s;
    st.tags = std::move(tags);
    return st;
}

inline std::string label(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

/// One provider "p1", every problem identical: n=4, m=2, s_hat=0.5.
inline arb::Dataset uniform(std::size_t problems) {
    std::vector<arb::ProblemStats> rows;
    for (std::size_t j = 0; j < problems; ++j) rows.push_back(row("p1", label("q", j), 4, 2, 0.5));
    return arb::Dataset::from_stats(rows, arb::CostUnit::abstract_unit);
}

/**
 * Two-segment market. "alpha" clears easy problems cheaply (90% per attempt
 * at cost 0.01) and never solves hard ones; "beta" solves everything at 50%
 * per attempt but costs 0.1 per attempt. Problems carry "easy"/"hard" tags.
 */
inline arb::Dataset two_segment(std::size_t easy = 30, std::size_t hard = 20) {
    std::vector<arb::ProblemStats> rows;
    for (std::size_t j = 0; j < easy; ++j) {
        const auto id = label("e", j);
        rows.push_back(row("alpha", id, 10, 9, 0.01, {"easy"}));
        rows.push_back(row("beta", id, 10, 5, 0.1, {"easy"}));
    }
    for (std::size_t j = 0; j < hard; ++j) {
        const auto id = label("h", j);
        rows.push_back(row("alpha", id, 10, 0, 0.01, {"hard"}));
        rows.push_back(row("beta", id, 10, 5, 0.1, {"hard"}));
    }
    return arb::Dataset::from_stats(rows, arb::CostUnit::abstract_unit);
}

/**
 * "good" solves half its attempts; "waste" never solves anything and costs
 * double per attempt, so it is dominated at every budget.
 */
inline arb::Dataset dominated(std::size_t problems = 10) {
    std::vector<arb::ProblemStats> rows;
    for (std::size_t j = 0; j < problems; ++j) {
        const auto id = label("q", j);
        rows.push_back(row("good", id, 4, 2, 0.5));
        rows.push_back(row("waste", id, 4, 0, 1.0));
    }
    return arb::Dataset::from_stats(rows, arb::CostUnit::abstract_unit);
}

/// Two providers, ten problems with varied (n, m, s_hat) triples.
inline arb::Dataset mixed_pair() {
    struct Spec {
        int n, m;
        double s;
    };
    const Spec a[10] = {{6, 3, 0.07},  {8, 2, 0.05},  {10, 9, 0.02}, {5, 0, 0.04}, {7, 4, 0.03},
                        {9, 5, 0.06},  {4, 1, 0.08},  {10, 2, 0.035}, {6, 6, 0.045}, {8, 0, 0.055}};
    const Spec b[10] = {{10, 5, 0.1},  {6, 2, 0.12},  {5, 4, 0.09},  {8, 3, 0.11}, {9, 1, 0.095},
                        {7, 7, 0.105}, {10, 0, 0.085}, {5, 2, 0.115}, {6, 1, 0.125}, {9, 4, 0.13}};
    std::vector<arb::ProblemStats> rows;
    for (std::size_t j = 0; j < 10; ++j) {
        const auto id = label("x", j);
        rows.push_back(row("A", id, a[j].n, a[j].m, a[j].s));
        rows.push_back(row("B", id, b[j].n, b[j].m, b[j].s));
    }
    return arb::Dataset::from_stats(rows, arb::CostUnit::abstract_unit);
}

} // namespace fixtures
