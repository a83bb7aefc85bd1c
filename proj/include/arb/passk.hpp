#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "arb/error.hpp"

namespace arb {

/**
 * Unbiased probability that at least one of k attempts drawn without
 * replacement from n recorded attempts (m of them successful) succeeds:
 *
 *   1 - C(n-m, k) / C(n, k)
 *
 * evaluated stably as 1 - prod_{i=0}^{k-1} (n-m-i)/(n-i).
 *
 * k == 0 returns 0. k > n throws: the estimator has no support beyond the
 * observed attempt count and is never extrapolated.
 */
inline double pass_at_k(int n, int m, int k) {
    if (n < 0 || m < 0 || m > n || k < 0)
        throw Error(Errc::bad_config, "pass_at_k requires 0 <= m <= n and k >= 0");
    if (k > n)
        throw Error(Errc::out_of_support, "pass_at_k: k exceeds recorded attempts");
    if (k == 0 || m == 0) return 0.0;
    double fail = 1.0;
    for (int i = 0; i < k; ++i) {
        const int misses_left = n - m - i;
        if (misses_left <= 0) return 1.0; // fewer failures than draws: success certain
        fail *= static_cast<double>(misses_left) / static_cast<double>(n - i);
    }
    return 1.0 - fail;
}

/// pass@i for i = 0..n in one sweep; table[0] = 0.
inline std::vector<double> pass_at_k_table(int n, int m) {
    if (n < 0 || m < 0 || m > n)
        throw Error(Errc::bad_config, "pass_at_k_table requires 0 <= m <= n");
    std::vector<double> table(static_cast<std::size_t>(n) + 1, 0.0);
    double fail = 1.0;
    for (int k = 1; k <= n; ++k) {
        const int misses_left = n - m - (k - 1);
        if (misses_left <= 0) {
            fail = 0.0;
        } else {
            fail *= static_cast<double>(misses_left) / static_cast<double>(n - (k - 1));
        }
        table[static_cast<std::size_t>(k)] = 1.0 - fail;
    }
    return table;
}

/**
 * Budget-indexed solve curve of one provider on one problem. A budget b buys
 * k = b / mean_cost attempts; fractional k interpolates linearly between the
 * adjacent pass@k values, anchored at pass@0 = 0, and saturates at pass@n.
 */
struct SolveCurve {
    double mean_cost = 1.0;      // mean cost per attempt (> 0)
    std::vector<double> passk;   // passk[i] = pass@i, size n+1; {0} when unobserved

    int attempts() const { return static_cast<int>(passk.size()) - 1; }

    double at_budget(double budget) const {
        const int n = attempts();
        if (n <= 0 || budget <= 0.0) return 0.0;
        const double k = budget / mean_cost;
        if (k >= static_cast<double>(n)) return passk.back();
        const int lo = static_cast<int>(k);
        const double frac = k - static_cast<double>(lo);
        const double p0 = passk[static_cast<std::size_t>(lo)];
        return p0 + frac * (passk[static_cast<std::size_t>(lo) + 1] - p0);
    }
};

} // namespace arb
