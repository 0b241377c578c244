#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "augbagg/errors.hpp"

namespace augbagg {

inline double mean(std::span<const double> values) {
    if (values.empty()) throw argument_error("mean: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Unbiased (n-1) sample variance; 0 for fewer than two values.
inline double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(n - 1);
}

// Standard normal CDF via erfc; accurate to well below 1e-10 over the real line.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Binomial(n, p) pmf table computed by the stable multiplicative recurrence.
inline std::vector<double> binomial_pmf_table(int n, double p) {
    if (n < 0 || p < 0.0 || p > 1.0) throw argument_error("binomial_pmf_table: invalid n or p");
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    if (p == 0.0) { pmf[0] = 1.0; return pmf; }
    if (p == 1.0) { pmf.back() = 1.0; return pmf; }
    // log-space start avoids underflow of (1-p)^n for large n.
    double log_term = static_cast<double>(n) * std::log1p(-p);
    const double log_odds = std::log(p) - std::log1p(-p);
    for (int k = 0; k <= n; ++k) {
        pmf[static_cast<std::size_t>(k)] = std::exp(log_term);
        if (k < n) {
            log_term += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1)) + log_odds;
        }
    }
    return pmf;
}

// P(X <= k) for X ~ Binomial(n, p).
inline double binomial_cdf(int k, int n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    const auto pmf = binomial_pmf_table(n, p);
    double c = 0.0;
    for (int i = 0; i <= k; ++i) c += pmf[static_cast<std::size_t>(i)];
    return std::min(c, 1.0);
}

// P(X >= k); one-sided upper tail.
inline double binomial_upper_tail(int k, int n, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    const auto pmf = binomial_pmf_table(n, p);
    double c = 0.0;
    for (int i = k; i <= n; ++i) c += pmf[static_cast<std::size_t>(i)];
    return std::min(c, 1.0);
}

// One-sided sign test: p-value of seeing >= k successes out of n fair flips.
inline double sign_test_pvalue(int k, int n) { return binomial_upper_tail(k, n, 0.5); }

// Central interval of counts for X ~ Binomial(n, p): the narrowest [lo, hi]
// with P(X < lo) <= (1-conf)/2 and P(X > hi) <= (1-conf)/2.
inline std::pair<int, int> binomial_count_interval(int n, double p, double conf) {
    if (conf <= 0.0 || conf >= 1.0) throw argument_error("binomial_count_interval: conf in (0,1)");
    const double tail = (1.0 - conf) / 2.0;
    const auto pmf = binomial_pmf_table(n, p);
    int lo = 0;
    double acc = 0.0;
    while (lo < n && acc + pmf[static_cast<std::size_t>(lo)] <= tail) acc += pmf[static_cast<std::size_t>(lo++)];
    int hi = n;
    acc = 0.0;
    while (hi > 0 && acc + pmf[static_cast<std::size_t>(hi)] <= tail) acc += pmf[static_cast<std::size_t>(hi--)];
    return {lo, hi};
}

// Clopper-Pearson interval for a binomial proportion, by bisection on the
// exact tail probabilities.
inline std::pair<double, double> clopper_pearson(int k, int n, double conf) {
    if (n <= 0 || k < 0 || k > n) throw argument_error("clopper_pearson: invalid k or n");
    if (conf <= 0.0 || conf >= 1.0) throw argument_error("clopper_pearson: conf in (0,1)");
    const double tail = (1.0 - conf) / 2.0;

    auto bisect = [](double lo, double hi, auto&& f) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid)) hi = mid; else lo = mid;
        }
        return 0.5 * (lo + hi);
    };

    double lower = 0.0;
    if (k > 0) {
        // smallest p with P(X >= k; p) >= tail
        lower = bisect(0.0, 1.0, [&](double p) { return binomial_upper_tail(k, n, p) >= tail; });
    }
    double upper = 1.0;
    if (k < n) {
        // largest p with P(X <= k; p) >= tail
        upper = bisect(0.0, 1.0, [&](double p) { return binomial_cdf(k, n, p) < tail; });
    }
    return {lower, upper};
}

} // namespace augbagg
