#pragma once

// Brute-force binomial reference, independent of the library kernel: every
// term is evaluated on its own in long double from lgamma, with no recurrence,
// saddle-point expansion or anchoring.

#include <cmath>
#include <cstdint>

namespace oracle {

inline long double log_pmf(std::uint64_t i, std::uint64_t n, long double p) {
    const long double ni = static_cast<long double>(n);
    const long double ii = static_cast<long double>(i);
    return std::lgamma(ni + 1) - std::lgamma(ii + 1) - std::lgamma(ni - ii + 1) + ii * std::log(p) +
           (ni - ii) * std::log1p(-p);
}

/// P(X <= k), X ~ Bin(n, p), by summing all k + 1 terms.
inline long double cdf(std::uint64_t k, std::uint64_t n, long double p) {
    if (k >= n) return 1.0L;
    if (p <= 0.0L) return 1.0L;
    if (p >= 1.0L) return 0.0L;
    long double sum = 0.0L;
    for (std::uint64_t i = 0; i <= k; ++i) sum += std::exp(log_pmf(i, n, p));
    return sum;
}

/// Smallest p with cdf(k, n, p) <= 1 - cl, by plain bisection.
inline long double cp_upper(std::uint64_t k, std::uint64_t n, long double cl) {
    if (k >= n) return 1.0L;
    long double lo = 0.0L;
    long double hi = 1.0L;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (cdf(k, n, mid) > 1.0L - cl) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

} // namespace oracle
