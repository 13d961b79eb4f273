#include "qsafe/binomial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsafe {

Probability::Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::domain_error("probability out of [0, 1]: " + std::to_string(value));
    }
}

ConfidenceLevel::ConfidenceLevel(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        throw std::domain_error("confidence level out of (0, 1): " + std::to_string(value));
    }
}

std::string_view to_string(IntervalMethod method) noexcept {
    switch (method) {
    case IntervalMethod::ClopperPearson: return "clopper-pearson";
    case IntervalMethod::Wilson: return "wilson";
    case IntervalMethod::Normal: return "normal";
    }
    return "unknown";
}

std::optional<IntervalMethod> interval_method_from_string(std::string_view text) noexcept {
    if (text == "cp" || text == "clopper-pearson") return IntervalMethod::ClopperPearson;
    if (text == "wilson") return IntervalMethod::Wilson;
    if (text == "normal" || text == "wald") return IntervalMethod::Normal;
    return std::nullopt;
}

namespace {

constexpr int kMaxBisectionIterations = 200;
// Bisection stops once the bracket is below this fraction of the bound,
// which is well inside the required 1e-12 absolute tolerance.
constexpr double kRelativeRootTolerance = 1e-14;
// Summation stops once a term drops below this fraction of the running sum.
constexpr double kNegligibleTerm = 1e-20;

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirling_error(double n) {
    static const std::array<double, 16> small = [] {
        std::array<double, 16> table{};
        const long double half_log_two_pi = 0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
        for (int i = 1; i < 16; ++i) {
            const long double x = i;
            table[i] = static_cast<double>(std::lgamma(x + 1.0L) - (x + 0.5L) * std::log(x) + x - half_log_two_pi);
        }
        return table;
    }();
    constexpr double s0 = 1.0 / 12.0;
    constexpr double s1 = 1.0 / 360.0;
    constexpr double s2 = 1.0 / 1260.0;
    constexpr double s3 = 1.0 / 1680.0;
    constexpr double s4 = 1.0 / 1188.0;
    if (n < 16.0) return small[static_cast<std::size_t>(n)];
    const double nn = n * n;
    if (n > 500.0) return (s0 - s1 / nn) / n;
    if (n > 80.0) return (s0 - (s1 - s2 / nn) / nn) / n;
    if (n > 35.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x / np) + np - x, computed without cancellation near x = np.
double deviance(double x, double np) {
    if (std::abs(x - np) < 0.1 * (x + np)) {
        double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2.0 * x * v;
        v *= v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v;
            const double next = s + ej / (2 * j + 1);
            if (next == s) return next;
            s = next;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

void require_order(Count k, Count n) {
    if (n == 0) throw std::invalid_argument("binomial: n must be >= 1");
    if (k > n) {
        throw std::invalid_argument("binomial: k (" + std::to_string(k) + ") exceeds n (" + std::to_string(n) + ")");
    }
}

// P(X >= k) for X ~ Binomial(n, p), via the reflected lower tail.
double upper_tail(Count k, Count n, double p) {
    if (k == 0) return 1.0;
    return binom_cdf(n - k, n, Probability(1.0 - p));
}

} // namespace

double binom_log_pmf(Count k, Count n, double p) {
    const double q = 1.0 - p;
    const double x = static_cast<double>(k);
    const double size = static_cast<double>(n);
    if (k > n) return -std::numeric_limits<double>::infinity();
    if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (q == 0.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    if (k == 0) {
        if (n == 0) return 0.0;
        return p < 0.1 ? -deviance(size, size * q) - size * p : size * std::log1p(-p);
    }
    if (k == n) {
        return q < 0.1 ? -deviance(size, size * p) - size * q : size * std::log(p);
    }
    const double lc = stirling_error(size) - stirling_error(x) - stirling_error(size - x) - deviance(x, size * p) -
                      deviance(size - x, size * q);
    const double lf = std::log(2.0 * std::numbers::pi) + std::log(x) + std::log1p(-x / size);
    return lc - 0.5 * lf;
}

double binom_cdf(Count k, Count n, Probability prob) {
    require_order(k, n);
    const double p = prob.value();
    if (k == n || p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;

    // Anchor at the largest term in [0, k] and sum the rest relative to it.
    const double q = 1.0 - p;
    const auto mode = static_cast<Count>(std::min(static_cast<double>(n), std::floor((n + 1) * p)));
    const Count anchor = std::min(k, mode);
    const double log_anchor = binom_log_pmf(anchor, n, p);

    const double down_ratio = q / p;
    double sum = 1.0;
    double term = 1.0;
    for (Count i = anchor; i > 0; --i) {
        term *= static_cast<double>(i) / static_cast<double>(n - i + 1) * down_ratio;
        sum += term;
        if (term < kNegligibleTerm * sum) break;
    }
    const double up_ratio = p / q;
    term = 1.0;
    for (Count i = anchor; i < k; ++i) {
        term *= static_cast<double>(n - i) / static_cast<double>(i + 1) * up_ratio;
        sum += term;
        if (term < kNegligibleTerm * sum) break;
    }
    return std::min(1.0, std::exp(log_anchor + std::log(sum)));
}

double cp_upper(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    if (k == n) return 1.0;
    const double alpha = cl.alpha();
    // Invariant: cdf(lo) > alpha >= cdf(hi).
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < kMaxBisectionIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (binom_cdf(k, n, Probability(mid)) <= alpha) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= kRelativeRootTolerance * hi) break;
    }
    return hi;
}

double cp_lower(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    if (k == 0) return 0.0;
    const double alpha = cl.alpha();
    // Invariant: tail(lo) <= alpha < tail(hi).
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < kMaxBisectionIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (upper_tail(k, n, mid) <= alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= kRelativeRootTolerance * std::max(lo, std::numeric_limits<double>::min())) break;
    }
    return lo;
}

double normal_quantile(double probability) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw std::domain_error("normal_quantile: probability must be in (0, 1)");
    }
    double lo = -40.0;
    double hi = 40.0;
    for (int it = 0; it < kMaxBisectionIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double cdf = 0.5 * std::erfc(-mid / std::numbers::sqrt2);
        if (cdf < probability) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double wilson_upper(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    const double z = normal_quantile(cl.value());
    const double size = static_cast<double>(n);
    const double phat = static_cast<double>(k) / size;
    const double z2 = z * z;
    const double center = phat + z2 / (2.0 * size);
    const double spread = z * std::sqrt(phat * (1.0 - phat) / size + z2 / (4.0 * size * size));
    return std::clamp((center + spread) / (1.0 + z2 / size), 0.0, 1.0);
}

double wilson_lower(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    return 1.0 - wilson_upper(n - k, n, cl);
}

double normal_upper(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    const double z = normal_quantile(cl.value());
    const double phat = static_cast<double>(k) / static_cast<double>(n);
    return std::clamp(phat + z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n)), 0.0, 1.0);
}

double normal_lower(Count k, Count n, ConfidenceLevel cl) {
    require_order(k, n);
    return 1.0 - normal_upper(n - k, n, cl);
}

double upper_bound(IntervalMethod method, Count k, Count n, ConfidenceLevel cl) {
    switch (method) {
    case IntervalMethod::Wilson: return wilson_upper(k, n, cl);
    case IntervalMethod::Normal: return normal_upper(k, n, cl);
    case IntervalMethod::ClopperPearson: break;
    }
    return cp_upper(k, n, cl);
}

double lower_bound(IntervalMethod method, Count k, Count n, ConfidenceLevel cl) {
    switch (method) {
    case IntervalMethod::Wilson: return wilson_lower(k, n, cl);
    case IntervalMethod::Normal: return normal_lower(k, n, cl);
    case IntervalMethod::ClopperPearson: break;
    }
    return cp_lower(k, n, cl);
}

namespace {

// upper_bound(method, k, n, cl) <= threshold. For the exact interval this is
// binom_cdf(k, n, threshold) <= alpha, which needs no root finding.
bool within_threshold(IntervalMethod method, Count k, Count n, ConfidenceLevel cl, double threshold) {
    if (method != IntervalMethod::ClopperPearson) return upper_bound(method, k, n, cl) <= threshold;
    if (k == n) return threshold >= 1.0;
    return binom_cdf(k, n, Probability(threshold)) <= cl.alpha();
}

} // namespace

std::optional<Count> max_acceptable_failures(Count n, ConfidenceLevel cl, Probability threshold,
                                             IntervalMethod method) {
    if (n == 0) throw std::invalid_argument("max_acceptable_failures: n must be >= 1");
    if (threshold.value() <= 0.0) throw std::invalid_argument("max_acceptable_failures: threshold must be > 0");
    const auto feasible = [&](Count k) { return within_threshold(method, k, n, cl, threshold.value()); };
    if (!feasible(0)) return std::nullopt;

    // Gallop to bracket the boundary, then bisect. lo is always feasible,
    // hi is infeasible (or n + 1).
    Count lo = 0;
    Count hi = n + 1;
    for (Count step = 1;; step *= 2) {
        const Count probe = lo + step;
        if (probe > n) break;
        if (!feasible(probe)) {
            hi = probe;
            break;
        }
        lo = probe;
    }
    while (hi - lo > 1) {
        const Count mid = lo + (hi - lo) / 2;
        if (feasible(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

Count expected_count(Probability expected_rate, Count n) {
    return static_cast<Count>(std::llround(expected_rate.value() * static_cast<double>(n)));
}

std::optional<Count> min_sample_size(Probability expected_rate, ConfidenceLevel cl, Probability threshold, Count cap,
                                     IntervalMethod method) {
    if (expected_rate.value() >= threshold.value()) return std::nullopt;
    if (cap == 0) return std::nullopt;
    const auto feasible = [&](Count n) {
        const Count k = std::min(n, expected_count(expected_rate, n));
        return within_threshold(method, k, n, cl, threshold.value());
    };
    Count previous = 0;
    Count n = 1;
    while (!feasible(n)) {
        if (n >= cap) return std::nullopt;
        previous = n;
        n = (n > cap / 2) ? cap : n * 2;
    }
    if (previous == 0) return n;
    Count lo = previous;
    Count hi = n;
    while (hi - lo > 1) {
        const Count mid = lo + (hi - lo) / 2;
        if (feasible(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace qsafe
