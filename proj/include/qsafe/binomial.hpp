#pragma once

// Exact one-sided binomial proportion bounds and their inversions.
//
// Everything here is a pure function. The Clopper-Pearson bounds are found
// by bisection over binom_cdf; no Beta-quantile identity is used, so the
// CDF kernel is the single numerical dependency and can be checked against
// brute-force enumeration.

#include <cstdint>
#include <optional>
#include <string_view>

namespace qsafe {

using Count = std::uint64_t;

/// A probability in [0, 1]. Construction rejects NaN and out-of-range values.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value);

    [[nodiscard]] constexpr double value() const noexcept { return value_; }

    friend constexpr bool operator==(Probability, Probability) = default;
    friend constexpr auto operator<=>(Probability, Probability) = default;

private:
    double value_ = 0.0;
};

/// A confidence level strictly inside (0, 1).
class ConfidenceLevel {
public:
    explicit ConfidenceLevel(double value);

    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    /// 1 - cl, the tail mass the bound may leave uncovered.
    [[nodiscard]] constexpr double alpha() const noexcept { return 1.0 - value_; }

    friend constexpr bool operator==(ConfidenceLevel, ConfidenceLevel) = default;
    friend constexpr auto operator<=>(ConfidenceLevel, ConfidenceLevel) = default;

private:
    double value_;
};

/// How a proportion bound is computed. Only ClopperPearson has guaranteed
/// coverage; the other two are reported as non-conservative.
enum class IntervalMethod { ClopperPearson, Wilson, Normal };

[[nodiscard]] std::string_view to_string(IntervalMethod method) noexcept;
[[nodiscard]] std::optional<IntervalMethod> interval_method_from_string(std::string_view text) noexcept;
[[nodiscard]] constexpr bool is_conservative(IntervalMethod method) noexcept {
    return method == IntervalMethod::ClopperPearson;
}

/// Natural log of the Binomial(n, p) probability mass at k, accurate to a few
/// ulps (saddle-point expansion with Stirling error terms). Returns -inf for
/// impossible outcomes.
[[nodiscard]] double binom_log_pmf(Count k, Count n, double p);

/// P(X <= k) for X ~ Binomial(n, p) by direct summation of the pmf terms,
/// scaled against the largest term so nothing under- or overflows.
/// Throws std::invalid_argument when k > n or n == 0.
[[nodiscard]] double binom_cdf(Count k, Count n, Probability p);

/// Smallest p_u with binom_cdf(k, n, p_u) <= 1 - cl. Returns exactly 1 when k == n.
[[nodiscard]] double cp_upper(Count k, Count n, ConfidenceLevel cl);

/// Largest p_l with P(X >= k | n, p_l) <= 1 - cl. Returns exactly 0 when k == 0.
/// Computed by its own bisection on the upper tail, so the duality
/// cp_lower(k, n, cl) == 1 - cp_upper(n - k, n, cl) is a checkable property.
[[nodiscard]] double cp_lower(Count k, Count n, ConfidenceLevel cl);

[[nodiscard]] double wilson_upper(Count k, Count n, ConfidenceLevel cl);
[[nodiscard]] double wilson_lower(Count k, Count n, ConfidenceLevel cl);
[[nodiscard]] double normal_upper(Count k, Count n, ConfidenceLevel cl);
[[nodiscard]] double normal_lower(Count k, Count n, ConfidenceLevel cl);

[[nodiscard]] double upper_bound(IntervalMethod method, Count k, Count n, ConfidenceLevel cl);
[[nodiscard]] double lower_bound(IntervalMethod method, Count k, Count n, ConfidenceLevel cl);

/// Standard normal quantile, found by bisection on erfc.
[[nodiscard]] double normal_quantile(double probability);

/// Largest k with cp_upper(k, n, cl) <= threshold, or nullopt when even k = 0
/// exceeds it. Uses a doubling bracket and bisection on k.
[[nodiscard]] std::optional<Count> max_acceptable_failures(Count n, ConfidenceLevel cl, Probability threshold,
                                                           IntervalMethod method = IntervalMethod::ClopperPearson);

inline constexpr Count kDefaultSampleCap = 1'000'000'000;

/// Planning aid: smallest n (doubling, then bisection) such that
/// cp_upper(round(expected_rate * n), n, cl) <= threshold, where round() is
/// round-half-away-from-zero. The returned n satisfies the condition and
/// n - 1 does not. nullopt if expected_rate >= threshold or no n <= cap works.
[[nodiscard]] std::optional<Count> min_sample_size(Probability expected_rate, ConfidenceLevel cl,
                                                   Probability threshold, Count cap = kDefaultSampleCap,
                                                   IntervalMethod method = IntervalMethod::ClopperPearson);

/// round(expected_rate * n) as used by min_sample_size.
[[nodiscard]] Count expected_count(Probability expected_rate, Count n);

} // namespace qsafe
