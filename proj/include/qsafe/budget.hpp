#pragma once

// Composition of the evidence terms into an upper bound on the probability
// of an unflagged safety-related failure, and the inverse problem of
// deriving the test bound a case needs.
//
// One formula covers every case; terms a case does not use are zeroed:
//
//   p_safe_upper = (u_test + p_lf) * (1 - p_oos - l_detect_srf)
//                + p_oos * (1 - p_detect_oos)

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsafe/evidence.hpp"

namespace qsafe {

/// B: closed scope. C: scope estimate. D: plus failure detection.
/// E: plus out-of-scope detection.
enum class CaseBase { B, C, D, E };

struct CaseId {
    CaseBase base = CaseBase::B;
    /// F: label faults shift the test bound.
    bool label_adjusted = false;

    friend bool operator==(const CaseId&, const CaseId&) = default;
};

/// "B", "C+F", ...
[[nodiscard]] std::string to_string(CaseId id);
[[nodiscard]] std::optional<CaseId> case_id_from_string(std::string_view text);

[[nodiscard]] CaseId applicable_case(const CaseBundle& bundle);

enum class ViolationCode { Preposition, Denominator };

[[nodiscard]] std::string_view to_string(ViolationCode code) noexcept;

struct Violation {
    ViolationCode code;
    double p_oos = 0.0;
    double l_detect_srf = 0.0;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// For cases D and E: 1 - p_oos >= l_detect_srf, and 1 - p_oos - l_detect_srf > 0.
[[nodiscard]] std::vector<Violation> check_prepositions(const ResolvedEstimates& r, CaseId id);

enum class Verdict { Satisfied, NotSatisfied, Infeasible };

[[nodiscard]] std::string_view to_string(Verdict verdict) noexcept;
[[nodiscard]] std::optional<Verdict> verdict_from_string(std::string_view text) noexcept;

/// Additive decomposition of the bound:
///   raw = test_term + label_penalty - srf_detect_credit + scope_term - oos_detect_credit
struct BoundTerms {
    double test_term = 0.0;         // u_test * (1 - p_oos)
    double label_penalty = 0.0;     // p_lf * (1 - p_oos)
    double srf_detect_credit = 0.0; // (u_test + p_lf) * l_detect_srf
    double scope_term = 0.0;        // p_oos
    double oos_detect_credit = 0.0; // p_oos * p_detect_oos

    [[nodiscard]] double total() const noexcept {
        return test_term + label_penalty - srf_detect_credit + scope_term - oos_detect_credit;
    }
    friend bool operator==(const BoundTerms&, const BoundTerms&) = default;
};

struct BoundReport {
    CaseId case_id;
    double p_target = 0.0;
    /// Bound clipped to [0, 1].
    double p_safe_upper = 0.0;
    /// The formula value before clipping.
    double p_safe_raw = 0.0;
    BoundTerms terms;
    std::vector<Violation> preposition_status;
    Verdict verdict = Verdict::NotSatisfied;
    /// p_target - p_safe_upper.
    double margin = 0.0;

    friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Estimates with the terms unused by `id` set to zero.
[[nodiscard]] ResolvedEstimates effective_estimates(const ResolvedEstimates& r, CaseId id);

/// Unclipped bound for the case; used by round-trip checks.
[[nodiscard]] double raw_bound(const ResolvedEstimates& r, CaseId id);

/// Throws QsafeError("E_DENOMINATOR") when 1 - p_oos - l_detect_srf < 0.
[[nodiscard]] BoundReport evaluate_bound(const ResolvedEstimates& r, CaseId id, const SafetyTarget& target);

enum class InfeasibleReason {
    None,
    /// p_target <= p_oos * (1 - p_detect_oos): no test result can help.
    ScopeFloor,
    /// Budget remains before the label shift but p_lf consumes all of it.
    LabelFaults,
    /// required_u_test > 0 but no failure count at this sample size demonstrates it.
    SampleSize,
};

[[nodiscard]] std::string_view to_string(InfeasibleReason reason) noexcept;
[[nodiscard]] std::string_view describe(InfeasibleReason reason) noexcept;

struct DerivationResult {
    CaseId case_id;
    /// Bound the test campaign must demonstrate; nullopt when infeasible.
    std::optional<double> required_u_test;
    /// Value of the closed-form expression, feasible or not.
    double required_raw = 0.0;
    /// Required bound before subtracting p_lf.
    double before_label_shift = 0.0;
    std::optional<Count> max_failures;
    std::optional<Count> min_samples;
    std::optional<Count> samples;
    double cl_effective = 0.0;
    InfeasibleReason reason = InfeasibleReason::None;

    [[nodiscard]] bool feasible() const noexcept { return reason == InfeasibleReason::None; }
    friend bool operator==(const DerivationResult&, const DerivationResult&) = default;
};

struct DerivationRequest {
    /// Test sample size for which to report the failure budget.
    std::optional<Count> samples;
    /// Expected failure rate for sample-size planning.
    std::optional<Probability> expected_rate;
    Count sample_cap = kDefaultSampleCap;
};

/// required_u_test = (p_target - p_oos (1 - p_detect_oos)) / (1 - p_oos - l_detect_srf) - p_lf.
/// The u_test field of `r` is ignored. Throws QsafeError("E_DENOMINATOR")
/// unless the denominator is positive.
[[nodiscard]] DerivationResult derive_required_test_bound(const ResolvedEstimates& r, CaseId id,
                                                          const SafetyTarget& target,
                                                          const DerivationRequest& request = {});

enum class SweepParam { POos, PDetectSrf, PDetectOos, PLf, Samples, Failures, Cl };

[[nodiscard]] std::string_view to_string(SweepParam param) noexcept;
[[nodiscard]] std::optional<SweepParam> sweep_param_from_string(std::string_view text) noexcept;

struct SweepRow {
    double value = 0.0;
    /// nullopt when evaluation was refused (denominator violation).
    std::optional<double> p_safe_upper;
    std::optional<double> required_u_test;
    std::optional<Count> max_failures;
    Verdict verdict = Verdict::NotSatisfied;
    /// Violation or error code for infeasible rows.
    std::string code;
};

struct SweepSpec {
    SweepParam param = SweepParam::PLf;
    double from = 0.0;
    double to = 0.0;
    Count steps = 2;
};

/// Re-resolves and re-evaluates the bundle at `steps` equally spaced values.
/// Throws QsafeError("E_SWEEP_DOMAIN") for an invalid range.
[[nodiscard]] std::vector<SweepRow> sensitivity_sweep(const CaseBundle& bundle, ConfidenceMode mode,
                                                      const SweepSpec& spec,
                                                      IntervalMethod method = IntervalMethod::ClopperPearson);

/// The bundle with one parameter overridden, as used by the sweep.
[[nodiscard]] CaseBundle with_parameter(const CaseBundle& bundle, SweepParam param, double value);

} // namespace qsafe
