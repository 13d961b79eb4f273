#pragma once

// Declared evidence for a quantitative safety case and its resolution into
// confidence-bounded estimates.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qsafe/binomial.hpp"

namespace qsafe {

/// Assumption token that stands in for scope evidence when the component is
/// organisationally restricted to its target application scope.
inline constexpr std::string_view kClosedScopeAssumption = "no-out-of-scope-operation";
inline constexpr std::string_view kDatasetUnseenAssumption = "dataset-unseen";
inline constexpr std::string_view kDatasetRepresentativeAssumption = "dataset-representative";

enum class Provenance { Expert, Data };

[[nodiscard]] std::string_view to_string(Provenance provenance) noexcept;

struct SafetyTarget {
    Probability p_target;
    ConfidenceLevel cl;

    friend bool operator==(const SafetyTarget&, const SafetyTarget&) = default;
};

struct TestEvidence {
    Count samples = 0;
    Count failures = 0;

    friend bool operator==(const TestEvidence&, const TestEvidence&) = default;
};

/// Result of an audit where `audited` labels were independently re-checked.
struct LabelAudit {
    Count disagreements = 0;
    Count audited = 0;

    friend bool operator==(const LabelAudit&, const LabelAudit&) = default;
};

struct LabelQuality {
    std::variant<Probability, LabelAudit> form;

    [[nodiscard]] bool is_audit() const noexcept { return std::holds_alternative<LabelAudit>(form); }
    friend bool operator==(const LabelQuality&, const LabelQuality&) = default;
};

struct ProfilePoint {
    double hours = 0.0;
    Probability p;

    friend bool operator==(const ProfilePoint&, const ProfilePoint&) = default;
};

using ScopeProfile = std::vector<ProfilePoint>;

struct ScopeEvidence {
    std::variant<Probability, ScopeProfile> form;
    Provenance provenance = Provenance::Expert;
    std::string justification;

    [[nodiscard]] bool is_profile() const noexcept { return std::holds_alternative<ScopeProfile>(form); }
    friend bool operator==(const ScopeEvidence&, const ScopeEvidence&) = default;
};

enum class DetectionKind { Srf, Oos };

[[nodiscard]] std::string_view to_string(DetectionKind kind) noexcept;

/// `detected` of `total` flagged during an evaluation campaign.
struct DetectionCampaign {
    Count detected = 0;
    Count total = 0;

    friend bool operator==(const DetectionCampaign&, const DetectionCampaign&) = default;
};

struct DetectionEvidence {
    DetectionKind kind = DetectionKind::Srf;
    std::variant<DetectionCampaign, Probability> form;
    Provenance provenance = Provenance::Expert;
    std::string justification;

    [[nodiscard]] bool is_campaign() const noexcept { return std::holds_alternative<DetectionCampaign>(form); }
    friend bool operator==(const DetectionEvidence&, const DetectionEvidence&) = default;
};

/// Everything declared for one case. `target` and `test` are optional only so
/// that an incomplete declaration can be represented and reported by
/// validate_bundle; every other operation requires them.
struct CaseBundle {
    std::string id;
    std::optional<SafetyTarget> target;
    std::optional<TestEvidence> test;
    std::optional<ScopeEvidence> scope;
    std::optional<DetectionEvidence> detect_srf;
    std::optional<DetectionEvidence> detect_oos;
    std::optional<LabelQuality> labels;
    std::vector<std::string> assumptions;
    std::optional<double> mission_time;

    [[nodiscard]] bool assumes(std::string_view token) const;
    friend bool operator==(const CaseBundle&, const CaseBundle&) = default;
};

enum class ConfidenceMode { PaperFaithful, Bonferroni };

[[nodiscard]] std::string_view to_string(ConfidenceMode mode) noexcept;
[[nodiscard]] std::optional<ConfidenceMode> confidence_mode_from_string(std::string_view text) noexcept;

enum class ErrorCode {
    TargetRequired,
    TargetRange,
    TestRequired,
    ZeroSamples,
    CountOrder,
    ScopeRequired,
    ClosedScopeAssumption,
    ProbabilityOne,
    ProfileEmpty,
    ProfileOrder,
    ProfileMonotone,
    MissionTimeRequired,
    MissionTimeUnused,
    TimeBeforeProfile,
    OosCampaign,
    DetectionKind,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// The declaration a semantic error refers to. The DSL parser maps sites to
/// source positions; `index` selects a profile point or assumption.
enum class SiteKind {
    Case,
    Target,
    TargetPTarget,
    TargetConfidence,
    MissionTime,
    Scope,
    ScopePoint,
    ScopeProfilePoint,
    Testing,
    TestingSamples,
    TestingFailures,
    DetectSrf,
    DetectSrfKind,
    DetectSrfValue,
    DetectOos,
    DetectOosKind,
    DetectOosValue,
    Labels,
    LabelsValue,
};

struct Site {
    SiteKind kind = SiteKind::Case;
    std::size_t index = 0;

    friend bool operator==(const Site&, const Site&) = default;
};

struct SemanticError {
    ErrorCode code;
    std::string message;
    /// Declarations involved. For a missing declaration this names the
    /// enclosing block, which the parser reports at its closing brace.
    std::vector<Site> sites;
};

/// Every violated invariant, in a stable order. Empty means valid.
[[nodiscard]] std::vector<SemanticError> validate_bundle(const CaseBundle& bundle);

/// p_OOS at `hours`: the value of the last profile point at or before it.
/// Point form ignores the time. Throws QsafeError(E_TIME_BEFORE_PROFILE).
[[nodiscard]] Probability scope_at_time(const ScopeEvidence& scope, double hours);

struct EffectiveConfidence {
    double test = 0.0;
    std::optional<double> detect_srf;
    std::optional<double> labels;

    friend bool operator==(const EffectiveConfidence&, const EffectiveConfidence&) = default;
};

struct ResolvedEstimates {
    Probability u_test;
    Probability l_detect_srf;
    Probability p_oos;
    Probability p_detect_oos;
    Probability p_lf;
    EffectiveConfidence cl_effective;
    /// Number of statistical quantities sharing the confidence budget.
    int statistical_quantities = 1;
    IntervalMethod method = IntervalMethod::ClopperPearson;
    /// Declared label-fault rate taken at face value.
    bool labels_unverified = false;

    friend bool operator==(const ResolvedEstimates&, const ResolvedEstimates&) = default;
};

/// Confidence level used for each statistical quantity of `bundle`.
[[nodiscard]] double effective_confidence(const CaseBundle& bundle, ConfidenceMode mode);

[[nodiscard]] ResolvedEstimates resolve_estimates(const CaseBundle& bundle, ConfidenceMode mode,
                                                  IntervalMethod method = IntervalMethod::ClopperPearson);

} // namespace qsafe
