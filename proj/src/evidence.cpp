#include "qsafe/evidence.hpp"

#include <algorithm>
#include <stdexcept>

#include "qsafe/error.hpp"

namespace qsafe {

std::string_view to_string(Provenance provenance) noexcept {
    return provenance == Provenance::Expert ? "expert" : "data";
}

std::string_view to_string(DetectionKind kind) noexcept {
    return kind == DetectionKind::Srf ? "srf" : "oos";
}

std::string_view to_string(ConfidenceMode mode) noexcept {
    return mode == ConfidenceMode::PaperFaithful ? "paper" : "bonferroni";
}

std::optional<ConfidenceMode> confidence_mode_from_string(std::string_view text) noexcept {
    if (text == "paper") return ConfidenceMode::PaperFaithful;
    if (text == "bonferroni") return ConfidenceMode::Bonferroni;
    return std::nullopt;
}

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::TargetRequired: return "E_TARGET_REQUIRED";
    case ErrorCode::TargetRange: return "E_TARGET_RANGE";
    case ErrorCode::TestRequired: return "E_TEST_REQUIRED";
    case ErrorCode::ZeroSamples: return "E_ZERO_SAMPLES";
    case ErrorCode::CountOrder: return "E_COUNT_ORDER";
    case ErrorCode::ScopeRequired: return "E_SCOPE_REQUIRED";
    case ErrorCode::ClosedScopeAssumption: return "E_CLOSED_SCOPE_ASSUMPTION";
    case ErrorCode::ProbabilityOne: return "E_PROBABILITY_ONE";
    case ErrorCode::ProfileEmpty: return "E_PROFILE_EMPTY";
    case ErrorCode::ProfileOrder: return "E_PROFILE_ORDER";
    case ErrorCode::ProfileMonotone: return "E_PROFILE_MONOTONE";
    case ErrorCode::MissionTimeRequired: return "E_MISSION_TIME_REQUIRED";
    case ErrorCode::MissionTimeUnused: return "E_MISSION_TIME_UNUSED";
    case ErrorCode::TimeBeforeProfile: return "E_TIME_BEFORE_PROFILE";
    case ErrorCode::OosCampaign: return "E_OOS_CAMPAIGN";
    case ErrorCode::DetectionKind: return "E_DETECTION_KIND";
    }
    return "E_UNKNOWN";
}

bool CaseBundle::assumes(std::string_view token) const {
    return std::find(assumptions.begin(), assumptions.end(), token) != assumptions.end();
}

namespace {

void check_detection(const DetectionEvidence& det, DetectionKind slot, SiteKind kind_site, SiteKind value_site,
                     std::vector<SemanticError>& errors) {
    const std::string name(to_string(slot));
    if (det.kind != slot) {
        errors.push_back({ErrorCode::DetectionKind, "detection evidence filed under '" + name + "' has kind '" +
                                                        std::string(to_string(det.kind)) + "'",
                          {{kind_site}}});
    }
    if (const auto* campaign = std::get_if<DetectionCampaign>(&det.form)) {
        if (slot == DetectionKind::Oos) {
            errors.push_back({ErrorCode::OosCampaign,
                              "out-of-scope detection admits only an expert point estimate, not a campaign",
                              {{value_site}}});
        }
        if (campaign->total == 0) {
            errors.push_back({ErrorCode::ZeroSamples, "detection " + name + ": campaign total must be >= 1",
                              {{value_site}}});
        }
        if (campaign->detected > campaign->total) {
            errors.push_back({ErrorCode::CountOrder,
                              "detection " + name + ": detected (" + std::to_string(campaign->detected) +
                                  ") exceeds total (" + std::to_string(campaign->total) + ")",
                              {{value_site}}});
        }
    }
}

} // namespace

std::vector<SemanticError> validate_bundle(const CaseBundle& bundle) {
    std::vector<SemanticError> errors;

    if (!bundle.target) {
        errors.push_back({ErrorCode::TargetRequired, "a target block is required", {{SiteKind::Case}}});
    } else {
        const double p = bundle.target->p_target.value();
        if (!(p > 0.0 && p < 1.0)) {
            errors.push_back({ErrorCode::TargetRange, "p_target must lie strictly between 0 and 1",
                              {{SiteKind::TargetPTarget}}});
        }
    }

    if (!bundle.test) {
        errors.push_back({ErrorCode::TestRequired, "a testing block is required", {{SiteKind::Case}}});
    } else {
        if (bundle.test->samples == 0) {
            errors.push_back({ErrorCode::ZeroSamples, "testing: samples must be >= 1", {{SiteKind::TestingSamples}}});
        }
        if (bundle.test->failures > bundle.test->samples) {
            errors.push_back({ErrorCode::CountOrder,
                              "testing: failures (" + std::to_string(bundle.test->failures) +
                                  ") exceed samples (" + std::to_string(bundle.test->samples) + ")",
                              {{SiteKind::TestingSamples}, {SiteKind::TestingFailures}}});
        }
    }

    if (bundle.scope) {
        const auto& scope = *bundle.scope;
        if (const auto* point = std::get_if<Probability>(&scope.form)) {
            if (point->value() >= 1.0) {
                errors.push_back({ErrorCode::ProbabilityOne, "scope: p_oos must be < 1", {{SiteKind::ScopePoint}}});
            }
            if (bundle.mission_time) {
                errors.push_back({ErrorCode::MissionTimeUnused,
                                  "mission_time is only meaningful with a scope profile",
                                  {{SiteKind::MissionTime}}});
            }
        } else {
            const auto& profile = std::get<ScopeProfile>(scope.form);
            if (profile.empty()) {
                errors.push_back({ErrorCode::ProfileEmpty, "scope: profile must not be empty", {{SiteKind::Scope}}});
            }
            for (std::size_t i = 0; i < profile.size(); ++i) {
                if (profile[i].p.value() >= 1.0) {
                    errors.push_back({ErrorCode::ProbabilityOne, "scope: profile probabilities must be < 1",
                                      {{SiteKind::ScopeProfilePoint, i}}});
                }
                if (i == 0) continue;
                if (!(profile[i].hours > profile[i - 1].hours)) {
                    errors.push_back({ErrorCode::ProfileOrder, "scope: profile times must be strictly increasing",
                                      {{SiteKind::ScopeProfilePoint, i}}});
                }
                if (profile[i].p < profile[i - 1].p) {
                    errors.push_back({ErrorCode::ProfileMonotone,
                                      "scope: profile probabilities must be non-decreasing",
                                      {{SiteKind::ScopeProfilePoint, i}}});
                }
            }
            if (!bundle.mission_time) {
                errors.push_back({ErrorCode::MissionTimeRequired,
                                  "mission_time is required when the scope is given as a profile",
                                  {{SiteKind::Case}}});
            } else if (!profile.empty() && *bundle.mission_time < profile.front().hours) {
                errors.push_back({ErrorCode::TimeBeforeProfile, "mission_time lies before the first profile point",
                                  {{SiteKind::MissionTime}, {SiteKind::ScopeProfilePoint, 0}}});
            }
        }
    } else {
        if (bundle.mission_time) {
            errors.push_back({ErrorCode::MissionTimeUnused, "mission_time is only meaningful with a scope profile",
                              {{SiteKind::MissionTime}}});
        }
        if (!bundle.assumes(kClosedScopeAssumption)) {
            errors.push_back({ErrorCode::ClosedScopeAssumption,
                              "without scope evidence the case must assume \"" + std::string(kClosedScopeAssumption) +
                                  "\"",
                              {{SiteKind::Case}}});
        }
    }

    if (bundle.detect_srf) {
        check_detection(*bundle.detect_srf, DetectionKind::Srf, SiteKind::DetectSrfKind, SiteKind::DetectSrfValue,
                        errors);
    }
    if (bundle.detect_oos) {
        if (!bundle.scope) {
            errors.push_back({ErrorCode::ScopeRequired, "out-of-scope detection requires scope evidence",
                              {{SiteKind::Case}}});
        }
        check_detection(*bundle.detect_oos, DetectionKind::Oos, SiteKind::DetectOosKind, SiteKind::DetectOosValue,
                        errors);
    }

    if (bundle.labels) {
        if (const auto* rate = std::get_if<Probability>(&bundle.labels->form)) {
            if (rate->value() >= 1.0) {
                errors.push_back({ErrorCode::ProbabilityOne, "labels: rate must be < 1", {{SiteKind::LabelsValue}}});
            }
        } else {
            const auto& audit = std::get<LabelAudit>(bundle.labels->form);
            if (audit.audited == 0) {
                errors.push_back({ErrorCode::ZeroSamples, "labels: audited must be >= 1", {{SiteKind::LabelsValue}}});
            }
            if (audit.disagreements > audit.audited) {
                errors.push_back({ErrorCode::CountOrder, "labels: disagreements exceed audited",
                                  {{SiteKind::LabelsValue}}});
            }
        }
    }
    return errors;
}

Probability scope_at_time(const ScopeEvidence& scope, double hours) {
    if (const auto* point = std::get_if<Probability>(&scope.form)) return *point;
    const auto& profile = std::get<ScopeProfile>(scope.form);
    if (profile.empty() || hours < profile.front().hours) {
        throw QsafeError("E_TIME_BEFORE_PROFILE", "time " + std::to_string(hours) + " h precedes the scope profile");
    }
    const auto after = std::upper_bound(profile.begin(), profile.end(), hours,
                                        [](double t, const ProfilePoint& pt) { return t < pt.hours; });
    return std::prev(after)->p;
}

namespace {

int count_statistical(const CaseBundle& bundle) {
    int m = bundle.test ? 1 : 0;
    if (bundle.detect_srf && bundle.detect_srf->is_campaign()) ++m;
    if (bundle.labels && bundle.labels->is_audit()) ++m;
    return std::max(m, 1);
}

} // namespace

double effective_confidence(const CaseBundle& bundle, ConfidenceMode mode) {
    if (!bundle.target) throw std::invalid_argument("effective_confidence: bundle has no target");
    const double cl = bundle.target->cl.value();
    if (mode == ConfidenceMode::PaperFaithful) return cl;
    const int m = count_statistical(bundle);
    if (m == 1) return cl;
    return 1.0 - (1.0 - cl) / m;
}

ResolvedEstimates resolve_estimates(const CaseBundle& bundle, ConfidenceMode mode, IntervalMethod method) {
    if (!bundle.target || !bundle.test) {
        throw std::invalid_argument("resolve_estimates: bundle must be validated first");
    }
    const ConfidenceLevel cl(effective_confidence(bundle, mode));

    ResolvedEstimates r;
    r.method = method;
    r.statistical_quantities = count_statistical(bundle);
    r.cl_effective.test = cl.value();
    r.u_test = Probability(upper_bound(method, bundle.test->failures, bundle.test->samples, cl));

    if (bundle.detect_srf) {
        if (const auto* campaign = std::get_if<DetectionCampaign>(&bundle.detect_srf->form)) {
            r.l_detect_srf = Probability(lower_bound(method, campaign->detected, campaign->total, cl));
            r.cl_effective.detect_srf = cl.value();
        } else {
            r.l_detect_srf = std::get<Probability>(bundle.detect_srf->form);
        }
    }

    if (bundle.scope) {
        const double at = bundle.mission_time.value_or(0.0);
        r.p_oos = scope_at_time(*bundle.scope, at);
    }

    if (bundle.detect_oos) {
        if (const auto* point = std::get_if<Probability>(&bundle.detect_oos->form)) r.p_detect_oos = *point;
    }

    if (bundle.labels) {
        if (const auto* rate = std::get_if<Probability>(&bundle.labels->form)) {
            r.p_lf = *rate;
            r.labels_unverified = true;
        } else {
            const auto& audit = std::get<LabelAudit>(bundle.labels->form);
            r.p_lf = Probability(upper_bound(method, audit.disagreements, audit.audited, cl));
            r.cl_effective.labels = cl.value();
        }
    }
    return r;
}

} // namespace qsafe
