#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "qsafe/evidence.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(QSAFE_SOURCE_DIR) + "/tests/fixtures/" + name; }

inline std::string read(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

/// The worked example: every evidence role present.
inline qsafe::CaseBundle stop_sign(qsafe::Count failures = 130) {
    using namespace qsafe;
    CaseBundle b;
    b.id = "stop-sign";
    b.target = SafetyTarget{Probability(0.002), ConfidenceLevel(0.9999)};
    b.test = TestEvidence{100000, failures};
    b.scope = ScopeEvidence{Probability(0.0005), Provenance::Expert, "share of operation outside the scope"};
    b.detect_srf = DetectionEvidence{DetectionKind::Srf, DetectionCampaign{85, 200}, Provenance::Data, ""};
    b.detect_oos = DetectionEvidence{DetectionKind::Oos, Probability(0.495), Provenance::Expert, "scope monitor"};
    b.labels = LabelQuality{Probability(0.001)};
    b.assumptions = {std::string(kDatasetUnseenAssumption), std::string(kDatasetRepresentativeAssumption)};
    return b;
}

/// Target, testing and the closed-scope assumption only.
inline qsafe::CaseBundle closed_scope(qsafe::Count samples, qsafe::Count failures, double cl = 0.9999,
                                      double p_target = 0.002) {
    using namespace qsafe;
    CaseBundle b;
    b.id = "closed";
    b.target = SafetyTarget{Probability(p_target), ConfidenceLevel(cl)};
    b.test = TestEvidence{samples, failures};
    b.assumptions = {std::string(kClosedScopeAssumption)};
    return b;
}

} // namespace fixtures
