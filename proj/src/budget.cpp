#include "qsafe/budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsafe/error.hpp"

namespace qsafe {

std::string to_string(CaseId id) {
    static constexpr const char* names[] = {"B", "C", "D", "E"};
    std::string text = names[static_cast<int>(id.base)];
    if (id.label_adjusted) text += "+F";
    return text;
}

std::optional<CaseId> case_id_from_string(std::string_view text) {
    CaseId id;
    if (text.size() == 3 && text.substr(1) == "+F") {
        id.label_adjusted = true;
        text = text.substr(0, 1);
    }
    if (text == "B") id.base = CaseBase::B;
    else if (text == "C") id.base = CaseBase::C;
    else if (text == "D") id.base = CaseBase::D;
    else if (text == "E") id.base = CaseBase::E;
    else return std::nullopt;
    return id;
}

CaseId applicable_case(const CaseBundle& bundle) {
    CaseId id;
    if (bundle.detect_oos) id.base = CaseBase::E;
    else if (bundle.detect_srf) id.base = CaseBase::D;
    else if (bundle.scope) id.base = CaseBase::C;
    else id.base = CaseBase::B;
    id.label_adjusted = bundle.labels.has_value();
    return id;
}

std::string_view to_string(ViolationCode code) noexcept {
    return code == ViolationCode::Preposition ? "V_PREPOSITION" : "V_DENOMINATOR";
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::NotSatisfied: return "not_satisfied";
    case Verdict::Infeasible: return "infeasible";
    }
    return "unknown";
}

std::optional<Verdict> verdict_from_string(std::string_view text) noexcept {
    if (text == "satisfied") return Verdict::Satisfied;
    if (text == "not_satisfied") return Verdict::NotSatisfied;
    if (text == "infeasible") return Verdict::Infeasible;
    return std::nullopt;
}

std::string_view to_string(InfeasibleReason reason) noexcept {
    switch (reason) {
    case InfeasibleReason::None: return "none";
    case InfeasibleReason::ScopeFloor: return "scope_floor";
    case InfeasibleReason::LabelFaults: return "label_faults";
    case InfeasibleReason::SampleSize: return "sample_size";
    }
    return "unknown";
}

std::string_view describe(InfeasibleReason reason) noexcept {
    switch (reason) {
    case InfeasibleReason::None: return "feasible";
    case InfeasibleReason::ScopeFloor: return "target below scope floor";
    case InfeasibleReason::LabelFaults: return "label faults consume the remaining budget";
    case InfeasibleReason::SampleSize: return "test sample size too small to demonstrate the required bound";
    }
    return "unknown";
}

ResolvedEstimates effective_estimates(const ResolvedEstimates& r, CaseId id) {
    ResolvedEstimates e = r;
    if (id.base == CaseBase::B || id.base == CaseBase::C) e.l_detect_srf = Probability(0.0);
    if (id.base == CaseBase::B) e.p_oos = Probability(0.0);
    if (id.base != CaseBase::E) e.p_detect_oos = Probability(0.0);
    if (!id.label_adjusted) e.p_lf = Probability(0.0);
    return e;
}

namespace {

double denominator(const ResolvedEstimates& e) {
    return 1.0 - e.p_oos.value() - e.l_detect_srf.value();
}

std::string describe_values(double p_oos, double l_detect) {
    std::ostringstream out;
    out << "p_oos = " << p_oos << ", l_detect_srf = " << l_detect;
    return out.str();
}

} // namespace

std::vector<Violation> check_prepositions(const ResolvedEstimates& r, CaseId id) {
    std::vector<Violation> violations;
    if (id.base != CaseBase::D && id.base != CaseBase::E) return violations;
    const ResolvedEstimates e = effective_estimates(r, id);
    const double p_oos = e.p_oos.value();
    const double l_detect = e.l_detect_srf.value();
    if (!(1.0 - p_oos >= l_detect)) {
        violations.push_back({ViolationCode::Preposition, p_oos, l_detect,
                              "1 - p_oos < l_detect_srf (" + describe_values(p_oos, l_detect) + ")"});
    }
    if (!(denominator(e) > 0.0)) {
        violations.push_back({ViolationCode::Denominator, p_oos, l_detect,
                              "1 - p_oos - l_detect_srf is not positive (" + describe_values(p_oos, l_detect) + ")"});
    }
    return violations;
}

double raw_bound(const ResolvedEstimates& r, CaseId id) {
    const ResolvedEstimates e = effective_estimates(r, id);
    return (e.u_test.value() + e.p_lf.value()) * denominator(e) + e.p_oos.value() * (1.0 - e.p_detect_oos.value());
}

BoundReport evaluate_bound(const ResolvedEstimates& r, CaseId id, const SafetyTarget& target) {
    const ResolvedEstimates e = effective_estimates(r, id);
    if (denominator(e) < 0.0) {
        throw QsafeError("E_DENOMINATOR", "cannot evaluate bound: 1 - p_oos - l_detect_srf < 0 (" +
                                              describe_values(e.p_oos.value(), e.l_detect_srf.value()) + ")");
    }
    BoundReport report;
    report.case_id = id;
    report.p_target = target.p_target.value();

    const double u = e.u_test.value();
    const double lf = e.p_lf.value();
    const double oos = e.p_oos.value();
    report.terms.test_term = u * (1.0 - oos);
    report.terms.label_penalty = lf * (1.0 - oos);
    report.terms.srf_detect_credit = (u + lf) * e.l_detect_srf.value();
    report.terms.scope_term = oos;
    report.terms.oos_detect_credit = oos * e.p_detect_oos.value();

    report.p_safe_raw = raw_bound(r, id);
    report.p_safe_upper = std::clamp(report.p_safe_raw, 0.0, 1.0);
    report.preposition_status = check_prepositions(r, id);
    report.margin = report.p_target - report.p_safe_upper;
    if (!report.preposition_status.empty()) {
        report.verdict = Verdict::Infeasible;
    } else if (report.p_safe_upper <= report.p_target) {
        report.verdict = Verdict::Satisfied;
    } else {
        report.verdict = Verdict::NotSatisfied;
    }
    return report;
}

DerivationResult derive_required_test_bound(const ResolvedEstimates& r, CaseId id, const SafetyTarget& target,
                                            const DerivationRequest& request) {
    const ResolvedEstimates e = effective_estimates(r, id);
    const double denom = denominator(e);
    if (!(denom > 0.0)) {
        throw QsafeError("E_DENOMINATOR", "cannot derive test bound: 1 - p_oos - l_detect_srf <= 0 (" +
                                              describe_values(e.p_oos.value(), e.l_detect_srf.value()) + ")");
    }
    DerivationResult result;
    result.case_id = id;
    result.samples = request.samples;
    result.cl_effective = r.cl_effective.test;

    const double numerator = target.p_target.value() - e.p_oos.value() * (1.0 - e.p_detect_oos.value());
    result.before_label_shift = numerator / denom;
    result.required_raw = result.before_label_shift - e.p_lf.value();

    if (numerator <= 0.0) {
        result.reason = InfeasibleReason::ScopeFloor;
        return result;
    }
    if (result.required_raw <= 0.0) {
        result.reason = InfeasibleReason::LabelFaults;
        return result;
    }
    result.required_u_test = result.required_raw;

    const ConfidenceLevel cl(result.cl_effective);
    const Probability threshold(std::min(1.0, result.required_raw));
    if (request.samples) {
        result.max_failures = max_acceptable_failures(*request.samples, cl, threshold, r.method);
        if (!result.max_failures) result.reason = InfeasibleReason::SampleSize;
    }
    if (request.expected_rate) {
        result.min_samples = min_sample_size(*request.expected_rate, cl, threshold, request.sample_cap, r.method);
    }
    return result;
}

std::string_view to_string(SweepParam param) noexcept {
    switch (param) {
    case SweepParam::POos: return "p_oos";
    case SweepParam::PDetectSrf: return "p_detect_srf";
    case SweepParam::PDetectOos: return "p_detect_oos";
    case SweepParam::PLf: return "p_lf";
    case SweepParam::Samples: return "samples";
    case SweepParam::Failures: return "failures";
    case SweepParam::Cl: return "cl";
    }
    return "unknown";
}

std::optional<SweepParam> sweep_param_from_string(std::string_view text) noexcept {
    for (auto p : {SweepParam::POos, SweepParam::PDetectSrf, SweepParam::PDetectOos, SweepParam::PLf,
                   SweepParam::Samples, SweepParam::Failures, SweepParam::Cl}) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void domain_error(const std::string& message) {
    throw QsafeError("E_SWEEP_DOMAIN", message);
}

bool is_count_param(SweepParam param) {
    return param == SweepParam::Samples || param == SweepParam::Failures;
}

void check_value_domain(const CaseBundle& bundle, SweepParam param, double value) {
    const std::string name(to_string(param));
    const auto fail = [&] { domain_error(name + " = " + std::to_string(value) + " is outside its domain"); };
    switch (param) {
    case SweepParam::POos:
    case SweepParam::PLf:
        if (!(value >= 0.0 && value < 1.0)) fail();
        break;
    case SweepParam::PDetectSrf:
    case SweepParam::PDetectOos:
        if (!(value >= 0.0 && value <= 1.0)) fail();
        break;
    case SweepParam::Cl:
        if (!(value > 0.0 && value < 1.0)) fail();
        break;
    case SweepParam::Samples:
        if (!(value >= 1.0) || std::llround(value) < 1 ||
            static_cast<Count>(std::llround(value)) < bundle.test->failures) {
            fail();
        }
        break;
    case SweepParam::Failures:
        if (!(value >= 0.0) || static_cast<Count>(std::llround(value)) > bundle.test->samples) fail();
        break;
    }
}

} // namespace

CaseBundle with_parameter(const CaseBundle& bundle, SweepParam param, double value) {
    CaseBundle b = bundle;
    switch (param) {
    case SweepParam::POos: {
        ScopeEvidence scope;
        if (b.scope) scope = *b.scope;
        scope.form = Probability(value);
        b.scope = std::move(scope);
        b.mission_time.reset();
        break;
    }
    case SweepParam::PDetectSrf: {
        DetectionEvidence det;
        if (b.detect_srf) det = *b.detect_srf;
        det.kind = DetectionKind::Srf;
        det.form = Probability(value);
        det.provenance = Provenance::Expert;
        b.detect_srf = std::move(det);
        break;
    }
    case SweepParam::PDetectOos: {
        DetectionEvidence det;
        if (b.detect_oos) det = *b.detect_oos;
        det.kind = DetectionKind::Oos;
        det.form = Probability(value);
        b.detect_oos = std::move(det);
        break;
    }
    case SweepParam::PLf: b.labels = LabelQuality{Probability(value)}; break;
    case SweepParam::Samples: b.test->samples = static_cast<Count>(std::llround(value)); break;
    case SweepParam::Failures: b.test->failures = static_cast<Count>(std::llround(value)); break;
    case SweepParam::Cl: b.target->cl = ConfidenceLevel(value); break;
    }
    return b;
}

std::vector<SweepRow> sensitivity_sweep(const CaseBundle& bundle, ConfidenceMode mode, const SweepSpec& spec,
                                        IntervalMethod method) {
    if (!bundle.target || !bundle.test) domain_error("sweep requires a validated bundle");
    if (spec.steps < 2) domain_error("sweep needs at least 2 steps");
    if (!std::isfinite(spec.from) || !std::isfinite(spec.to) || !(spec.from < spec.to)) {
        domain_error("sweep range must satisfy from < to");
    }
    check_value_domain(bundle, spec.param, spec.from);
    check_value_domain(bundle, spec.param, spec.to);

    std::vector<SweepRow> rows;
    rows.reserve(spec.steps);
    for (Count i = 0; i < spec.steps; ++i) {
        SweepRow row;
        row.value = i + 1 == spec.steps
                        ? spec.to
                        : spec.from + (spec.to - spec.from) * static_cast<double>(i) / static_cast<double>(spec.steps - 1);
        if (is_count_param(spec.param)) row.value = static_cast<double>(std::llround(row.value));
        check_value_domain(bundle, spec.param, row.value);

        const CaseBundle b = with_parameter(bundle, spec.param, row.value);
        if (const auto errors = validate_bundle(b); !errors.empty()) {
            domain_error(std::string(to_string(spec.param)) + " override yields an invalid case: " +
                         errors.front().message);
        }
        const ResolvedEstimates r = resolve_estimates(b, mode, method);
        const CaseId id = applicable_case(b);
        try {
            const BoundReport report = evaluate_bound(r, id, *b.target);
            row.p_safe_upper = report.p_safe_upper;
            row.verdict = report.verdict;
            if (!report.preposition_status.empty()) {
                row.code = std::string(to_string(report.preposition_status.front().code));
            }
        } catch (const QsafeError&) {
            row.verdict = Verdict::Infeasible;
            row.code = "V_DENOMINATOR";
        }
        try {
            DerivationRequest request;
            request.samples = b.test->samples;
            const DerivationResult d = derive_required_test_bound(r, id, *b.target, request);
            row.required_u_test = d.required_u_test;
            row.max_failures = d.max_failures;
        } catch (const QsafeError&) {
            row.verdict = Verdict::Infeasible;
            if (row.code.empty()) row.code = "V_DENOMINATOR";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace qsafe
