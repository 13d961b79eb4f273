#include "qsafe/json_io.hpp"

#include "qsafe/error.hpp"

namespace qsafe::json {

namespace {

template <typename T>
Json optional_value(const std::optional<T>& value) {
    return value ? Json(*value) : Json(nullptr);
}

} // namespace

Json to_json(const BoundReport& report) {
    Json prepositions = Json::array();
    for (const auto& v : report.preposition_status) {
        prepositions.push_back(Json{{"code", to_string(v.code)},
                                    {"p_oos", v.p_oos},
                                    {"l_detect_srf", v.l_detect_srf},
                                    {"message", v.message}});
    }
    return Json{
        {"case", to_string(report.case_id)},
        {"p_target", report.p_target},
        {"p_safe_upper", report.p_safe_upper},
        {"p_safe_raw", report.p_safe_raw},
        {"margin", report.margin},
        {"verdict", to_string(report.verdict)},
        {"terms",
         Json{{"test_term", report.terms.test_term},
              {"label_penalty", report.terms.label_penalty},
              {"srf_detect_credit", report.terms.srf_detect_credit},
              {"scope_term", report.terms.scope_term},
              {"oos_detect_credit", report.terms.oos_detect_credit}}},
        {"prepositions", prepositions},
    };
}

BoundReport bound_report_from_json(const Json& j) {
    try {
        BoundReport report;
        const auto id = case_id_from_string(j.at("case").get<std::string>());
        const auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
        if (!id || !verdict) throw QsafeError("E_JSON", "bound report: bad case or verdict");
        report.case_id = *id;
        report.verdict = *verdict;
        report.p_target = j.at("p_target").get<double>();
        report.p_safe_upper = j.at("p_safe_upper").get<double>();
        report.p_safe_raw = j.at("p_safe_raw").get<double>();
        report.margin = j.at("margin").get<double>();
        const Json& terms = j.at("terms");
        report.terms.test_term = terms.at("test_term").get<double>();
        report.terms.label_penalty = terms.at("label_penalty").get<double>();
        report.terms.srf_detect_credit = terms.at("srf_detect_credit").get<double>();
        report.terms.scope_term = terms.at("scope_term").get<double>();
        report.terms.oos_detect_credit = terms.at("oos_detect_credit").get<double>();
        for (const Json& v : j.at("prepositions")) {
            const auto code = v.at("code").get<std::string>();
            if (code != "V_PREPOSITION" && code != "V_DENOMINATOR") {
                throw QsafeError("E_JSON", "bound report: unknown violation code " + code);
            }
            report.preposition_status.push_back(
                {code == "V_PREPOSITION" ? ViolationCode::Preposition : ViolationCode::Denominator,
                 v.at("p_oos").get<double>(), v.at("l_detect_srf").get<double>(), v.at("message").get<std::string>()});
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw QsafeError("E_JSON", std::string("bound report: ") + e.what());
    }
}

Json to_json(const ResolvedEstimates& r) {
    return Json{
        {"u_test", r.u_test.value()},
        {"l_detect_srf", r.l_detect_srf.value()},
        {"p_oos", r.p_oos.value()},
        {"p_detect_oos", r.p_detect_oos.value()},
        {"p_lf", r.p_lf.value()},
        {"cl_effective",
         Json{{"test", r.cl_effective.test},
              {"detect_srf", optional_value(r.cl_effective.detect_srf)},
              {"labels", optional_value(r.cl_effective.labels)}}},
        {"statistical_quantities", r.statistical_quantities},
        {"interval_method", to_string(r.method)},
        {"conservative", is_conservative(r.method)},
        {"labels_unverified", r.labels_unverified},
    };
}

Json to_json(const DerivationResult& d) {
    return Json{
        {"case", to_string(d.case_id)},
        {"feasible", d.feasible()},
        {"reason", to_string(d.reason)},
        {"required_u_test", optional_value(d.required_u_test)},
        {"required_raw", d.required_raw},
        {"before_label_shift", d.before_label_shift},
        {"cl_effective", d.cl_effective},
        {"samples", optional_value(d.samples)},
        {"max_failures", optional_value(d.max_failures)},
        {"min_samples", optional_value(d.min_samples)},
    };
}

} // namespace qsafe::json
