#include "commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "qsafe/case_dsl.hpp"
#include "qsafe/cli.hpp"
#include "qsafe/error.hpp"
#include "qsafe/json_io.hpp"

namespace qsafe::cli {

namespace {

using json::Json;

struct Loaded {
    CaseBundle bundle;
    ConfidenceMode mode = ConfidenceMode::PaperFaithful;
    IntervalMethod method = IntervalMethod::ClopperPearson;
};

std::optional<Loaded> load_case(const CaseOptions& options, Streams io) {
    std::ifstream file(options.file, std::ios::binary);
    if (!file) {
        io.err << "error: cannot read '" << options.file << "'\n";
        return std::nullopt;
    }
    std::ostringstream text;
    text << file.rdbuf();

    dsl::ParseOptions parse_options;
    parse_options.mission_time = options.at_time;
    parse_options.default_mission_time = true;
    dsl::ParseResult parsed = dsl::parse(text.str(), parse_options);
    for (const auto& warning : parsed.warnings) io.err << options.file << ": warning: " << warning << '\n';
    if (!parsed.ok()) {
        for (const auto& error : parsed.errors) io.err << options.file << ": " << dsl::format_error(error) << '\n';
        return std::nullopt;
    }

    Loaded loaded;
    loaded.bundle = std::move(*parsed.bundle);
    loaded.mode = *confidence_mode_from_string(options.mode);
    loaded.method = *interval_method_from_string(options.interval);
    if (!is_conservative(loaded.method)) {
        io.err << "warning: interval method '" << to_string(loaded.method)
               << "' is not conservative; the bound does not hold at the stated confidence\n";
    }
    return loaded;
}

/// Evaluates the bound; a negative denominator yields an infeasible report
/// with the vacuous bound 1 instead of an exception.
BoundReport evaluate_or_refuse(const ResolvedEstimates& r, CaseId id, const SafetyTarget& target) {
    try {
        return evaluate_bound(r, id, target);
    } catch (const QsafeError& e) {
        if (e.code() != "E_DENOMINATOR") throw;
        BoundReport report;
        report.case_id = id;
        report.p_target = target.p_target.value();
        report.p_safe_upper = 1.0;
        report.p_safe_raw = raw_bound(r, id);
        report.preposition_status = check_prepositions(r, id);
        report.verdict = Verdict::Infeasible;
        report.margin = report.p_target - report.p_safe_upper;
        return report;
    }
}

int domain_failure(const QsafeError& e, Streams io) {
    io.err << "error: [" << e.code() << "] " << e.what() << '\n';
    return e.code() == "E_DENOMINATOR" ? kNotSatisfied : kUsageError;
}

Json case_header(const Loaded& loaded, const ResolvedEstimates& r) {
    return Json{
        {"case_id", loaded.bundle.id},
        {"mode", to_string(loaded.mode)},
        {"estimates", json::to_json(r)},
    };
}

std::string cell(const std::optional<double>& value) { return value ? dsl::format_number(*value) : ""; }

std::string cell(const std::optional<Count>& value) { return value ? std::to_string(*value) : ""; }

template <typename T>
Json nullable(const std::optional<T>& value) {
    return value ? Json(*value) : Json(nullptr);
}

} // namespace

int cmd_check(const CheckOptions& options, Streams io) {
    const auto loaded = load_case(options.input, io);
    if (!loaded) return kUsageError;
    try {
        const CaseBundle& bundle = loaded->bundle;
        const ResolvedEstimates r = resolve_estimates(bundle, loaded->mode, loaded->method);
        const CaseId id = applicable_case(bundle);
        const BoundReport report = evaluate_or_refuse(r, id, *bundle.target);
        const ArgumentNode tree = build_tree(bundle, report);

        if (options.format == "json") {
            Json j = case_header(*loaded, r);
            j["report"] = json::to_json(report);
            j["tree"] = json::tree_to_json(tree);
            io.out << j.dump(2) << '\n';
        } else {
            const CheckView view{bundle, r, report, tree, loaded->mode};
            if (options.format == "md") {
                print_check_markdown(view, io.out);
            } else {
                print_check_text(view, io.out);
            }
        }
        return report.verdict == Verdict::Satisfied ? kSatisfied : kNotSatisfied;
    } catch (const QsafeError& e) {
        return domain_failure(e, io);
    }
}

int cmd_derive(const DeriveOptions& options, Streams io) {
    if (options.solve_for == "samples" && !options.expected_rate) {
        io.err << "error: --solve-for samples needs --expected-rate\n";
        return kUsageError;
    }
    const auto loaded = load_case(options.input, io);
    if (!loaded) return kUsageError;
    try {
        const CaseBundle& bundle = loaded->bundle;
        const ResolvedEstimates r = resolve_estimates(bundle, loaded->mode, loaded->method);
        const CaseId id = applicable_case(bundle);
        DerivationRequest request;
        if (bundle.test) request.samples = bundle.test->samples;
        if (options.expected_rate) request.expected_rate = Probability(*options.expected_rate);
        request.sample_cap = options.sample_cap;
        const DerivationResult d = derive_required_test_bound(r, id, *bundle.target, request);

        if (options.format == "json") {
            Json j = case_header(*loaded, r);
            j["solve_for"] = options.solve_for;
            j["derivation"] = json::to_json(d);
            io.out << j.dump(2) << '\n';
        } else if (options.format == "md") {
            print_derive_markdown(bundle, d, loaded->mode, io.out);
        } else {
            print_derive_text(bundle, d, loaded->mode, io.out);
        }
        return d.feasible() ? kSatisfied : kNotSatisfied;
    } catch (const QsafeError& e) {
        return domain_failure(e, io);
    }
}

int cmd_sensitivity(const SensitivityOptions& options, Streams io) {
    const auto param = sweep_param_from_string(options.vary);
    if (!param) {
        io.err << "error: unknown parameter '" << options.vary << "'\n";
        return kUsageError;
    }
    const auto loaded = load_case(options.input, io);
    if (!loaded) return kUsageError;
    try {
        const std::vector<SweepRow> rows =
            sensitivity_sweep(loaded->bundle, loaded->mode, SweepSpec{*param, options.from, options.to, options.steps},
                              loaded->method);
        const std::string name(to_string(*param));
        if (options.out == "json") {
            Json table = Json::array();
            for (const auto& row : rows) {
                table.push_back(Json{
                    {"value", row.value},
                    {"p_safe_upper", nullable(row.p_safe_upper)},
                    {"required_u_test", nullable(row.required_u_test)},
                    {"max_failures", nullable(row.max_failures)},
                    {"verdict", to_string(row.verdict)},
                    {"code", row.code.empty() ? Json(nullptr) : Json(row.code)},
                });
            }
            io.out << Json{{"param", name}, {"mode", to_string(loaded->mode)}, {"rows", table}}.dump(2) << '\n';
        } else {
            io.out << "param,value,p_safe_upper,required_u_test,max_failures,verdict\n";
            for (const auto& row : rows) {
                io.out << name << ',' << dsl::format_number(row.value) << ',' << cell(row.p_safe_upper) << ','
                       << cell(row.required_u_test) << ',' << cell(row.max_failures) << ',' << to_string(row.verdict);
                if (!row.code.empty()) io.out << ':' << row.code;
                io.out << '\n';
            }
        }
        return kSatisfied;
    } catch (const QsafeError& e) {
        io.err << "error: [" << e.code() << "] " << e.what() << '\n';
        return kUsageError;
    }
}

int cmd_simulate(const SimulateOptions& options, Streams io) {
    const auto mode = confidence_mode_from_string(options.mode);
    const auto id = case_id_from_string(options.case_id);
    if (!id) {
        io.err << "error: unknown case '" << options.case_id << "'\n";
        return kUsageError;
    }
    mc::ExperimentOptions experiment;
    experiment.workers = options.workers;
    experiment.truth_form = options.truth_form == "linearized" ? mc::TruthForm::Linearized : mc::TruthForm::Factored;

    try {
        if (options.grid) {
            mc::GridSpec spec;
            spec.n_test = options.n;
            spec.cl = options.cl;
            spec.runs = options.runs;
            io.out << mc::grid_csv(mc::coverage_grid(spec, options.seed, experiment));
            return kSatisfied;
        }
        mc::CampaignDesign design;
        design.n_test = options.n;
        design.n_detect_eval = options.n_detect;
        design.cl = options.cl;
        design.mode = *mode;
        design.case_id = *id;
        const mc::CoverageReport report =
            mc::coverage_experiment(options.truth, design, options.runs, options.seed, experiment);

        const Json j{
            {"truth",
             Json{{"p_srf", options.truth.p_srf},
                  {"p_oos", options.truth.p_oos},
                  {"p_detect_srf", options.truth.p_detect_srf},
                  {"p_detect_oos", options.truth.p_detect_oos},
                  {"p_lf", options.truth.p_lf}}},
            {"design",
             Json{{"n_test", design.n_test},
                  {"n_detect_eval", nullable(design.n_detect_eval)},
                  {"cl", design.cl},
                  {"mode", to_string(design.mode)},
                  {"case", to_string(design.case_id)}}},
            {"truth_form", options.truth_form},
            {"report",
             Json{{"runs", report.runs},
                  {"covered", report.covered},
                  {"coverage", report.coverage},
                  {"mean_slack", report.mean_slack},
                  {"slack_sd", report.slack_sd},
                  {"seed", report.seed},
                  {"p_true", report.p_true},
                  {"violations", report.violations}}},
            {"coverage_floor", mc::coverage_floor(design.cl, report.runs)},
        };
        io.out << j.dump(2) << '\n';
        return kSatisfied;
    } catch (const std::invalid_argument& e) {
        io.err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::domain_error& e) {
        io.err << "error: " << e.what() << '\n';
        return kUsageError;
    }
}

int cmd_render(const RenderOptions& options, Streams io) {
    const auto loaded = load_case(options.input, io);
    if (!loaded) return kUsageError;
    try {
        const CaseBundle& bundle = loaded->bundle;
        const ResolvedEstimates r = resolve_estimates(bundle, loaded->mode, loaded->method);
        const BoundReport report = evaluate_or_refuse(r, applicable_case(bundle), *bundle.target);
        const ArgumentNode tree = build_tree(bundle, report);
        io.out << (options.format == "json" ? export_json(tree) : export_dot(tree));
        return kSatisfied;
    } catch (const QsafeError& e) {
        return domain_failure(e, io);
    }
}

} // namespace qsafe::cli
