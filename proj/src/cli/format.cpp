#include <iomanip>
#include <ostream>

#include "commands.hpp"
#include "qsafe/case_dsl.hpp"

namespace qsafe::cli {

namespace {

std::string num(double value) { return dsl::format_number(value); }

std::string confidence(const SafetyTarget& target) { return num(target.cl.value()); }

void text_row(std::ostream& out, std::string_view label, const std::string& value) {
    out << "  " << std::left << std::setw(20) << label << value << '\n';
}

void text_tree(const ArgumentNode& node, int depth, std::ostream& out) {
    out << std::string(2 + 2 * depth, ' ') << '[' << to_string(node.status) << "] " << node.id << ": " << node.claim
        << '\n';
    for (const auto& child : node.children) text_tree(child, depth + 1, out);
}

void collect_warnings(const ArgumentNode& node, std::vector<std::string>& lines) {
    if (node.status == NodeStatus::AssumedOnly || node.status == NodeStatus::MissingEvidence) {
        std::string line = node.id + " " + std::string(to_string(node.status));
        for (const auto& note : node.notes) line += "; " + note;
        lines.push_back(std::move(line));
    } else {
        for (const auto& note : node.notes) lines.push_back(node.id + ": " + note);
    }
    for (const auto& child : node.children) collect_warnings(child, lines);
}

std::string cl_text(const ResolvedEstimates& r) {
    std::string text = "cl " + num(r.cl_effective.test);
    if (r.statistical_quantities > 1) text += " each of " + std::to_string(r.statistical_quantities);
    return text;
}

std::string optional_count(const std::optional<Count>& value) {
    return value ? std::to_string(*value) : std::string("none");
}

} // namespace

void print_check_text(const CheckView& v, std::ostream& out) {
    const BoundReport& rep = v.report;
    out << "case " << dsl::quote(v.bundle.id) << ": case " << to_string(rep.case_id) << ", mode "
        << to_string(v.mode) << ", interval " << to_string(v.estimates.method) << '\n';
    text_row(out, "target", "p_safe <= " + num(rep.p_target) + " at confidence " + confidence(*v.bundle.target));
    text_row(out, "bound", "p_safe <= " + num(rep.p_safe_upper));
    text_row(out, "verdict", std::string(to_string(rep.verdict)) + " (margin " + num(rep.margin) + ")");

    out << "estimates\n";
    text_row(out, "u_test", num(v.estimates.u_test.value()) + " (" + cl_text(v.estimates) + ")");
    text_row(out, "l_detect_srf", num(v.estimates.l_detect_srf.value()));
    text_row(out, "p_oos", num(v.estimates.p_oos.value()));
    text_row(out, "p_detect_oos", num(v.estimates.p_detect_oos.value()));
    text_row(out, "p_lf", num(v.estimates.p_lf.value()) + (v.estimates.labels_unverified ? " (unverified)" : ""));

    out << "terms\n";
    text_row(out, "+ test_term", num(rep.terms.test_term));
    text_row(out, "+ label_penalty", num(rep.terms.label_penalty));
    text_row(out, "- srf_detect_credit", num(rep.terms.srf_detect_credit));
    text_row(out, "+ scope_term", num(rep.terms.scope_term));
    text_row(out, "- oos_detect_credit", num(rep.terms.oos_detect_credit));
    text_row(out, "= p_safe_raw", num(rep.p_safe_raw));

    if (!rep.preposition_status.empty()) {
        out << "violations\n";
        for (const auto& violation : rep.preposition_status) {
            out << "  " << to_string(violation.code) << ": " << violation.message << '\n';
        }
    }

    out << "argument\n";
    text_tree(v.tree, 0, out);

    std::vector<std::string> warnings;
    collect_warnings(v.tree, warnings);
    out << "warnings (" << warnings.size() << ")\n";
    for (const auto& line : warnings) out << "  - " << line << '\n';
}

void print_check_markdown(const CheckView& v, std::ostream& out) {
    const BoundReport& rep = v.report;
    out << "# Case " << v.bundle.id << "\n\n";
    out << "Case **" << to_string(rep.case_id) << "**, mode `" << to_string(v.mode) << "`, interval `"
        << to_string(v.estimates.method) << "`.\n\n";
    out << "| quantity | value |\n|---|---|\n";
    out << "| p_target | " << num(rep.p_target) << " |\n";
    out << "| confidence | " << confidence(*v.bundle.target) << " |\n";
    out << "| p_safe_upper | " << num(rep.p_safe_upper) << " |\n";
    out << "| margin | " << num(rep.margin) << " |\n";
    out << "| verdict | " << to_string(rep.verdict) << " |\n\n";

    out << "## Terms\n\n| term | value |\n|---|---|\n";
    out << "| + test_term | " << num(rep.terms.test_term) << " |\n";
    out << "| + label_penalty | " << num(rep.terms.label_penalty) << " |\n";
    out << "| - srf_detect_credit | " << num(rep.terms.srf_detect_credit) << " |\n";
    out << "| + scope_term | " << num(rep.terms.scope_term) << " |\n";
    out << "| - oos_detect_credit | " << num(rep.terms.oos_detect_credit) << " |\n";
    out << "| = p_safe_raw | " << num(rep.p_safe_raw) << " |\n\n";

    for (const auto& violation : rep.preposition_status) {
        out << "- **" << to_string(violation.code) << "**: " << violation.message << '\n';
    }

    out << "## Argument\n\n| node | status | claim |\n|---|---|---|\n";
    out << "| " << v.tree.id << " | " << to_string(v.tree.status) << " | " << v.tree.claim << " |\n";
    for (const auto& child : v.tree.children) {
        out << "| " << child.id << " | " << to_string(child.status) << " | " << child.claim << " |\n";
    }

    std::vector<std::string> warnings;
    collect_warnings(v.tree, warnings);
    out << "\n## Warnings (" << warnings.size() << ")\n\n";
    for (const auto& line : warnings) out << "- " << line << '\n';
}

void print_derive_text(const CaseBundle& bundle, const DerivationResult& d, ConfidenceMode mode, std::ostream& out) {
    out << "case " << dsl::quote(bundle.id) << ": case " << to_string(d.case_id) << ", mode " << to_string(mode)
        << '\n';
    text_row(out, "feasible", d.feasible() ? "yes" : "no (" + std::string(describe(d.reason)) + ")");
    text_row(out, "required_u_test", d.required_u_test ? num(*d.required_u_test) : "none");
    text_row(out, "required_raw", num(d.required_raw));
    text_row(out, "before_label_shift", num(d.before_label_shift));
    text_row(out, "cl_effective", num(d.cl_effective));
    if (d.samples) {
        text_row(out, "samples", std::to_string(*d.samples));
        text_row(out, "max_failures", optional_count(d.max_failures));
    }
    if (d.min_samples || d.feasible()) text_row(out, "min_samples", optional_count(d.min_samples));
}

void print_derive_markdown(const CaseBundle& bundle, const DerivationResult& d, ConfidenceMode mode,
                           std::ostream& out) {
    out << "# Derivation for " << bundle.id << "\n\n";
    out << "Case **" << to_string(d.case_id) << "**, mode `" << to_string(mode) << "`.\n\n";
    out << "| quantity | value |\n|---|---|\n";
    out << "| feasible | " << (d.feasible() ? "yes" : "no: " + std::string(describe(d.reason))) << " |\n";
    out << "| required_u_test | " << (d.required_u_test ? num(*d.required_u_test) : "none") << " |\n";
    out << "| required_raw | " << num(d.required_raw) << " |\n";
    out << "| before_label_shift | " << num(d.before_label_shift) << " |\n";
    out << "| cl_effective | " << num(d.cl_effective) << " |\n";
    out << "| samples | " << optional_count(d.samples) << " |\n";
    out << "| max_failures | " << optional_count(d.max_failures) << " |\n";
    out << "| min_samples | " << optional_count(d.min_samples) << " |\n";
}

} // namespace qsafe::cli
