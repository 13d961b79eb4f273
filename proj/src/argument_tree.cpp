#include "qsafe/argument_tree.hpp"

#include <algorithm>
#include <sstream>

#include "qsafe/case_dsl.hpp"
#include "qsafe/error.hpp"
#include "qsafe/json_io.hpp"

namespace qsafe {

namespace {

constexpr std::string_view kKindNames[] = {
    "top_quantitative", "target_derivation",   "testing_estimate",    "scope_compliance", "srf_detection",
    "oos_detection",    "data_unseen",         "data_representative", "data_labels_correct",
};

constexpr std::string_view kStatusNames[] = {"satisfied", "unsatisfied", "assumed_only", "missing_evidence"};

std::string num(double value) { return dsl::format_number(value); }

std::string provenance_ref(Provenance provenance, const std::string& justification) {
    std::string text(to_string(provenance));
    if (!justification.empty()) text += ": " + justification;
    return text;
}

ArgumentNode make_node(std::string id, NodeKind kind, std::string claim) {
    ArgumentNode node;
    node.id = std::move(id);
    node.kind = kind;
    node.claim = std::move(claim);
    return node;
}

ArgumentNode detection_node(const std::optional<DetectionEvidence>& det, NodeKind kind, std::string id,
                            std::string claim) {
    ArgumentNode node = make_node(std::move(id), kind, std::move(claim));
    if (!det) {
        node.status = NodeStatus::MissingEvidence;
        node.notes.push_back("no credit taken");
        return node;
    }
    node.status = NodeStatus::Satisfied;
    const std::string kind_name(to_string(det->kind));
    if (const auto* campaign = std::get_if<DetectionCampaign>(&det->form)) {
        node.evidence_refs.push_back("detection " + kind_name + ": " + std::to_string(campaign->detected) + " of " +
                                     std::to_string(campaign->total) + " detected (" +
                                     provenance_ref(det->provenance, det->justification) + ")");
    } else {
        node.evidence_refs.push_back("detection " + kind_name + ": p_detect = " +
                                     num(std::get<Probability>(det->form).value()) + " (" +
                                     provenance_ref(det->provenance, det->justification) + ")");
    }
    return node;
}

ArgumentNode assumption_node(const CaseBundle& bundle, std::string_view token, NodeKind kind, std::string id,
                             std::string claim) {
    ArgumentNode node = make_node(std::move(id), kind, std::move(claim));
    if (bundle.assumes(token)) {
        node.status = NodeStatus::AssumedOnly;
        node.evidence_refs.push_back("assume \"" + std::string(token) + "\"");
    } else {
        node.status = NodeStatus::MissingEvidence;
        node.notes.push_back("declare assume \"" + std::string(token) + "\" or provide evidence");
    }
    return node;
}

} // namespace

std::string_view to_string(NodeKind kind) noexcept { return kKindNames[static_cast<int>(kind)]; }

std::string_view to_string(NodeStatus status) noexcept { return kStatusNames[static_cast<int>(status)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept {
    const auto* it = std::find(std::begin(kKindNames), std::end(kKindNames), text);
    if (it == std::end(kKindNames)) return std::nullopt;
    return static_cast<NodeKind>(it - std::begin(kKindNames));
}

std::optional<NodeStatus> node_status_from_string(std::string_view text) noexcept {
    const auto* it = std::find(std::begin(kStatusNames), std::end(kStatusNames), text);
    if (it == std::end(kStatusNames)) return std::nullopt;
    return static_cast<NodeStatus>(it - std::begin(kStatusNames));
}

ArgumentNode build_tree(const CaseBundle& bundle, const BoundReport& report) {
    const double p_target = bundle.target ? bundle.target->p_target.value() : report.p_target;
    const std::string cl = bundle.target ? num(bundle.target->cl.value()) : "?";

    ArgumentNode root = make_node("G0", NodeKind::TopQuantitative,
                                  "Probability of an unflagged safety-related failure is at most " + num(p_target) +
                                      " at confidence " + cl);
    root.bound = report;
    root.evidence_refs.push_back("bound (case " + to_string(report.case_id) + "): " + num(report.p_safe_upper));

    ArgumentNode target = make_node("G1.A", NodeKind::TargetDerivation,
                                    "Component target " + num(p_target) +
                                        " is appropriately derived from the system-level target");
    target.status = NodeStatus::AssumedOnly;
    target.notes.push_back("target is a declared input; its derivation is not checked");

    ArgumentNode testing = make_node("G2.B", NodeKind::TestingEstimate,
                                     "Failure probability within the target scope is bounded by statistical testing");
    if (bundle.test) {
        testing.status = NodeStatus::Satisfied;
        testing.evidence_refs.push_back("testing: " + std::to_string(bundle.test->failures) + " failures in " +
                                        std::to_string(bundle.test->samples) + " samples");
    } else {
        testing.status = NodeStatus::MissingEvidence;
    }

    ArgumentNode scope = make_node("G3.C", NodeKind::ScopeCompliance,
                                   "Probability of operation outside the target scope is bounded");
    if (bundle.scope) {
        scope.status = NodeStatus::Satisfied;
        std::string ref = "scope: ";
        if (const auto* point = std::get_if<Probability>(&bundle.scope->form)) {
            ref += "p_oos = " + num(point->value());
        } else {
            ref += "profile of " + std::to_string(std::get<ScopeProfile>(bundle.scope->form).size()) + " points";
            if (bundle.mission_time) ref += " at " + num(*bundle.mission_time) + " h";
        }
        ref += " (" + provenance_ref(bundle.scope->provenance, bundle.scope->justification) + ")";
        scope.evidence_refs.push_back(std::move(ref));
    } else if (bundle.assumes(kClosedScopeAssumption)) {
        scope.status = NodeStatus::AssumedOnly;
        scope.evidence_refs.push_back("assume \"" + std::string(kClosedScopeAssumption) + "\"");
        scope.notes.push_back("p_oos = 0 under the closed-scope assumption");
    } else {
        scope.status = NodeStatus::MissingEvidence;
    }

    ArgumentNode srf = detection_node(bundle.detect_srf, NodeKind::SrfDetection, "G4.D",
                                      "Runtime monitoring flags safety-related failures within the target scope");
    if (!report.preposition_status.empty() && bundle.detect_srf) {
        srf.status = NodeStatus::Unsatisfied;
        for (const auto& v : report.preposition_status) {
            srf.notes.push_back(std::string(to_string(v.code)) + ": " + v.message);
        }
    }
    ArgumentNode oos = detection_node(bundle.detect_oos, NodeKind::OosDetection, "G5.E",
                                      "Runtime monitoring detects operation outside the target scope");

    ArgumentNode unseen = assumption_node(bundle, kDatasetUnseenAssumption, NodeKind::DataUnseen, "G6.F.a",
                                          "Test data was not used during model development");
    ArgumentNode representative =
        assumption_node(bundle, kDatasetRepresentativeAssumption, NodeKind::DataRepresentative, "G7.F.b",
                        "Test data is representative of the target application scope");

    ArgumentNode labels = make_node("G8.F.c", NodeKind::DataLabelsCorrect,
                                    "Dataset labels match the intended outcomes up to a bounded fault rate");
    if (!bundle.labels) {
        labels.status = NodeStatus::MissingEvidence;
        root.notes.push_back("p_lf = 0 was assumed: no label-quality evidence declared");
    } else if (const auto* audit = std::get_if<LabelAudit>(&bundle.labels->form)) {
        labels.status = NodeStatus::Satisfied;
        labels.evidence_refs.push_back("label audit: " + std::to_string(audit->disagreements) + " of " +
                                       std::to_string(audit->audited) + " disagree");
    } else {
        labels.status = NodeStatus::AssumedOnly;
        labels.evidence_refs.push_back("declared p_lf = " + num(std::get<Probability>(bundle.labels->form).value()));
        labels.notes.push_back("declared rate is unverified");
    }

    root.children = {std::move(target), std::move(testing), std::move(scope),          std::move(srf),
                     std::move(oos),    std::move(unseen),  std::move(representative), std::move(labels)};
    return propagate_status(std::move(root));
}

ArgumentNode propagate_status(ArgumentNode root) {
    bool ok = root.bound && root.bound->verdict == Verdict::Satisfied;
    std::size_t warnings = 0;
    for (const auto& child : root.children) {
        if (child.status == NodeStatus::Unsatisfied) ok = false;
        if (child.kind == NodeKind::TestingEstimate && child.status == NodeStatus::MissingEvidence) ok = false;
        if (child.status == NodeStatus::AssumedOnly || child.status == NodeStatus::MissingEvidence) ++warnings;
    }
    root.status = ok ? NodeStatus::Satisfied : NodeStatus::Unsatisfied;
    root.warnings = warnings;
    return root;
}

namespace {

std::string dot_escape(std::string_view text) {
    std::string out;
    for (const char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

std::string_view fill_color(NodeStatus status) {
    switch (status) {
    case NodeStatus::Satisfied: return "green";
    case NodeStatus::Unsatisfied: return "red";
    case NodeStatus::AssumedOnly: return "yellow";
    case NodeStatus::MissingEvidence: return "gray";
    }
    return "white";
}

void dot_nodes(const ArgumentNode& node, std::ostringstream& out) {
    out << "  \"" << dot_escape(node.id) << "\" [label=\"" << dot_escape(node.id) << "\\n" << dot_escape(node.claim)
        << "\\n[" << to_string(node.status) << "]\", shape=box, style=filled, fillcolor=" << fill_color(node.status)
        << "];\n";
    for (const auto& child : node.children) dot_nodes(child, out);
}

void dot_edges(const ArgumentNode& node, std::ostringstream& out) {
    for (const auto& child : node.children) {
        out << "  \"" << dot_escape(node.id) << "\" -> \"" << dot_escape(child.id) << "\";\n";
        dot_edges(child, out);
    }
}

json::Json node_to_json(const ArgumentNode& node) {
    json::Json j{
        {"id", node.id},
        {"kind", to_string(node.kind)},
        {"claim", node.claim},
        {"status", to_string(node.status)},
        {"warnings", node.warnings},
        {"evidence_refs", node.evidence_refs},
        {"notes", node.notes},
    };
    if (node.bound) j["bound"] = json::to_json(*node.bound);
    json::Json children = json::Json::array();
    for (const auto& child : node.children) children.push_back(node_to_json(child));
    j["children"] = std::move(children);
    return j;
}

ArgumentNode node_from_json(const json::Json& j) {
    ArgumentNode node;
    node.id = j.at("id").get<std::string>();
    node.claim = j.at("claim").get<std::string>();
    const auto kind = node_kind_from_string(j.at("kind").get<std::string>());
    const auto status = node_status_from_string(j.at("status").get<std::string>());
    if (!kind || !status) throw QsafeError("E_JSON", "argument node " + node.id + ": bad kind or status");
    node.kind = *kind;
    node.status = *status;
    node.warnings = j.at("warnings").get<std::size_t>();
    node.evidence_refs = j.at("evidence_refs").get<std::vector<std::string>>();
    node.notes = j.at("notes").get<std::vector<std::string>>();
    if (j.contains("bound")) node.bound = json::bound_report_from_json(j.at("bound"));
    for (const auto& child : j.at("children")) node.children.push_back(node_from_json(child));
    return node;
}

} // namespace

std::string export_dot(const ArgumentNode& root) {
    std::ostringstream out;
    out << "digraph assurance_case {\n";
    dot_nodes(root, out);
    dot_edges(root, out);
    out << "}\n";
    return out.str();
}

std::string export_json(const ArgumentNode& root) { return node_to_json(root).dump(2) + "\n"; }

ArgumentNode import_json(std::string_view text) {
    try {
        return node_from_json(json::Json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw QsafeError("E_JSON", std::string("argument tree: ") + e.what());
    }
}

namespace json {

Json tree_to_json(const ArgumentNode& root) { return node_to_json(root); }

} // namespace json

} // namespace qsafe
