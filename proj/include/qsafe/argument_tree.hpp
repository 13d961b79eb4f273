#pragma once

// Claim decomposition for a quantitative safety target: a top-level claim
// refined into target derivation, the four estimate claims (testing, scope
// compliance, failure detection, out-of-scope detection), and the three
// data-quality claims. Every kind always appears so gaps stay visible.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsafe/budget.hpp"
#include "qsafe/evidence.hpp"

namespace qsafe {

/// Declaration order is the fixed child order used by every export.
enum class NodeKind {
    TopQuantitative,
    TargetDerivation,
    TestingEstimate,
    ScopeCompliance,
    SrfDetection,
    OosDetection,
    DataUnseen,
    DataRepresentative,
    DataLabelsCorrect,
};

enum class NodeStatus { Satisfied, Unsatisfied, AssumedOnly, MissingEvidence };

[[nodiscard]] std::string_view to_string(NodeKind kind) noexcept;
[[nodiscard]] std::string_view to_string(NodeStatus status) noexcept;
[[nodiscard]] std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept;
[[nodiscard]] std::optional<NodeStatus> node_status_from_string(std::string_view text) noexcept;

struct ArgumentNode {
    std::string id;
    std::string claim;
    NodeKind kind = NodeKind::TopQuantitative;
    NodeStatus status = NodeStatus::MissingEvidence;
    std::vector<ArgumentNode> children;
    std::vector<std::string> evidence_refs;
    std::vector<std::string> notes;
    /// Root only: the bound the top claim rests on.
    std::optional<BoundReport> bound;
    /// Root only: AssumedOnly + MissingEvidence leaves.
    std::size_t warnings = 0;

    friend bool operator==(const ArgumentNode&, const ArgumentNode&) = default;
};

/// Builds the tree with leaf statuses from the bundle and propagates the root.
[[nodiscard]] ArgumentNode build_tree(const CaseBundle& bundle, const BoundReport& report);

/// Root is Satisfied iff the bound verdict is Satisfied, no leaf is
/// Unsatisfied and the testing claim has evidence. Leaves are never changed.
[[nodiscard]] ArgumentNode propagate_status(ArgumentNode root);

/// Graphviz digraph, one node per claim, filled by status.
[[nodiscard]] std::string export_dot(const ArgumentNode& root);

/// JSON with a fixed key order; the root carries the bound breakdown.
[[nodiscard]] std::string export_json(const ArgumentNode& root);

/// Inverse of export_json. Throws QsafeError("E_JSON") on malformed input.
[[nodiscard]] ArgumentNode import_json(std::string_view text);

} // namespace qsafe
