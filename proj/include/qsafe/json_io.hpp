#pragma once

// JSON encodings shared by the tree export and the CLI reports. Objects use
// ordered_json so key order is fixed by construction.

#include <json.hpp>

#include "qsafe/budget.hpp"
#include "qsafe/evidence.hpp"

namespace qsafe {
struct ArgumentNode;
}

namespace qsafe::json {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const BoundReport& report);
[[nodiscard]] BoundReport bound_report_from_json(const Json& j);

[[nodiscard]] Json to_json(const ResolvedEstimates& r);
[[nodiscard]] Json to_json(const DerivationResult& d);

/// Same document as export_json, as a value for embedding.
[[nodiscard]] Json tree_to_json(const ArgumentNode& root);

} // namespace qsafe::json
