#pragma once

#include "sme/aggregation.hpp"
#include "sme/mc_oracle.hpp"
#include "sme/mixed_erlang.hpp"
#include "sme/sarmanov_model.hpp"

#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace sme {

inline constexpr int kModelSchemaVersion = 1;

// Model files (strict: unknown keys are errors):
// {
//   "schema_version": 1,
//   "portfolios": [[{"beta": 0.9, "weights": [0.4, 0.6]}, ...], ...],
//   "alpha_within": {"1": {"1,2": 16.0}},          portfolio -> "s,t" -> alpha (1-based, s < t)
//   "alpha_cross": {"1,2": [[8, 5, 2], [8, 5, 2]]}, "a,b" (a < b) -> k_a x k_b matrix
//   "deductibles": [50, 45] | null,
//   "settings": {"series_epsilon": 1e-12, "max_terms": 20000,
//                "quantile_tolerance": 1e-10, "reinsured_tolerance": 1e-8}
// }
// alpha_within, alpha_cross, deductibles and settings are optional.

nlohmann::json to_json(const MixedErlang& d);
MixedErlang mixed_erlang_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SarmanovModel& m);
SarmanovModel model_from_json(const nlohmann::json& j);

/// Throws ParseError on malformed text, schema violations, or a well-formed
/// file describing an invalid model (bad weights, negative deductibles, ...).
SarmanovModel parse_model(std::string_view text);
SarmanovModel load_model(const std::filesystem::path& path);

nlohmann::json to_json(const AllocationReport& r);
nlohmann::json to_json(const OracleReport& r);

}  // namespace sme
