#pragma once

#include <string>

#include <json.hpp>

#include "lrsm/bench.hpp"

namespace lrsm {

// Reports carry this so downstream tooling can detect layout changes.
inline constexpr int kSchemaVersion = 1;

// Single-column CSV of non-negative integers; an optional leading header
// cell named `x` is accepted.  Floats and negatives are rejected outright.
CountSeries read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const CountSeries& series);

nlohmann::json params_to_json(const GcinarParams& params);
GcinarParams params_from_json(const nlohmann::json& j);

nlohmann::json estimate_to_json(const LrsmEstimate& est);
LrsmEstimate estimate_from_json(const nlohmann::json& j);

nlohmann::json ci_to_json(const CiResult& ci);

// Ground-truth sidecar for simulated series: the generating model and the
// true change-point locations.
nlohmann::json truth_to_json(const McpSpec& spec, std::uint64_t seed);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace lrsm
