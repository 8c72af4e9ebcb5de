#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "intv/core_types.hpp"
#include "intv/sft_builder.hpp"
#include "intv/toy_env.hpp"

namespace intv {

// Every output file starts with a v1 header record.
struct JsonlHeader {
    std::string schema_version;
    std::string config_hash = "0";
    std::uint64_t seed = 0;
    std::string template_hash = "0";
};

inline constexpr const char* kSchemaProblem = "int.problem.v1";
inline constexpr const char* kSchemaTrajectory = "int.traj.v1";
inline constexpr const char* kSchemaIntervention = "int.intervention.v1";
inline constexpr const char* kSchemaVerify = "int.verify.v1";
inline constexpr const char* kSchemaSft = "int.sft.v1";
inline constexpr const char* kSchemaCurves = "int.curves.v1";

// FNV-1a over a canonical JSON dump, hex-encoded; used for config hashes.
std::string stable_hash(const std::string& text);

void write_jsonl(const std::string& path, const JsonlHeader& header,
                 const std::vector<nlohmann::json>& records);

// Validates the header's schema_version; throws SchemaError on mismatch.
std::pair<JsonlHeader, std::vector<nlohmann::json>> read_jsonl(const std::string& path,
                                                               const std::string& expected_schema);

nlohmann::json problem_to_json(const Problem& p, const ToyProblem* toy);
Problem problem_from_json(const nlohmann::json& j, ToyProblem* toy_out = nullptr);

nlohmann::json trajectory_to_json(const Trajectory& t, const std::string& trajectory_id);
Trajectory trajectory_from_json(const nlohmann::json& j, std::string* trajectory_id = nullptr);

nlohmann::json intervention_to_json(const Intervention& i);
Intervention intervention_from_json(const nlohmann::json& j);

nlohmann::json verify_report_to_json(const VerifyReport& r);
VerifyReport verify_report_from_json(const nlohmann::json& j);

nlohmann::json sft_example_to_json(const SftExample& e);
SftExample sft_example_from_json(const nlohmann::json& j);

}  // namespace intv
