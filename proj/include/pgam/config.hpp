#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pgam/harness.hpp"

namespace pgam {

// Scenario and experiment files are JSON. Lengths are meters, angles degrees.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json load_json(const std::filesystem::path& path);

// "a.b.c=value": value is parsed as JSON when possible, otherwise kept as a string.
void apply_override(nlohmann::json& config, std::string_view assignment);

ErrorGrid grid_from_json(const nlohmann::json& j);
Pose pose_from_json(const nlohmann::json& j);

// Hash of the task-defining part of a scenario (task kind plus evaluator
// parameters); grid and estimator settings do not contribute.
std::uint64_t scenario_hash(const nlohmann::json& scenario);

std::shared_ptr<const TaskEvaluator> evaluator_from_json(const nlohmann::json& scenario);
Scenario scenario_from_json(const nlohmann::json& scenario);

struct ExperimentSpec {
    ExperimentConfig config;
    std::vector<std::filesystem::path> map_paths;  // one per scenario
};

// Relative scenario and map paths resolve against base_dir.
ExperimentSpec experiment_from_json(const nlohmann::json& experiment, const std::filesystem::path& base_dir);

}  // namespace pgam
