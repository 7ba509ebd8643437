#pragma once

// The single JSON configuration document (sections env, quad, control,
// evader, policies, curriculum, eval) and JSON forms of TaskParams.

#include "pursuit/config.hpp"
#include "pursuit/pursuers.hpp"
#include "pursuit/task.hpp"
#include "pursuit/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pursuit {

/// Thrown for malformed or out-of-range configuration; `field` is a dotted path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct EvalConfig {
  std::string policy = "angelani";
  std::string scenario = "uniform";
  int episodes_per_seed = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int workers = 1;
  std::vector<double> radii{0.3, 0.45, 0.6};
  /// Hyperparameter grid for grid-search: "section.field" -> candidate values.
  std::map<std::string, std::vector<double>> grid;
};

struct SimConfig {
  EnvParts parts;
  PoliciesConfig policies;
  CurriculumConfig curriculum;
  EvalConfig eval;
};

SimConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SimConfig& cfg);
SimConfig load_config(const std::filesystem::path& path);

/// Sets one numeric policy hyperparameter addressed as "<policy>.<field>".
void set_policy_param(PoliciesConfig& cfg, const std::string& key, double value);

nlohmann::json task_to_json(const TaskParams& task);
TaskParams task_from_json(const nlohmann::json& j);

}  // namespace pursuit
