#pragma once

// Named evaluation scenarios. Fixed obstacle layouts are design constants
// chosen for the property each scenario has to exhibit; start positions are
// drawn per seed.

#include "pursuit/config.hpp"
#include "pursuit/task.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pursuit {

enum class ScenarioName { wall, narrow_gap, random, passage, obstacle_free, uniform };

std::optional<ScenarioName> parse_scenario(const std::string& name);
std::string to_string(ScenarioName name);
std::vector<std::string> scenario_names();

struct ScenarioSpec {
  ScenarioName name = ScenarioName::uniform;
  std::vector<Vec2> obstacles;  // fixed layout; unused by random and uniform
};

/// Five collinear obstacles across the chord x = 0.
std::vector<Vec2> wall_layout();
/// The wall with its centre obstacle removed, leaving one gap.
std::vector<Vec2> narrow_gap_layout();
/// Four obstacles on x = 0 that seal the wall ends and leave three corridors.
std::vector<Vec2> passage_layout();

ScenarioSpec make_scenario(ScenarioName name);

/// Throws std::runtime_error if `random` cannot hide the evader within 10^3 attempts.
TaskParams build_scenario(const ScenarioSpec& spec, const EnvConfig& env, std::uint64_t seed);

}  // namespace pursuit
