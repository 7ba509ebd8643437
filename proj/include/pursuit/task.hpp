#pragma once

#include "pursuit/config.hpp"
#include "pursuit/geometry.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pursuit {

/// One point of the task space: obstacle layout plus initial positions.
struct TaskParams {
  std::vector<Vec2> obstacles;
  Vec3List pursuer_starts;
  Vec3 evader_start = Vec3::Zero();

  bool operator==(const TaskParams&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Lists every violated TaskParams invariant for the given environment.
ValidationReport validate_task(const TaskParams& task, const EnvConfig& cfg);

inline Arena arena_of(const EnvConfig& cfg) { return {cfg.arena_radius, cfg.arena_height}; }

}  // namespace pursuit
