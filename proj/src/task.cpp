#include "pursuit/task.hpp"

#include <sstream>

namespace pursuit {

namespace {

std::string fmt_vec(const Vec3& p) {
  std::ostringstream out;
  out << "(" << p.x() << ", " << p.y() << ", " << p.z() << ")";
  return out.str();
}

}  // namespace

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) out << (i ? "; " : "") << violations[i];
  return out.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("invalid task: " + report.summary()), report_(std::move(report)) {}

ValidationReport validate_task(const TaskParams& task, const EnvConfig& cfg) {
  ValidationReport report;
  auto add = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };
  const Arena arena = arena_of(cfg);
  const double r_obs = cfg.obstacle_radius;

  if (static_cast<int>(task.pursuer_starts.size()) != cfg.n_pursuers)
    add("expected " + std::to_string(cfg.n_pursuers) + " pursuer starts, got " +
        std::to_string(task.pursuer_starts.size()));

  for (std::size_t i = 0; i < task.obstacles.size(); ++i) {
    const Vec2& c = task.obstacles[i];
    if (!c.allFinite() || c.norm() > cfg.arena_radius - r_obs)
      add("obstacle " + std::to_string(i) + " not inside arena");
    for (std::size_t j = i + 1; j < task.obstacles.size(); ++j)
      if ((c - task.obstacles[j]).norm() < 2 * r_obs)
        add("obstacles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
  }

  auto check_start = [&](const Vec3& p, const std::string& name) {
    if (!p.allFinite() || !arena.contains(p, cfg.clearance)) {
      add(name + " " + fmt_vec(p) + " outside arena clearance margin");
      return;
    }
    for (std::size_t k = 0; k < task.obstacles.size(); ++k)
      if (horizontal_distance(p, task.obstacles[k]) < r_obs + cfg.clearance)
        add(name + " within clearance of obstacle " + std::to_string(k));
  };

  for (std::size_t i = 0; i < task.pursuer_starts.size(); ++i) {
    check_start(task.pursuer_starts[i], "pursuer " + std::to_string(i));
    for (std::size_t j = i + 1; j < task.pursuer_starts.size(); ++j)
      if ((task.pursuer_starts[i] - task.pursuer_starts[j]).norm() < cfg.clearance)
        add("pursuers " + std::to_string(i) + " and " + std::to_string(j) + " within clearance");
  }
  check_start(task.evader_start, "evader");

  // A capture radius spanning the whole arena makes separation unsatisfiable
  // and capture on the first tick certain; the check is vacuous there.
  if (cfg.capture_radius < 2 * cfg.arena_radius) {
    for (std::size_t i = 0; i < task.pursuer_starts.size(); ++i)
      if ((task.pursuer_starts[i] - task.evader_start).norm() <= cfg.capture_radius)
        add("evader start within capture radius of pursuer " + std::to_string(i));
  }
  return report;
}

}  // namespace pursuit
