#include "pursuit/scenarios.hpp"

#include "pursuit/curriculum.hpp"
#include "pursuit/world.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace pursuit {

std::optional<ScenarioName> parse_scenario(const std::string& name) {
  if (name == "wall") return ScenarioName::wall;
  if (name == "narrow_gap") return ScenarioName::narrow_gap;
  if (name == "random") return ScenarioName::random;
  if (name == "passage") return ScenarioName::passage;
  if (name == "obstacle_free") return ScenarioName::obstacle_free;
  if (name == "uniform") return ScenarioName::uniform;
  return std::nullopt;
}

std::string to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::wall: return "wall";
    case ScenarioName::narrow_gap: return "narrow_gap";
    case ScenarioName::random: return "random";
    case ScenarioName::passage: return "passage";
    case ScenarioName::obstacle_free: return "obstacle_free";
    case ScenarioName::uniform: return "uniform";
  }
  return "uniform";
}

std::vector<std::string> scenario_names() {
  return {"wall", "narrow_gap", "random", "passage", "obstacle_free", "uniform"};
}

std::vector<Vec2> wall_layout() { return {{0.0, -0.44}, {0.0, -0.22}, {0.0, 0.0}, {0.0, 0.22}, {0.0, 0.44}}; }

std::vector<Vec2> narrow_gap_layout() { return {{0.0, -0.44}, {0.0, -0.22}, {0.0, 0.22}, {0.0, 0.44}}; }

std::vector<Vec2> passage_layout() { return {{0.0, -0.79}, {0.0, -0.27}, {0.0, 0.27}, {0.0, 0.79}}; }

ScenarioSpec make_scenario(ScenarioName name) {
  switch (name) {
    case ScenarioName::wall: return {name, wall_layout()};
    case ScenarioName::narrow_gap: return {name, narrow_gap_layout()};
    case ScenarioName::passage: return {name, passage_layout()};
    default: return {name, {}};
  }
}

namespace {

constexpr int kMaxAttempts = 1000;
constexpr double kPi = 3.14159265358979323846;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Vec3 uniform_start(Rng& rng, const EnvConfig& env, double altitude) {
  const double inner = env.arena_radius - env.clearance;
  const double r = inner * std::sqrt(uniform(rng, 0.0, 1.0));
  const double a = uniform(rng, 0.0, 2.0 * kPi);
  return {r * std::cos(a), r * std::sin(a), altitude};
}

double pursuer_altitude(Rng& rng, const EnvConfig& env) {
  return uniform(rng, env.clearance, env.arena_height - env.clearance);
}

/// Rejection-samples starts around a fixed layout; each accepted point must
/// satisfy `region` and every TaskParams constraint with what is placed so far.
TaskParams place_starts(std::vector<Vec2> obstacles, const EnvConfig& env, Rng& rng,
                        const std::function<bool(const Vec3&)>& pursuer_region,
                        const std::function<bool(const Vec3&)>& evader_region) {
  TaskParams task;
  task.obstacles = std::move(obstacles);
  auto clear = [&](const Vec3& p) {
    for (const Vec2& c : task.obstacles)
      if (horizontal_distance(p, c) < env.obstacle_radius + env.clearance) return false;
    return true;
  };
  int tries = 0;
  for (;; ++tries) {
    if (tries > kMaxAttempts) throw std::runtime_error("scenario start sampling failed");
    const Vec3 p = uniform_start(rng, env, env.evader_start_altitude());
    if (clear(p) && evader_region(p)) {
      task.evader_start = p;
      break;
    }
  }
  const bool degenerate = env.capture_radius >= 2 * env.arena_radius;
  while (static_cast<int>(task.pursuer_starts.size()) < env.n_pursuers) {
    if (++tries > kMaxAttempts) throw std::runtime_error("scenario start sampling failed");
    const Vec3 p = uniform_start(rng, env, pursuer_altitude(rng, env));
    bool ok = clear(p) && pursuer_region(p) && (degenerate || (p - task.evader_start).norm() > env.capture_radius);
    for (const Vec3& q : task.pursuer_starts) ok = ok && (p - q).norm() >= env.clearance;
    if (ok) task.pursuer_starts.push_back(p);
  }
  return task;
}

/// Evader start with no line of sight from any pursuer start.
TaskParams build_hidden(const EnvConfig& env, Rng& rng) {
  const double inner = env.arena_radius - env.clearance;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    TaskParams task;
    task.evader_start = uniform_start(rng, env, env.evader_start_altitude());

    // One obstacle close to the evader casts a wide shadow; the rest are uniform.
    const double a = uniform(rng, 0.0, 2.0 * kPi);
    const double d = uniform(rng, env.obstacle_radius + env.clearance + 0.02, env.obstacle_radius + env.clearance + 0.1);
    const Vec2 shade = task.evader_start.head<2>() + d * Vec2(std::cos(a), std::sin(a));
    if (shade.norm() > env.arena_radius - env.obstacle_radius) continue;
    task.obstacles.push_back(shade);

    const int n_obstacles = std::uniform_int_distribution<int>(std::max(1, env.min_obstacles),
                                                               std::max(1, env.max_obstacles))(rng);
    for (int tries = 0; static_cast<int>(task.obstacles.size()) < n_obstacles && tries < 200; ++tries) {
      const double r = (env.arena_radius - env.obstacle_radius) * std::sqrt(uniform(rng, 0.0, 1.0));
      const double b = uniform(rng, 0.0, 2.0 * kPi);
      const Vec2 c(r * std::cos(b), r * std::sin(b));
      bool ok = horizontal_distance(task.evader_start, c) >= env.obstacle_radius + env.clearance;
      for (const Vec2& o : task.obstacles) ok = ok && (o - c).norm() >= 2 * env.obstacle_radius;
      if (ok) task.obstacles.push_back(c);
    }
    if (static_cast<int>(task.obstacles.size()) < n_obstacles) continue;

    for (int tries = 0; static_cast<int>(task.pursuer_starts.size()) < env.n_pursuers && tries < 400; ++tries) {
      const Vec3 p = uniform_start(rng, env, pursuer_altitude(rng, env));
      if (p.head<2>().norm() > inner) continue;
      bool ok = (p - task.evader_start).norm() > env.capture_radius &&
                !line_of_sight(p, task.evader_start, task.obstacles, env.obstacle_radius);
      for (const Vec2& c : task.obstacles) ok = ok && horizontal_distance(p, c) >= env.obstacle_radius + env.clearance;
      for (const Vec3& q : task.pursuer_starts) ok = ok && (p - q).norm() >= env.clearance;
      if (ok) task.pursuer_starts.push_back(p);
    }
    if (static_cast<int>(task.pursuer_starts.size()) == env.n_pursuers && validate_task(task, env).ok()) return task;
  }
  throw std::runtime_error("random scenario: could not hide the evader within 1000 attempts");
}

}  // namespace

TaskParams build_scenario(const ScenarioSpec& spec, const EnvConfig& env, std::uint64_t seed) {
  Rng rng(seed);
  auto west = [](const Vec3& p) { return p.x() < -0.25; };
  auto east = [](const Vec3& p) { return p.x() > 0.25; };
  auto anywhere = [](const Vec3&) { return true; };
  TaskParams task;
  switch (spec.name) {
    case ScenarioName::wall:
    case ScenarioName::narrow_gap:
    case ScenarioName::passage:
      task = place_starts(spec.obstacles, env, rng, west, east);
      break;
    case ScenarioName::obstacle_free:
      task = place_starts({}, env, rng, anywhere, anywhere);
      break;
    case ScenarioName::random:
      task = build_hidden(env, rng);
      break;
    case ScenarioName::uniform:
      task = sample_global(env, rng);
      break;
  }
  if (auto report = validate_task(task, env); !report.ok()) throw ValidationError(std::move(report));
  return task;
}

}  // namespace pursuit
