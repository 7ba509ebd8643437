#include "pursuit/world.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pursuit {

std::optional<Vec3> detect_evader(std::span<const Vec3> pursuers, const Vec3& evader, std::span<const Vec2> obstacles,
                                  double obstacle_radius) {
  for (const Vec3& p : pursuers)
    if (line_of_sight(p, evader, obstacles, obstacle_radius)) return evader;
  return std::nullopt;
}

Eigen::VectorXd Observation::flat() const {
  Eigen::VectorXd out(self.size() + other.size() + obstacles.size());
  out << self, other, obstacles;
  return out;
}

ObservationLayout ObservationLayout::of(const EnvConfig& cfg) {
  return {4 + 3 + 3 + 3 * cfg.prediction_horizon, 3 * (cfg.n_pursuers - 1), 3 * cfg.k_nearest_obstacles};
}

std::vector<LayoutEntry> ObservationLayout::entries(const EnvConfig& cfg) const {
  std::vector<LayoutEntry> out;
  int at = 0;
  auto push = [&](std::string name, int len) {
    out.push_back({std::move(name), at, len});
    at += len;
  };
  push("self.quaternion_wxyz", 4);
  push("self.velocity", 3);
  push("self.evader_relative", 3);
  for (int k = 0; k < cfg.prediction_horizon; ++k) push("self.predicted_relative." + std::to_string(k + 1), 3);
  for (int j = 0; j + 1 < cfg.n_pursuers; ++j) push("other." + std::to_string(j), 3);
  for (int j = 0; j < cfg.k_nearest_obstacles; ++j) push("obstacle." + std::to_string(j), 3);
  return out;
}

std::vector<std::size_t> nearest_obstacles(const Vec3& p, std::span<const Vec2> obstacles, int k) {
  std::vector<std::size_t> order(obstacles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i) dist[i] = horizontal_distance(p, obstacles[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  return order;
}

Vec3List WorldState::pursuer_positions() const {
  Vec3List out;
  out.reserve(pursuers.size());
  for (const auto& s : pursuers) out.push_back(s.p);
  return out;
}

Observation build_observation(std::size_t index, const WorldState& world, const std::optional<Vec3>& detection,
                              const Vec3List& predicted_track, const EnvConfig& cfg) {
  if (static_cast<int>(predicted_track.size()) != cfg.prediction_horizon)
    throw std::invalid_argument("build_observation: predicted track must have K entries");
  const ObservationLayout layout = ObservationLayout::of(cfg);
  const QuadStated& me = world.pursuers.at(index);

  Observation obs;
  obs.self.resize(layout.self_dim);
  obs.self.head<4>() << me.q.w(), me.q.x(), me.q.y(), me.q.z();
  obs.self.segment<3>(4) = me.v;
  obs.self.segment<3>(7) = detection ? Vec3(*detection - me.p) : Vec3::Constant(cfg.mask_value);
  for (int k = 0; k < cfg.prediction_horizon; ++k) obs.self.segment<3>(10 + 3 * k) = predicted_track[k] - me.p;

  obs.other.resize(layout.other_dim);
  Eigen::Index at = 0;
  for (std::size_t j = 0; j < world.pursuers.size(); ++j) {
    if (j == index) continue;
    obs.other.segment<3>(at) = world.pursuers[j].p - me.p;
    at += 3;
  }

  obs.obstacles = Eigen::VectorXd::Constant(layout.obstacle_dim, cfg.mask_value);
  const auto nearest = nearest_obstacles(me.p, world.obstacles, cfg.k_nearest_obstacles);
  for (std::size_t j = 0; j < nearest.size(); ++j) {
    const Vec2& c = world.obstacles[nearest[j]];
    obs.obstacles.segment<3>(3 * j) = Vec3(c.x() - me.p.x(), c.y() - me.p.y(), 0.0);
  }
  return obs;
}

bool is_captured(std::span<const Vec3> pursuers, const Vec3& evader, double capture_radius) {
  return std::any_of(pursuers.begin(), pursuers.end(),
                     [&](const Vec3& p) { return (p - evader).norm() <= capture_radius; });
}

RewardComponents compute_reward(const WorldState& world, int collisions, std::span<const Vec4> actions,
                                std::span<const Vec4> prev_actions, const EnvConfig& cfg, RewardStage stage) {
  if (actions.size() != prev_actions.size()) throw std::invalid_argument("compute_reward: action shape mismatch");
  const Vec3List positions = world.pursuer_positions();
  RewardComponents r;
  r.capture = is_captured(positions, world.evader_p, cfg.capture_radius) ? 6.0 : 0.0;

  double dist_sum = 0.0;
  for (const Vec3& p : positions) dist_sum += (p - world.evader_p).norm();
  r.distance = positions.empty() ? 0.0 : -0.1 * dist_sum / static_cast<double>(positions.size());

  r.collision = -10.0 * collisions;

  if (stage == RewardStage::two && !actions.empty()) {
    double smooth = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) smooth += std::exp(-(actions[i] - prev_actions[i]).norm());
    r.smoothness = 2.0 * smooth / static_cast<double>(actions.size());
  }
  r.total = r.capture + r.distance + r.collision + r.smoothness;
  return r;
}

namespace {

/// Clamps the pursuer into the arena and removes the outward velocity component.
bool clip_pursuer(QuadStated& s, const Arena& arena) {
  const Vec3 before = s.p;
  if (!arena.clip(s.p)) return false;
  const Vec3 pushed = s.p - before;
  const Vec3 normal = pushed.normalized();
  const double outward = s.v.dot(-normal);
  if (outward > 0.0) s.v += outward * normal;
  return true;
}

int count_collisions(const WorldState& world, const std::vector<bool>& clipped, const EnvConfig& cfg) {
  const Arena arena = arena_of(cfg);
  int count = 0;
  for (std::size_t i = 0; i < world.pursuers.size(); ++i) {
    const Vec3& p = world.pursuers[i].p;
    bool hit = clipped[i] || !arena.contains(p, cfg.clearance);
    for (const Vec2& c : world.obstacles)
      hit = hit || horizontal_distance(p, c) < cfg.obstacle_radius + cfg.clearance;
    for (std::size_t j = 0; j < world.pursuers.size() && !hit; ++j)
      hit = j != i && (p - world.pursuers[j].p).norm() < cfg.clearance;
    count += hit ? 1 : 0;
  }
  return count;
}

}  // namespace

Env::Env(EnvParts parts, PredictorKind predictor) : parts_(std::move(parts)), predictor_kind_(predictor) {
  parts_.env.validate();
  parts_.evader.validate();
  parts_.quad.validate();
  if (!parts_.pid.valid()) throw std::invalid_argument("control: invalid rate PID configuration");
  if (predictor_kind_ == PredictorKind::constant_velocity)
    predictor_ = std::make_shared<ConstantVelocityPredictor>(parts_.env.prediction_horizon, parts_.env.control_dt,
                                                             arena_of(parts_.env));
}

void Env::set_predictor(std::shared_ptr<const Predictor> predictor) {
  if (predictor && predictor->horizon() != parts_.env.prediction_horizon)
    throw std::invalid_argument("predictor horizon does not match prediction_horizon");
  predictor_ = std::move(predictor);
  predictor_kind_ = PredictorKind::none;
  if (!done_ || !log_.empty()) refresh_perception();
}

void Env::rebuild_oracle() {
  const EnvConfig& cfg = parts_.env;
  predictor_ = std::make_shared<OraclePredictor>(cfg.prediction_horizon, cfg.control_dt, arena_of(cfg),
                                                 task_.obstacles, cfg.obstacle_radius, parts_.evader);
}

std::vector<Observation> Env::reset(const TaskParams& task, std::uint64_t seed) {
  const EnvConfig& cfg = parts_.env;
  if (auto report = validate_task(task, cfg); !report.ok()) throw ValidationError(std::move(report));

  task_ = task;
  rng_.seed(seed);
  world_ = WorldState{};
  world_.obstacles = task.obstacles;
  const double hover = parts_.quad.hover_rotor_speed();
  for (const Vec3& start : task.pursuer_starts) {
    QuadStated s;
    s.p = start;
    s.rotor_speeds.setConstant(hover);
    world_.pursuers.push_back(s);
  }
  world_.evader_p = task.evader_start;
  world_.evader_v.setZero();
  // Only used while the resultant force vanishes.
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  const double a = angle(rng_);
  world_.evader_heading = Vec3(std::cos(a), std::sin(a), 0.0);

  pid_.assign(task.pursuer_starts.size(), PidState{});
  const double hover_fraction = parts_.quad.mass * parts_.quad.gravity / parts_.quad.f_max;
  prev_actions_.assign(task.pursuer_starts.size(), Vec4(hover_fraction, 0.0, 0.0, 0.0));
  total_collisions_ = 0;
  captured_ = false;
  done_ = false;
  log_.clear();
  if (predictor_kind_ == PredictorKind::oracle) rebuild_oracle();
  refresh_perception();
  return observations_;
}

void Env::refresh_perception() {
  const EnvConfig& cfg = parts_.env;
  const Vec3List positions = world_.pursuer_positions();
  detection_ = detect_evader(positions, world_.evader_p, world_.obstacles, cfg.obstacle_radius);

  if (log_.empty() || log_.back().tick != world_.step)
    log_.push_back({positions, world_.evader_p, world_.evader_v, world_.step, detection_.has_value()});

  if (predictor_) {
    const HistoryWindow window =
        window_ending_at(log_, log_.size() - 1, cfg.history_length, cfg.mask_value, predictor_->privileged());
    Prediction pred = predictor_->predict(window);
    predicted_ = std::move(pred.positions);
    prediction_fallback_ = pred.fallback;
  } else {
    predicted_ = fallback_prediction(arena_of(cfg), cfg.prediction_horizon).positions;
    prediction_fallback_ = true;
  }

  observations_.clear();
  for (std::size_t i = 0; i < world_.pursuers.size(); ++i)
    observations_.push_back(build_observation(i, world_, detection_, predicted_, cfg));
}

template <typename Advance>
StepResult Env::advance(std::size_t arity, std::span<const Vec4> action_vectors, Advance&& move_pursuers) {
  if (done_) throw std::logic_error("step called on a finished episode; call reset first");
  if (arity != world_.pursuers.size())
    throw std::invalid_argument("expected " + std::to_string(world_.pursuers.size()) + " actions, got " +
                                std::to_string(arity));
  const EnvConfig& cfg = parts_.env;
  const Arena arena = arena_of(cfg);

  // (1) evader reacts to the current pursuer positions
  const Vec3List before = world_.pursuer_positions();
  const Vec3 force =
      evader_force(world_.evader_p, before, ObstacleField{world_.obstacles, cfg.obstacle_radius}, arena, parts_.evader);
  const EvaderMotion motion = evader_step(world_.evader_p, world_.evader_heading, force, cfg.control_dt, arena,
                                          parts_.evader);
  world_.evader_v = (motion.position - world_.evader_p) / cfg.control_dt;
  world_.evader_p = motion.position;
  world_.evader_heading = motion.heading;

  // (2) pursuers
  bool failed = false;
  std::vector<bool> clipped(world_.pursuers.size(), false);
  for (std::size_t i = 0; i < world_.pursuers.size(); ++i) {
    QuadStated next = world_.pursuers[i];
    if (!move_pursuers(i, next)) {
      failed = true;
      continue;  // keep the last finite state
    }
    clipped[i] = clip_pursuer(next, arena);
    world_.pursuers[i] = next;
  }
  ++world_.step;

  // (3) perception
  refresh_perception();

  // (4) reward
  const int collisions = count_collisions(world_, clipped, cfg);
  total_collisions_ += collisions;
  StepResult result;
  result.reward = compute_reward(world_, collisions, action_vectors, prev_actions_, cfg, cfg.reward_stage);
  prev_actions_.assign(action_vectors.begin(), action_vectors.end());

  // (5) termination
  captured_ = !failed && is_captured(world_.pursuer_positions(), world_.evader_p, cfg.capture_radius);
  done_ = captured_ || failed || world_.step >= cfg.max_steps;

  result.observations = observations_;
  result.done = done_;
  result.info.capture_step = captured_ ? std::optional<int>(world_.step) : std::nullopt;
  result.info.collisions = collisions;
  result.info.total_collisions = total_collisions_;
  result.info.evader_detected = detection_.has_value();
  result.info.failed = failed;
  result.info.prediction_fallback = prediction_fallback_;
  return result;
}

StepResult Env::step(std::span<const CtbrCommand> actions) {
  Vec4List vectors;
  vectors.reserve(actions.size());
  for (const auto& a : actions) vectors.push_back(a.clamped().as_vector());
  const double dt = parts_.env.physics_dt();
  return advance(actions.size(), vectors, [&](std::size_t i, QuadStated& s) {
    const auto control = ctbr_to_rotor_cmd(actions[i], s, pid_[i], parts_.quad, parts_.pid, parts_.env.control_dt);
    pid_[i] = control.pid;
    for (int sub = 0; sub < parts_.env.physics_substeps; ++sub) {
      const auto out = integrate(s, control.rotor_cmd, dt, parts_.quad);
      if (!out.finite) return false;
      s = out.state;
    }
    return true;
  });
}

StepResult Env::step_velocity(std::span<const Vec3> velocities) {
  Vec4List vectors;
  vectors.reserve(velocities.size());
  for (const auto& v : velocities) vectors.push_back(Vec4(v.x(), v.y(), v.z(), 0.0));
  const EnvConfig& cfg = parts_.env;
  return advance(velocities.size(), vectors, [&](std::size_t i, QuadStated& s) {
    if (!velocities[i].allFinite()) return false;
    s = velocity_to_motion(velocities[i], s, cfg.pursuer_max_speed, cfg.control_dt, cfg.velocity_lag_tau);
    return is_finite(s);
  });
}

}  // namespace pursuit
