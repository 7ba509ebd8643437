#include "pursuit/pursuers.hpp"

#include <stdexcept>

namespace pursuit {

PolicyInput policy_input(const Env& env) {
  return {env.observations(), env.world().pursuer_positions(), env.detection(), env.step_count()};
}

void LastSeenTracker::reset() { *this = LastSeenTracker{}; }

void LastSeenTracker::update(const std::optional<Vec3>& detection, int tick) {
  now_ = tick;
  if (!detection) return;
  if (last_) {
    prev_ = last_;
    prev_tick_ = last_tick_;
  }
  last_ = detection;
  last_tick_ = tick;
}

double LastSeenTracker::staleness() const {
  if (!last_) return std::numeric_limits<double>::infinity();
  return static_cast<double>(now_ - last_tick_);
}

Vec3 LastSeenTracker::velocity_estimate(double dt) const {
  if (!last_ || !prev_ || last_tick_ <= prev_tick_) return Vec3::Zero();
  return (*last_ - *prev_) / (dt * (last_tick_ - prev_tick_));
}

namespace {

bool is_mask(const Eigen::Ref<const Eigen::Vector3d>& v, double mask) {
  return v.x() == mask && v.y() == mask && v.z() == mask;
}

Vec3 unit_or_zero(const Vec3& v) {
  const double n = v.norm();
  return n > 0.0 ? Vec3(v / n) : Vec3::Zero();
}

}  // namespace

LocalScene decode_scene(const Observation& obs, const EnvConfig& cfg) {
  LocalScene scene;
  for (Eigen::Index i = 0; i + 2 < obs.other.size(); i += 3) scene.teammates.push_back(obs.other.segment<3>(i));
  for (Eigen::Index i = 0; i + 2 < obs.obstacles.size(); i += 3)
    if (!is_mask(obs.obstacles.segment<3>(i), cfg.mask_value)) scene.obstacles.push_back(obs.obstacles.segment<3>(i));
  return scene;
}

Vec3 clamp_norm(const Vec3& v, double max_norm) {
  const double n = v.norm();
  return n > max_norm ? Vec3(v * (max_norm / n)) : v;
}

Vec3 angelani_velocity(const Vec3& self, const Vec3& target, const LocalScene& scene, const AngelaniConfig& cfg,
                       double obstacle_radius, double max_speed) {
  Vec3 dir = unit_or_zero(target - self);
  for (const Vec3& rel : scene.teammates) {
    const double d = rel.norm();
    if (d > 0.0 && d < cfg.repulse_radius) dir -= cfg.repulse_gain * (rel / d) / d;
  }
  for (const Vec3& rel : scene.obstacles) {
    const double d_center = rel.norm();
    const double d = std::max(d_center - obstacle_radius, 1e-3);
    if (d_center > 0.0 && d < cfg.repulse_radius) dir -= cfg.repulse_gain * (rel / d_center) / d;
  }
  return clamp_norm(max_speed * dir, max_speed);
}

Vec3 apf_velocity(const Vec3& self, const Vec3& target, const LocalScene& scene, const ApfConfig& cfg,
                  double obstacle_radius, double max_speed) {
  const double rho = cfg.influence_radius;
  Vec3 total = cfg.gain_attract * unit_or_zero(target - self);
  for (const Vec3& rel : scene.obstacles) {
    const double d_center = rel.norm();
    const double d = std::max(d_center - obstacle_radius, 1e-3);
    if (d_center > 0.0 && d < rho)
      total -= cfg.gain_repulse_obstacle * (rel / d_center) * (1.0 / d - 1.0 / rho) / (d * d);
  }
  for (const Vec3& rel : scene.teammates) {
    const double d = rel.norm();
    if (d > 0.0 && d < rho) total -= cfg.gain_inter * (rel / d) * (1.0 / d - 1.0 / rho);
  }
  return unit_or_zero(total) * max_speed;
}

Vec3 interception_point(const LastSeenTracker& tracker, double dt, double lookahead, const Vec3& fallback) {
  if (!tracker.last_known()) return fallback;
  return *tracker.last_known() + tracker.velocity_estimate(dt) * lookahead;
}

AngelaniPolicy::AngelaniPolicy(AngelaniConfig cfg, EnvConfig env) : cfg_(cfg), env_(env) {}

void AngelaniPolicy::reset(std::uint64_t) { tracker_.reset(); }

PolicyOutput AngelaniPolicy::act(const PolicyInput& input) {
  tracker_.update(input.detection, input.step);
  const Vec3 target = tracker_.last_known().value_or(arena_of(env_).center());
  PolicyOutput out;
  for (std::size_t i = 0; i < input.positions.size(); ++i)
    out.velocity.push_back(angelani_velocity(input.positions[i], target, decode_scene(input.observations[i], env_),
                                             cfg_, env_.obstacle_radius, env_.pursuer_max_speed));
  return out;
}

JanosovPolicy::JanosovPolicy(JanosovConfig cfg, EnvConfig env) : cfg_(cfg), env_(env) {}

void JanosovPolicy::reset(std::uint64_t seed) {
  tracker_.reset();
  prev_cmd_.clear();
  rng_.seed(seed);
}

PolicyOutput JanosovPolicy::act(const PolicyInput& input) {
  tracker_.update(input.detection, input.step);
  const Arena arena = arena_of(env_);
  const Vec3 target = interception_point(tracker_, env_.control_dt, cfg_.lookahead, arena.center());
  const double vmax = env_.pursuer_max_speed;
  if (prev_cmd_.size() != input.positions.size()) prev_cmd_.assign(input.positions.size(), Vec3::Zero());
  std::normal_distribution<double> noise(0.0, 1.0);

  PolicyOutput out;
  for (std::size_t i = 0; i < input.positions.size(); ++i) {
    const Vec3& p = input.positions[i];
    Vec3 desired = unit_or_zero(target - p) * vmax;

    // Soft walls: push back linearly inside the margin band.
    const double r = p.head<2>().norm();
    const double wall_depth = r - (arena.radius - cfg_.wall_margin);
    if (wall_depth > 0.0 && r > 0.0) desired.head<2>() -= cfg_.wall_gain * vmax * (wall_depth / cfg_.wall_margin) * p.head<2>() / r;
    if (p.z() < cfg_.wall_margin) desired.z() += cfg_.wall_gain * vmax * (cfg_.wall_margin - p.z()) / cfg_.wall_margin;
    if (p.z() > arena.height - cfg_.wall_margin)
      desired.z() -= cfg_.wall_gain * vmax * (p.z() - (arena.height - cfg_.wall_margin)) / cfg_.wall_margin;

    const LocalScene scene = decode_scene(input.observations[i], env_);
    for (const Vec3& rel : scene.teammates) {
      const double d = rel.norm();
      if (d > 0.0 && d < cfg_.repulse_radius) desired -= vmax * cfg_.repulse_gain * (rel / d) / d;
    }
    for (const Vec3& rel : scene.obstacles) {
      const double d_center = rel.norm();
      const double d = std::max(d_center - env_.obstacle_radius, 1e-3);
      if (d_center > 0.0 && d < cfg_.repulse_radius) desired -= vmax * cfg_.repulse_gain * (rel / d_center) / d;
    }
    if (cfg_.noise_sigma > 0.0)
      desired += cfg_.noise_sigma * Vec3(noise(rng_), noise(rng_), noise(rng_));

    const Vec3 cmd = clamp_norm(cfg_.smoothing * prev_cmd_[i] + (1.0 - cfg_.smoothing) * clamp_norm(desired, vmax), vmax);
    prev_cmd_[i] = cmd;
    out.velocity.push_back(cmd);
  }
  return out;
}

ApfPolicy::ApfPolicy(ApfConfig cfg, EnvConfig env) : cfg_(cfg), env_(env) {}

void ApfPolicy::reset(std::uint64_t) { tracker_.reset(); }

PolicyOutput ApfPolicy::act(const PolicyInput& input) {
  tracker_.update(input.detection, input.step);
  const Vec3 target = tracker_.last_known().value_or(arena_of(env_).center());
  PolicyOutput out;
  for (std::size_t i = 0; i < input.positions.size(); ++i)
    out.velocity.push_back(apf_velocity(input.positions[i], target, decode_scene(input.observations[i], env_), cfg_,
                                        env_.obstacle_radius, env_.pursuer_max_speed));
  return out;
}

std::vector<std::string> policy_names() { return {"angelani", "janosov", "apf", "idle", "hover"}; }

PolicyFactory make_policy_factory(const std::string& name, const PoliciesConfig& cfg, const EnvParts& parts) {
  const EnvConfig env = parts.env;
  if (name == "angelani") return [c = cfg.angelani, env] { return std::make_unique<AngelaniPolicy>(c, env); };
  if (name == "janosov") return [c = cfg.janosov, env] { return std::make_unique<JanosovPolicy>(c, env); };
  if (name == "apf") return [c = cfg.apf, env] { return std::make_unique<ApfPolicy>(c, env); };
  if (name == "idle") return [n = env.n_pursuers] { return std::make_unique<IdlePolicy>(n); };
  if (name == "hover") {
    const double fraction = parts.quad.mass * parts.quad.gravity / parts.quad.f_max;
    return [n = env.n_pursuers, fraction] { return std::make_unique<HoverPolicy>(n, fraction); };
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

StepResult apply_policy(Env& env, Policy& policy) {
  const PolicyOutput out = policy.act(policy_input(env));
  if (policy.kind() == ActionKind::ctbr) return env.step(out.ctbr);
  return env.step_velocity(out.velocity);
}

}  // namespace pursuit
