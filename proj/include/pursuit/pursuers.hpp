#pragma once

// Policy interface shared by native heuristics and external policies, the
// last-seen evader memory, and the three point-mass heuristic baselines.

#include "pursuit/config.hpp"
#include "pursuit/world.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pursuit {

enum class ActionKind { ctbr, velocity };

/// What a team policy sees each tick: the per-pursuer observations plus own
/// absolute positions and the team's shared detection.
struct PolicyInput {
  std::span<const Observation> observations;
  Vec3List positions;
  std::optional<Vec3> detection;
  int step = 0;
};

PolicyInput policy_input(const Env& env);

struct PolicyOutput {
  std::vector<CtbrCommand> ctbr;
  Vec3List velocity;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionKind kind() const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual PolicyOutput act(const PolicyInput& input) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

/// Remembers the most recent detected evader position; never invents one.
class LastSeenTracker {
 public:
  void reset();
  void update(const std::optional<Vec3>& detection, int tick);

  const std::optional<Vec3>& last_known() const { return last_; }
  /// Ticks since the last detection; +inf if never detected.
  double staleness() const;
  /// Finite-difference velocity from the two most recent detections, zero if unavailable.
  Vec3 velocity_estimate(double dt) const;

 private:
  std::optional<Vec3> last_;
  std::optional<Vec3> prev_;
  int last_tick_ = 0;
  int prev_tick_ = 0;
  int now_ = 0;
};

/// Relative positions decoded from an observation, mask padding removed.
struct LocalScene {
  Vec3List teammates;  // relative to self
  Vec3List obstacles;  // relative to self, obstacle centres
};

LocalScene decode_scene(const Observation& obs, const EnvConfig& cfg);

Vec3 clamp_norm(const Vec3& v, double max_norm);

Vec3 angelani_velocity(const Vec3& self, const Vec3& target, const LocalScene& scene, const AngelaniConfig& cfg,
                       double obstacle_radius, double max_speed);

Vec3 apf_velocity(const Vec3& self, const Vec3& target, const LocalScene& scene, const ApfConfig& cfg,
                  double obstacle_radius, double max_speed);

/// Chase target for the interception heuristic: last-known position led by the
/// estimated evader velocity over the lookahead.
Vec3 interception_point(const LastSeenTracker& tracker, double dt, double lookahead, const Vec3& fallback);

class AngelaniPolicy final : public Policy {
 public:
  AngelaniPolicy(AngelaniConfig cfg, EnvConfig env);
  ActionKind kind() const override { return ActionKind::velocity; }
  void reset(std::uint64_t seed) override;
  PolicyOutput act(const PolicyInput& input) override;

 private:
  AngelaniConfig cfg_;
  EnvConfig env_;
  LastSeenTracker tracker_;
};

class JanosovPolicy final : public Policy {
 public:
  JanosovPolicy(JanosovConfig cfg, EnvConfig env);
  ActionKind kind() const override { return ActionKind::velocity; }
  void reset(std::uint64_t seed) override;
  PolicyOutput act(const PolicyInput& input) override;
  const LastSeenTracker& tracker() const { return tracker_; }

 private:
  JanosovConfig cfg_;
  EnvConfig env_;
  LastSeenTracker tracker_;
  Vec3List prev_cmd_;
  std::mt19937_64 rng_;
};

class ApfPolicy final : public Policy {
 public:
  ApfPolicy(ApfConfig cfg, EnvConfig env);
  ActionKind kind() const override { return ActionKind::velocity; }
  void reset(std::uint64_t seed) override;
  PolicyOutput act(const PolicyInput& input) override;

 private:
  ApfConfig cfg_;
  EnvConfig env_;
  LastSeenTracker tracker_;
};

/// Zero-velocity pursuers.
class IdlePolicy final : public Policy {
 public:
  explicit IdlePolicy(int n_pursuers) : n_(n_pursuers) {}
  ActionKind kind() const override { return ActionKind::velocity; }
  void reset(std::uint64_t) override {}
  PolicyOutput act(const PolicyInput&) override { return {{}, Vec3List(n_, Vec3::Zero())}; }

 private:
  int n_;
};

/// Constant CTBR hover command for every pursuer.
class HoverPolicy final : public Policy {
 public:
  HoverPolicy(int n_pursuers, double hover_fraction) : n_(n_pursuers), hover_(hover_fraction) {}
  ActionKind kind() const override { return ActionKind::ctbr; }
  void reset(std::uint64_t) override {}
  PolicyOutput act(const PolicyInput&) override {
    return {std::vector<CtbrCommand>(n_, CtbrCommand{hover_, Vec3::Zero()}), {}};
  }

 private:
  int n_;
  double hover_;
};

struct PoliciesConfig {
  AngelaniConfig angelani;
  JanosovConfig janosov;
  ApfConfig apf;
};

/// Known names: angelani, janosov, apf, idle, hover.
PolicyFactory make_policy_factory(const std::string& name, const PoliciesConfig& cfg, const EnvParts& parts);
std::vector<std::string> policy_names();

/// Applies a policy's output to the environment with the matching step call.
StepResult apply_policy(Env& env, Policy& policy);

}  // namespace pursuit
