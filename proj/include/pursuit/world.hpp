#pragma once

// The pursuit-evasion environment: arena, occlusion-based detection shared
// across the team, per-pursuer observations, team reward and episode stepping.

#include "pursuit/config.hpp"
#include "pursuit/control.hpp"
#include "pursuit/dynamics.hpp"
#include "pursuit/evader.hpp"
#include "pursuit/predictor.hpp"
#include "pursuit/task.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pursuit {

/// Evader position if at least one pursuer has an unobstructed line of sight.
std::optional<Vec3> detect_evader(std::span<const Vec3> pursuers, const Vec3& evader, std::span<const Vec2> obstacles,
                                  double obstacle_radius);

/// Per-pursuer observation. Layout of `self`: quaternion (w, x, y, z),
/// linear velocity, evader position relative to self (mask triple when
/// undetected), then K predicted evader positions relative to self.
/// `other` holds relative positions of teammates in index order; `obstacles`
/// the k nearest obstacle centres (at own altitude), padded with mask triples.
struct Observation {
  Eigen::VectorXd self;
  Eigen::VectorXd other;
  Eigen::VectorXd obstacles;

  Eigen::VectorXd flat() const;
};

struct LayoutEntry {
  std::string name;
  int offset = 0;
  int length = 0;
};

struct ObservationLayout {
  int self_dim = 0;
  int other_dim = 0;
  int obstacle_dim = 0;

  int total() const { return self_dim + other_dim + obstacle_dim; }
  static ObservationLayout of(const EnvConfig& cfg);
  /// Index table of the flattened observation.
  std::vector<LayoutEntry> entries(const EnvConfig& cfg) const;
};

/// Indices of the k nearest obstacles by horizontal distance, ties by index.
std::vector<std::size_t> nearest_obstacles(const Vec3& p, std::span<const Vec2> obstacles, int k);

struct WorldState {
  std::vector<QuadStated, Eigen::aligned_allocator<QuadStated>> pursuers;
  Vec3 evader_p = Vec3::Zero();
  Vec3 evader_v = Vec3::Zero();
  Vec3 evader_heading = Vec3::UnitX();
  std::vector<Vec2> obstacles;
  int step = 0;

  Vec3List pursuer_positions() const;
};

Observation build_observation(std::size_t index, const WorldState& world, const std::optional<Vec3>& detection,
                              const Vec3List& predicted_track, const EnvConfig& cfg);

struct RewardComponents {
  double capture = 0.0;
  double distance = 0.0;
  double collision = 0.0;
  double smoothness = 0.0;
  double total = 0.0;

  bool operator==(const RewardComponents&) const = default;
};

/// Team reward for the post-step world. `collisions` counts violating
/// pursuers this tick; actions are the (F, wx, wy, wz) vectors of this and
/// the previous tick.
RewardComponents compute_reward(const WorldState& world, int collisions, std::span<const Vec4> actions,
                                std::span<const Vec4> prev_actions, const EnvConfig& cfg, RewardStage stage);

bool is_captured(std::span<const Vec3> pursuers, const Vec3& evader, double capture_radius);

struct StepInfo {
  std::optional<int> capture_step;
  int collisions = 0;        // this tick
  int total_collisions = 0;  // episode so far
  bool evader_detected = false;
  bool failed = false;  // non-finite dynamics ended the episode
  bool prediction_fallback = false;
};

struct StepResult {
  std::vector<Observation> observations;
  RewardComponents reward;
  bool done = false;
  StepInfo info;
};

struct EnvParts {
  EnvConfig env;
  QuadParamsd quad = QuadParamsd::crazyflie();
  RatePidConfig pid;
  EvaderConfig evader;
};

enum class PredictorKind { constant_velocity, oracle, none };

class Env {
 public:
  explicit Env(EnvParts parts, PredictorKind predictor = PredictorKind::constant_velocity);

  /// Validates the task (throws ValidationError) and places every entity.
  std::vector<Observation> reset(const TaskParams& task, std::uint64_t seed);

  /// One control tick with CTBR actions, one per pursuer.
  StepResult step(std::span<const CtbrCommand> actions);
  /// One control tick with point-mass velocity commands, one per pursuer.
  StepResult step_velocity(std::span<const Vec3> velocities);

  /// Replaces the predictor; a null pointer disables prediction (track filled with the fallback).
  void set_predictor(std::shared_ptr<const Predictor> predictor);

  const EnvParts& parts() const { return parts_; }
  const EnvConfig& config() const { return parts_.env; }
  const WorldState& world() const { return world_; }
  const TaskParams& task() const { return task_; }
  const std::optional<Vec3>& detection() const { return detection_; }
  const Vec3List& predicted_track() const { return predicted_; }
  const std::vector<Observation>& observations() const { return observations_; }
  const TrajectoryLog& log() const { return log_; }
  bool done() const { return done_; }
  bool captured() const { return captured_; }
  int step_count() const { return world_.step; }
  int total_collisions() const { return total_collisions_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  template <typename Advance>
  StepResult advance(std::size_t arity, std::span<const Vec4> action_vectors, Advance&& move_pursuers);
  void refresh_perception();
  void rebuild_oracle();

  EnvParts parts_;
  PredictorKind predictor_kind_;
  std::shared_ptr<const Predictor> predictor_;
  TaskParams task_;
  WorldState world_;
  std::vector<PidState> pid_;
  Vec4List prev_actions_;
  std::optional<Vec3> detection_;
  Vec3List predicted_;
  bool prediction_fallback_ = false;
  std::vector<Observation> observations_;
  TrajectoryLog log_;
  std::mt19937_64 rng_;
  bool done_ = true;
  bool captured_ = false;
  int total_collisions_ = 0;
};

}  // namespace pursuit
