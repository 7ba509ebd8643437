#pragma once

#include "pursuit/control.hpp"
#include "pursuit/dynamics.hpp"

#include <cstdint>
#include <string>

namespace pursuit {

enum class RewardStage { one, two };

struct EnvConfig {
  double arena_radius = 0.9;
  double arena_height = 1.2;
  int n_pursuers = 3;
  double obstacle_radius = 0.1;
  double obstacle_height = 1.2;
  int min_obstacles = 4;
  int max_obstacles = 5;
  double capture_radius = 0.3;
  double clearance = 0.07;
  int max_steps = 800;
  double pursuer_max_speed = 1.0;
  double evader_speed = 1.3;
  int k_nearest_obstacles = 3;
  double mask_value = -5.0;
  double gamma = 0.99;  // consumed only by external trainers
  RewardStage reward_stage = RewardStage::one;
  int prediction_horizon = 5;
  int history_length = 10;

  double control_dt = 0.01;
  int physics_substeps = 2;
  double velocity_lag_tau = 0.15;

  double physics_dt() const { return control_dt / physics_substeps; }
  double evader_start_altitude() const { return arena_height / 2; }

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

struct EvaderConfig {
  double w_pursuer = 1.0;
  double w_obstacle = 0.5;
  double w_boundary = 0.5;
  double eps_dist = 0.05;
  double speed = 1.3;
  bool planar = false;  // hold altitude instead of moving in 3D

  void validate() const;
};

struct ApfConfig {
  double gain_attract = 1.0;
  double gain_repulse_obstacle = 0.05;
  double gain_inter = 0.05;
  double influence_radius = 0.3;
};

struct AngelaniConfig {
  double repulse_gain = 0.02;
  double repulse_radius = 0.2;
};

struct JanosovConfig {
  double lookahead = 0.5;  // s
  double smoothing = 0.8;  // weight of the previous command in the low-pass
  double noise_sigma = 0.0;
  double wall_margin = 0.15;
  double wall_gain = 0.5;
  double repulse_gain = 0.02;
  double repulse_radius = 0.2;
};

struct CurriculumConfig {
  double expand_probability = 0.7;
  double sigma_min = 0.5;
  double sigma_max = 0.9;
  double delta = 0.15;
  int batch_size = 32;
  int archive_cap = 512;
  int eval_episodes_per_task = 10;
  int reevaluate_after = 10;  // iterations

  void validate() const;
};

}  // namespace pursuit
