#pragma once

// Evaluation protocol: episode rollouts fanned out over a worker pool,
// capture/collision metrics reported as mean (std across seeds), the capture
// radius sweep, hyperparameter grid search, trajectory export and a
// throughput benchmark.

#include "pursuit/pursuers.hpp"
#include "pursuit/scenarios.hpp"
#include "pursuit/world.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pursuit {

struct EpisodeOutcome {
  std::optional<int> capture_step;
  int length = 0;
  int collisions = 0;
  bool error = false;
};

struct SeedMetrics {
  double capture_rate = 0.0;
  double capture_step = 0.0;
  double collision_rate = 0.0;
  int episodes = 0;
  int errors = 0;

  bool operator==(const SeedMetrics&) const = default;
};

struct Metrics {
  double capture_rate = 0.0;
  double capture_rate_std = 0.0;
  double capture_step = 0.0;
  double capture_step_std = 0.0;
  double collision_rate = 0.0;
  double collision_rate_std = 0.0;
  int episodes = 0;
  int errors = 0;
  std::vector<SeedMetrics> per_seed;

  bool operator==(const Metrics&) const = default;
};

/// Capture rate, mean capture step (failures count as max_steps) and mean
/// per-episode collisions divided by episode length.
SeedMetrics summarize_episodes(std::span<const EpisodeOutcome> episodes, int max_steps);

/// Mean and population standard deviation of the per-seed values.
Metrics aggregate(std::span<const SeedMetrics> seeds);

/// "mean(std)" with the given precision.
std::string format_mean_std(double mean, double std, int precision = 3);

struct EvaluateOptions {
  int episodes_per_seed = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int workers = 1;
};

using TaskSource = std::function<TaskParams(std::uint64_t episode_seed)>;

/// Seed of episode `episode` under evaluation seed `seed`.
std::uint64_t episode_seed(std::uint64_t seed, int episode);

EpisodeOutcome run_episode(Env& env, Policy& policy, const TaskParams& task, std::uint64_t seed);

Metrics evaluate(const PolicyFactory& factory, const TaskSource& tasks, const EnvParts& parts,
                 const EvaluateOptions& options);
Metrics evaluate(const PolicyFactory& factory, const ScenarioSpec& spec, const EnvParts& parts,
                 const EvaluateOptions& options);

struct RadiusRow {
  double radius = 0.0;
  Metrics metrics;
};

/// Obstacle-free evaluation at each capture radius. Start positions are
/// shared across radii: they are sampled once with the separation required
/// by the largest non-degenerate radius.
std::vector<RadiusRow> radius_sweep(const PolicyFactory& factory, const EnvParts& parts, std::span<const double> radii,
                                    const EvaluateOptions& options);

using ParamPoint = std::map<std::string, double>;
using PolicyFamily = std::function<PolicyFactory(const ParamPoint&)>;

struct GridRow {
  ParamPoint params;
  Metrics metrics;
};

struct GridResult {
  std::vector<GridRow> table;
  std::size_t best = 0;
};

/// Cartesian product of the grid, in key order with the last key varying fastest.
std::vector<ParamPoint> expand_grid(const std::map<std::string, std::vector<double>>& grid);

/// Highest capture rate; ties broken by lower capture step, then lower collision rate.
std::size_t select_best(std::span<const GridRow> rows);

GridResult grid_search(const PolicyFamily& family, const std::map<std::string, std::vector<double>>& grid,
                       const ScenarioSpec& spec, const EnvParts& parts, const EvaluateOptions& options);

struct TickTrace {
  int tick = 0;
  std::vector<QuadStated, Eigen::aligned_allocator<QuadStated>> pursuers;
  Vec3 evader_p = Vec3::Zero();
  Vec3 evader_v = Vec3::Zero();
  bool detected = false;
  RewardComponents reward;
  Vec4List actions;
};

struct EpisodeTrace {
  TaskParams task;
  std::uint64_t seed = 0;
  ActionKind action_kind = ActionKind::velocity;
  std::vector<TickTrace> ticks;
  EpisodeOutcome outcome;
};

EpisodeTrace record_episode(Env& env, Policy& policy, const TaskParams& task, std::uint64_t seed);

inline constexpr int kTrajectorySchemaVersion = 1;

/// JSONL: a header line, then one line per tick of every episode.
void export_trajectories(std::span<const EpisodeTrace> episodes, const std::filesystem::path& path);

struct TraceLine {
  int episode = 0;
  int tick = 0;
  RewardComponents reward;
};

/// Reads back the per-tick lines of an export (header checked for the schema version).
std::vector<TraceLine> read_trajectory_rewards(const std::filesystem::path& path);

struct BenchReport {
  int envs = 0;
  int workers = 0;
  long long ticks = 0;
  double seconds = 0.0;
  double ticks_per_second() const { return seconds > 0 ? ticks / seconds : 0.0; }
};

/// Steps `envs` CTBR environments for `steps` ticks each under a hover policy.
BenchReport run_bench(const EnvParts& parts, int envs, int steps, int workers, std::uint64_t seed);

}  // namespace pursuit
