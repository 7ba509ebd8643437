#pragma once

// Flat numeric boundary for foreign callers: environments addressed by handle,
// observations as (n_pursuers, obs_dim) row-major arrays, actions as
// (n_pursuers, 4). Also the stepwise curriculum session and a machine-readable
// observation layout descriptor.

#include "pursuit/config_io.hpp"
#include "pursuit/curriculum.hpp"
#include "pursuit/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pursuit {

inline constexpr int kFlatApiVersion = 1;

using FlatMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Flattened observations, one row per pursuer.
FlatMatrix flatten_observations(std::span<const Observation> observations);

/// Layout descriptor: api version, obs_dim and the index table.
nlohmann::json layout_descriptor(const EnvConfig& cfg);

struct FlatStep {
  FlatMatrix observations;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;  // capture_step (-1 if none), collisions, total_collisions, detected, failed
};

class FlatEnv {
 public:
  /// Throws ConfigError naming the offending field.
  explicit FlatEnv(const nlohmann::json& config);

  int n_pursuers() const { return env_.config().n_pursuers; }
  int obs_dim() const { return obs_dim_; }

  /// `scenario_or_task` is a scenario name (string) or a task object.
  FlatMatrix reset(const nlohmann::json& scenario_or_task, std::uint64_t seed);
  /// `actions` is row-major (n_pursuers, 4): thrust fraction then body rates.
  /// A wrong shape or non-finite value throws before any state changes.
  FlatStep step(std::span<const double> actions, int rows, int cols);

  const Env& native() const { return env_; }

 private:
  Env env_;
  int obs_dim_;
};

/// Steps every handle once; actions are stacked row-major (handles * n_pursuers, 4).
std::vector<FlatStep> step_batch(std::span<FlatEnv* const> envs, std::span<const double> actions, int workers = 1);

/// External-trainer seam over CurriculumRunner.
class CurriculumSession {
 public:
  CurriculumSession(const nlohmann::json& config, std::uint64_t seed);

  /// Task batch of the next iteration as JSON objects. Throws if the
  /// previous batch is still awaiting results.
  std::vector<nlohmann::json> next_batch();
  std::uint64_t task_seed(std::size_t index) const { return runner_.task_seed(index); }
  IterationStats submit(std::span<const double> success_rates);
  const Archive& archive() const { return runner_.archive(); }
  int iteration() const { return runner_.iteration(); }
  int eval_episodes() const { return runner_.config().eval_episodes_per_task; }

 private:
  CurriculumRunner runner_;
};

}  // namespace pursuit

extern "C" {

typedef struct pursuit_env pursuit_env;

/// Error text of the last failed call on this thread.
const char* pursuit_last_error(void);
int pursuit_api_version(void);

/// Returns null on failure.
pursuit_env* pursuit_env_create(const char* config_json);
void pursuit_env_destroy(pursuit_env* env);
int pursuit_env_obs_dim(const pursuit_env* env);
int pursuit_env_n_pursuers(const pursuit_env* env);

/// `target` is a scenario name or a task JSON object. `obs_out` holds
/// n_pursuers * obs_dim doubles. Returns 0 on success.
int pursuit_env_reset(pursuit_env* env, const char* target, uint64_t seed, double* obs_out);

/// `info_out` receives capture_step, collisions, total_collisions, detected, failed.
int pursuit_env_step(pursuit_env* env, const double* actions, int rows, int cols, double* obs_out, double* reward_out,
                     int* done_out, double* info_out);
}
