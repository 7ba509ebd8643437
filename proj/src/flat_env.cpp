#include "pursuit/flat_env.hpp"

#include "pursuit/parallel.hpp"
#include "pursuit/scenarios.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pursuit {

FlatMatrix flatten_observations(std::span<const Observation> observations) {
  if (observations.empty()) return FlatMatrix(0, 0);
  const Eigen::Index dim = observations.front().flat().size();
  FlatMatrix out(static_cast<Eigen::Index>(observations.size()), dim);
  for (std::size_t i = 0; i < observations.size(); ++i) out.row(i) = observations[i].flat().transpose();
  return out;
}

nlohmann::json layout_descriptor(const EnvConfig& cfg) {
  const ObservationLayout layout = ObservationLayout::of(cfg);
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& e : layout.entries(cfg)) fields.push_back({{"name", e.name}, {"offset", e.offset}, {"length", e.length}});
  return {{"api_version", kFlatApiVersion},
          {"obs_dim", layout.total()},
          {"n_pursuers", cfg.n_pursuers},
          {"mask_value", cfg.mask_value},
          {"action", {"thrust_fraction", "roll_rate", "pitch_rate", "yaw_rate"}},
          {"fields", fields}};
}

namespace {

EnvParts parts_from(const nlohmann::json& config) { return config_from_json(config).parts; }

}  // namespace

FlatEnv::FlatEnv(const nlohmann::json& config)
    : env_(parts_from(config)), obs_dim_(ObservationLayout::of(env_.config()).total()) {}

FlatMatrix FlatEnv::reset(const nlohmann::json& scenario_or_task, std::uint64_t seed) {
  TaskParams task;
  if (scenario_or_task.is_string()) {
    const auto name = parse_scenario(scenario_or_task.get<std::string>());
    if (!name) throw std::invalid_argument("unknown scenario '" + scenario_or_task.get<std::string>() + "'");
    task = build_scenario(make_scenario(*name), env_.config(), seed);
  } else {
    task = task_from_json(scenario_or_task);
  }
  return flatten_observations(env_.reset(task, seed));
}

FlatStep FlatEnv::step(std::span<const double> actions, int rows, int cols) {
  if (rows != n_pursuers() || cols != 4 || actions.size() != static_cast<std::size_t>(rows) * 4)
    throw std::invalid_argument("actions must have shape (" + std::to_string(n_pursuers()) + ", 4), got (" +
                                std::to_string(rows) + ", " + std::to_string(cols) + ")");
  for (double a : actions)
    if (!std::isfinite(a)) throw std::invalid_argument("actions must be finite");
  if (env_.done()) throw std::logic_error("episode is done; call reset before stepping");

  std::vector<CtbrCommand> cmds(rows);
  for (int i = 0; i < rows; ++i) cmds[i] = CtbrCommand::from_vector(Vec4(actions.subspan(4 * i, 4).data()));
  const StepResult r = env_.step(cmds);

  FlatStep out;
  out.observations = flatten_observations(r.observations);
  out.reward = r.reward.total;
  out.done = r.done;
  out.info = {{"capture_step", r.info.capture_step ? *r.info.capture_step : -1},
              {"collisions", r.info.collisions},
              {"total_collisions", r.info.total_collisions},
              {"detected", r.info.evader_detected ? 1.0 : 0.0},
              {"failed", r.info.failed ? 1.0 : 0.0}};
  return out;
}

std::vector<FlatStep> step_batch(std::span<FlatEnv* const> envs, std::span<const double> actions, int workers) {
  std::vector<std::size_t> offsets;
  std::size_t rows = 0;
  for (const FlatEnv* e : envs) {
    offsets.push_back(rows * 4);
    rows += static_cast<std::size_t>(e->n_pursuers());
  }
  if (actions.size() != rows * 4)
    throw std::invalid_argument("batched actions must have shape (" + std::to_string(rows) + ", 4)");
  for (double a : actions)
    if (!std::isfinite(a)) throw std::invalid_argument("actions must be finite");
  for (const FlatEnv* e : envs)
    if (e->native().done()) throw std::logic_error("a batched environment is done; reset it before stepping");

  std::vector<FlatStep> out(envs.size());
  parallel_for(envs.size(), workers, [&](std::size_t i, int) {
    const int n = envs[i]->n_pursuers();
    out[i] = envs[i]->step(actions.subspan(offsets[i], static_cast<std::size_t>(n) * 4), n, 4);
  });
  return out;
}

namespace {

CurriculumRunner runner_from(const nlohmann::json& config, std::uint64_t seed) {
  const SimConfig cfg = config_from_json(config);
  return CurriculumRunner(cfg.curriculum, cfg.parts.env, seed);
}

}  // namespace

CurriculumSession::CurriculumSession(const nlohmann::json& config, std::uint64_t seed)
    : runner_(runner_from(config, seed)) {}

std::vector<nlohmann::json> CurriculumSession::next_batch() {
  std::vector<nlohmann::json> out;
  for (const auto& t : runner_.next_batch()) out.push_back(task_to_json(t.task));
  return out;
}

IterationStats CurriculumSession::submit(std::span<const double> success_rates) { return runner_.submit(success_rates); }

}  // namespace pursuit

struct pursuit_env {
  pursuit::FlatEnv env;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return 0;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 1;
  }
}

void copy_out(const pursuit::FlatMatrix& m, double* out) {
  if (out) std::memcpy(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

}  // namespace

extern "C" {

const char* pursuit_last_error(void) { return g_last_error.c_str(); }

int pursuit_api_version(void) { return pursuit::kFlatApiVersion; }

pursuit_env* pursuit_env_create(const char* config_json) {
  pursuit_env* handle = nullptr;
  guarded([&] {
    const auto doc = nlohmann::json::parse(config_json ? config_json : "{}");
    handle = new pursuit_env{pursuit::FlatEnv(doc)};
  });
  return handle;
}

void pursuit_env_destroy(pursuit_env* env) { delete env; }

int pursuit_env_obs_dim(const pursuit_env* env) { return env ? env->env.obs_dim() : -1; }

int pursuit_env_n_pursuers(const pursuit_env* env) { return env ? env->env.n_pursuers() : -1; }

int pursuit_env_reset(pursuit_env* env, const char* target, uint64_t seed, double* obs_out) {
  return guarded([&] {
    if (!env || !target) throw std::invalid_argument("null handle or target");
    const std::string t(target);
    const auto spec = !t.empty() && t.front() == '{' ? nlohmann::json::parse(t) : nlohmann::json(t);
    copy_out(env->env.reset(spec, seed), obs_out);
  });
}

int pursuit_env_step(pursuit_env* env, const double* actions, int rows, int cols, double* obs_out, double* reward_out,
                     int* done_out, double* info_out) {
  return guarded([&] {
    if (!env || !actions || rows < 0 || cols < 0) throw std::invalid_argument("null handle or actions");
    const auto r = env->env.step(std::span(actions, static_cast<std::size_t>(rows) * cols), rows, cols);
    copy_out(r.observations, obs_out);
    if (reward_out) *reward_out = r.reward;
    if (done_out) *done_out = r.done ? 1 : 0;
    if (info_out) {
      const char* keys[] = {"capture_step", "collisions", "total_collisions", "detected", "failed"};
      for (int i = 0; i < 5; ++i) info_out[i] = r.info.at(keys[i]);
    }
  });
}
}
