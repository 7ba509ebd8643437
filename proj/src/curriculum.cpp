#include "pursuit/curriculum.hpp"

#include "pursuit/config_io.hpp"
#include "pursuit/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace pursuit {

namespace {

constexpr int kMaxRejections = 1000;
constexpr int kExpandResamples = 20;
constexpr double kPi = 3.14159265358979323846;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Vec2 uniform_in_disk(Rng& rng, double radius) {
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double a = uniform(rng, 0.0, 2.0 * kPi);
  return {r * std::cos(a), r * std::sin(a)};
}

bool clear_of_obstacles(const Vec3& p, const std::vector<Vec2>& obstacles, const EnvConfig& env) {
  return std::all_of(obstacles.begin(), obstacles.end(), [&](const Vec2& c) {
    return horizontal_distance(p, c) >= env.obstacle_radius + env.clearance;
  });
}

}  // namespace

TaskParams sample_global(const EnvConfig& env, Rng& rng) {
  int rejections = 0;
  auto reject = [&] {
    if (++rejections > kMaxRejections)
      throw InfeasibleConfig("task sampling exceeded " + std::to_string(kMaxRejections) +
                             " rejections; arena too crowded for this configuration");
  };

  TaskParams task;
  const int n_obstacles = std::uniform_int_distribution<int>(env.min_obstacles, env.max_obstacles)(rng);
  while (static_cast<int>(task.obstacles.size()) < n_obstacles) {
    const Vec2 c = uniform_in_disk(rng, env.arena_radius - env.obstacle_radius);
    const bool overlaps = std::any_of(task.obstacles.begin(), task.obstacles.end(),
                                      [&](const Vec2& o) { return (o - c).norm() < 2 * env.obstacle_radius; });
    if (overlaps) {
      reject();
      continue;
    }
    task.obstacles.push_back(c);
  }

  const double inner = env.arena_radius - env.clearance;
  while (true) {
    const Vec2 xy = uniform_in_disk(rng, inner);
    const Vec3 p(xy.x(), xy.y(), env.evader_start_altitude());
    if (clear_of_obstacles(p, task.obstacles, env)) {
      task.evader_start = p;
      break;
    }
    reject();
  }

  const bool degenerate_radius = env.capture_radius >= 2 * env.arena_radius;
  while (static_cast<int>(task.pursuer_starts.size()) < env.n_pursuers) {
    const Vec2 xy = uniform_in_disk(rng, inner);
    const Vec3 p(xy.x(), xy.y(), uniform(rng, env.clearance, env.arena_height - env.clearance));
    bool ok = clear_of_obstacles(p, task.obstacles, env) &&
              (degenerate_radius || (p - task.evader_start).norm() > env.capture_radius);
    for (const Vec3& q : task.pursuer_starts) ok = ok && (p - q).norm() >= env.clearance;
    if (ok) {
      task.pursuer_starts.push_back(p);
      continue;
    }
    reject();
  }
  return task;
}

namespace {

Vec3 project_position(Vec3 p, const std::vector<Vec2>& obstacles, const EnvConfig& env) {
  constexpr double kSlack = 1e-9;
  const double inner = env.arena_radius - env.clearance - kSlack;
  for (int pass = 0; pass < 4; ++pass) {
    const double r = p.head<2>().norm();
    if (r > inner) p.head<2>() *= inner / r;
    p.z() = std::clamp(p.z(), env.clearance + kSlack, env.arena_height - env.clearance - kSlack);
    for (const Vec2& c : obstacles) {
      const Vec2 away = p.head<2>() - c;
      const double need = env.obstacle_radius + env.clearance + kSlack;
      const double d = away.norm();
      if (d < need) p.head<2>() = c + (d > 0.0 ? Vec2(away / d) : Vec2::UnitX()) * need;
    }
  }
  return p;
}

}  // namespace

TaskParams expand(const TaskParams& task, double delta, const EnvConfig& env, Rng& rng) {
  TaskParams candidate = task;
  auto perturb = [&](const Vec3& p) {
    return Vec3(p.x() + uniform(rng, -delta, delta), p.y() + uniform(rng, -delta, delta),
                p.z() + uniform(rng, -delta, delta));
  };
  for (int attempt = 0; attempt < kExpandResamples; ++attempt) {
    candidate = task;
    for (Vec3& p : candidate.pursuer_starts) p = perturb(p);
    candidate.evader_start = perturb(task.evader_start);
    if (validate_task(candidate, env).ok()) return candidate;
  }

  TaskParams projected = candidate;
  projected.evader_start = project_position(candidate.evader_start, task.obstacles, env);
  for (Vec3& p : projected.pursuer_starts) {
    p = project_position(p, task.obstacles, env);
    const Vec3 away = p - projected.evader_start;
    const double d = away.norm();
    if (d <= env.capture_radius && env.capture_radius < 2 * env.arena_radius) {
      const Vec3 dir = d > 0.0 ? Vec3(away / d) : Vec3::UnitX();
      p = project_position(projected.evader_start + dir * (env.capture_radius + 1e-6), task.obstacles, env);
    }
  }
  if (validate_task(projected, env).ok()) return projected;
  return task;
}

std::vector<SampledTask> sample_batch(const Archive& archive, const CurriculumConfig& cfg, const EnvConfig& env,
                                      Rng& rng) {
  std::vector<SampledTask> batch;
  batch.reserve(cfg.batch_size);
  for (int i = 0; i < cfg.batch_size; ++i) {
    const bool local = uniform(rng, 0.0, 1.0) < cfg.expand_probability;
    if (local && !archive.empty()) {
      const auto pick = std::uniform_int_distribution<std::size_t>(0, archive.size() - 1)(rng);
      batch.push_back({expand(archive[pick].task, cfg.delta, env, rng), TaskOrigin::expansion});
    } else {
      batch.push_back({sample_global(env, rng), TaskOrigin::global});
    }
  }
  return batch;
}

bool in_band(double success_rate, const CurriculumConfig& cfg) {
  return success_rate >= cfg.sigma_min && success_rate <= cfg.sigma_max;
}

std::vector<ArchiveEntry> selection(std::span<const EvaluatedTask> evaluated, const CurriculumConfig& cfg,
                                    int iteration) {
  std::vector<ArchiveEntry> kept;
  for (const auto& e : evaluated)
    if (in_band(e.success_rate, cfg)) kept.push_back({e.task, e.success_rate, iteration});
  return kept;
}

void update_archive(Archive& archive, std::vector<ArchiveEntry> fresh, const CurriculumConfig& cfg) {
  for (auto& e : fresh)
    if (in_band(e.success_rate, cfg)) archive.push_back(std::move(e));
  while (static_cast<int>(archive.size()) > cfg.archive_cap) archive.pop_front();
}

int apply_reevaluation(Archive& archive, std::span<const std::size_t> indices, std::span<const double> rates,
                       int iteration, const CurriculumConfig& cfg) {
  if (indices.size() != rates.size()) throw std::invalid_argument("apply_reevaluation: size mismatch");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    ArchiveEntry& e = archive.at(indices[k]);
    e.success_rate = rates[k];
    e.last_eval_iteration = iteration;
  }
  const auto before = archive.size();
  std::erase_if(archive, [&](const ArchiveEntry& e) { return !in_band(e.success_rate, cfg); });
  return static_cast<int>(before - archive.size());
}

CurriculumRunner::CurriculumRunner(CurriculumConfig cfg, EnvConfig env, std::uint64_t seed)
    : cfg_(cfg), env_(env), seed_(seed), rng_(seed) {
  cfg_.validate();
  env_.validate();
}

const std::vector<SampledTask>& CurriculumRunner::next_batch() {
  if (pending_)
    throw std::logic_error("curriculum iteration " + std::to_string(iteration_) +
                           " is still awaiting success rates for " + std::to_string(batch_.size()) + " tasks");
  batch_ = sample_batch(archive_, cfg_, env_, rng_);
  reeval_indices_.clear();
  for (std::size_t i = 0; i < archive_.size(); ++i) {
    if (iteration_ - archive_[i].last_eval_iteration >= cfg_.reevaluate_after) {
      reeval_indices_.push_back(i);
      batch_.push_back({archive_[i].task, TaskOrigin::reevaluation});
    }
  }
  pending_ = true;
  return batch_;
}

std::uint64_t CurriculumRunner::task_seed(std::size_t index) const {
  return mix_seed(mix_seed(seed_, static_cast<std::uint64_t>(iteration_)), index);
}

IterationStats CurriculumRunner::submit(std::span<const double> success_rates) {
  if (!pending_) throw std::logic_error("no curriculum batch is awaiting results");
  if (success_rates.size() != batch_.size())
    throw std::invalid_argument("expected " + std::to_string(batch_.size()) + " success rates, got " +
                                std::to_string(success_rates.size()));
  for (double c : success_rates)
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("success rates must lie in [0, 1]");

  const std::size_t n_fresh = batch_.size() - reeval_indices_.size();
  std::vector<EvaluatedTask> evaluated;
  IterationStats stats;
  stats.iteration = iteration_;
  int expansions = 0;
  double success_sum = 0.0;
  for (std::size_t i = 0; i < n_fresh; ++i) {
    evaluated.push_back({batch_[i].task, success_rates[i]});
    expansions += batch_[i].origin == TaskOrigin::expansion ? 1 : 0;
    success_sum += success_rates[i];
  }
  stats.mean_success = n_fresh ? success_sum / n_fresh : 0.0;
  stats.expansion_fraction = n_fresh ? static_cast<double>(expansions) / n_fresh : 0.0;
  stats.reevaluated = static_cast<int>(reeval_indices_.size());
  stats.removed =
      apply_reevaluation(archive_, reeval_indices_, success_rates.subspan(n_fresh), iteration_, cfg_);

  auto fresh = selection(evaluated, cfg_, iteration_);
  stats.added = static_cast<int>(fresh.size());
  update_archive(archive_, std::move(fresh), cfg_);
  stats.archive_size = archive_.size();

  pending_ = false;
  ++iteration_;
  return stats;
}

PolicyTaskEvaluator::PolicyTaskEvaluator(EnvParts parts, PolicyFactory factory, int workers)
    : parts_(std::move(parts)), factory_(std::move(factory)), workers_(std::max(1, workers)) {}

double PolicyTaskEvaluator::success_rate(const TaskParams& task, std::uint64_t seed, int episodes, int) {
  Env env(parts_);
  auto policy = factory_();
  int captures = 0;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t episode_seed = mix_seed(seed, static_cast<std::uint64_t>(e));
    env.reset(task, episode_seed);
    policy->reset(episode_seed);
    try {
      while (!env.done()) apply_policy(env, *policy);
    } catch (const std::exception&) {
      continue;  // counted as a failure
    }
    captures += env.captured() ? 1 : 0;
  }
  return episodes > 0 ? static_cast<double>(captures) / episodes : 0.0;
}

double DistanceThresholdEvaluator::initial_distance(const TaskParams& task) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : task.pursuer_starts) best = std::min(best, (p - task.evader_start).norm());
  return best;
}

double DistanceThresholdEvaluator::success_probability(const TaskParams& task) const {
  return std::clamp((far_ - initial_distance(task)) / (far_ - near_), 0.0, 1.0);
}

double DistanceThresholdEvaluator::success_rate(const TaskParams& task, std::uint64_t seed, int episodes, int) {
  Rng rng(seed);
  std::bernoulli_distribution success(success_probability(task));
  int wins = 0;
  for (int e = 0; e < episodes; ++e) wins += success(rng) ? 1 : 0;
  return episodes > 0 ? static_cast<double>(wins) / episodes : 0.0;
}

CurriculumResult curriculum_loop(TaskEvaluator& evaluator, const CurriculumConfig& cfg, const EnvConfig& env,
                                 int iterations, std::uint64_t seed) {
  CurriculumRunner runner(cfg, env, seed);
  CurriculumResult result;
  for (int it = 0; it < iterations; ++it) {
    const auto& batch = runner.next_batch();
    std::vector<double> rates(batch.size(), 0.0);
    parallel_for(batch.size(), evaluator.workers(), [&](std::size_t i, int worker) {
      rates[i] = evaluator.success_rate(batch[i].task, runner.task_seed(i), cfg.eval_episodes_per_task, worker);
    });
    result.stats.push_back(runner.submit(rates));
  }
  result.archive = runner.archive();
  return result;
}

void save_archive(const std::filesystem::path& path, const Archive& archive, int iteration) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : archive)
    entries.push_back(
        {{"task", task_to_json(e.task)}, {"success_rate", e.success_rate}, {"last_eval_iteration", e.last_eval_iteration}});
  const nlohmann::json doc{{"schema_version", 1}, {"iteration", iteration}, {"entries", entries}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Archive load_archive(const std::filesystem::path& path, int* iteration) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.at("schema_version").get<int>() != 1)
    throw std::runtime_error(path.string() + ": unsupported archive schema_version");
  if (iteration) *iteration = doc.at("iteration").get<int>();
  Archive archive;
  for (const auto& e : doc.at("entries"))
    archive.push_back({task_from_json(e.at("task")), e.at("success_rate").get<double>(),
                       e.at("last_eval_iteration").get<int>()});
  return archive;
}

void write_stats_csv(std::ostream& out, std::span<const IterationStats> stats) {
  out << "iteration,archive_size,mean_success,expansion_fraction,added,reevaluated,removed\n";
  for (const auto& s : stats)
    out << s.iteration << ',' << s.archive_size << ',' << s.mean_success << ',' << s.expansion_fraction << ','
        << s.added << ',' << s.reevaluated << ',' << s.removed << '\n';
}

}  // namespace pursuit
