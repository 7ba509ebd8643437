#pragma once

// Adaptive environment generator: an active archive of frontier tasks, local
// expansion around archived tasks, global exploration of the task space, and
// success-band selection.

#include "pursuit/config.hpp"
#include "pursuit/pursuers.hpp"
#include "pursuit/task.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace pursuit {

using Rng = std::mt19937_64;

struct ArchiveEntry {
  TaskParams task;
  double success_rate = 0.0;
  int last_eval_iteration = 0;

  bool operator==(const ArchiveEntry&) const = default;
};

using Archive = std::deque<ArchiveEntry>;

enum class TaskOrigin { expansion, global, reevaluation };

struct SampledTask {
  TaskParams task;
  TaskOrigin origin = TaskOrigin::global;
};

class InfeasibleConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform draw from the whole task space by rejection sampling.
TaskParams sample_global(const EnvConfig& env, Rng& rng);

/// Perturbs pursuer and evader starts by U[-delta, delta] per coordinate,
/// keeping obstacles. Invalid draws are resampled, then projected back into
/// the valid set; the seed task is returned if projection cannot repair it.
TaskParams expand(const TaskParams& task, double delta, const EnvConfig& env, Rng& rng);

std::vector<SampledTask> sample_batch(const Archive& archive, const CurriculumConfig& cfg, const EnvConfig& env,
                                      Rng& rng);

struct EvaluatedTask {
  TaskParams task;
  double success_rate = 0.0;
};

bool in_band(double success_rate, const CurriculumConfig& cfg);

/// Tasks whose success rate lies in [sigma_min, sigma_max], inclusive.
std::vector<ArchiveEntry> selection(std::span<const EvaluatedTask> evaluated, const CurriculumConfig& cfg,
                                    int iteration);

/// Appends new entries and evicts the oldest beyond archive_cap.
void update_archive(Archive& archive, std::vector<ArchiveEntry> fresh, const CurriculumConfig& cfg);

/// Records new rates for archive entries and drops those that left the band.
/// Returns the number removed.
int apply_reevaluation(Archive& archive, std::span<const std::size_t> indices, std::span<const double> rates,
                       int iteration, const CurriculumConfig& cfg);

struct IterationStats {
  int iteration = 0;
  std::size_t archive_size = 0;
  double mean_success = 0.0;  // over freshly sampled tasks
  double expansion_fraction = 0.0;
  int added = 0;
  int reevaluated = 0;
  int removed = 0;

  bool operator==(const IterationStats&) const = default;
};

/// Stepwise driver. Each iteration hands out a batch (fresh tasks followed by
/// archive entries due for re-evaluation) and blocks until success rates
/// for every task come back.
class CurriculumRunner {
 public:
  CurriculumRunner(CurriculumConfig cfg, EnvConfig env, std::uint64_t seed);

  const std::vector<SampledTask>& next_batch();
  /// Seed for the evaluation episodes of batch task `index`.
  std::uint64_t task_seed(std::size_t index) const;
  IterationStats submit(std::span<const double> success_rates);

  bool awaiting_results() const { return pending_; }
  int iteration() const { return iteration_; }
  const Archive& archive() const { return archive_; }
  const CurriculumConfig& config() const { return cfg_; }

 private:
  CurriculumConfig cfg_;
  EnvConfig env_;
  std::uint64_t seed_;
  Rng rng_;
  Archive archive_;
  std::vector<SampledTask> batch_;
  std::vector<std::size_t> reeval_indices_;
  int iteration_ = 0;
  bool pending_ = false;
};

/// Success-rate oracle for one task; implementations must be callable
/// concurrently from distinct workers (worker index given).
class TaskEvaluator {
 public:
  virtual ~TaskEvaluator() = default;
  virtual double success_rate(const TaskParams& task, std::uint64_t seed, int episodes, int worker) = 0;
  virtual int workers() const { return 1; }
};

/// Runs `episodes` native episodes with a policy per task; success means capture.
class PolicyTaskEvaluator final : public TaskEvaluator {
 public:
  PolicyTaskEvaluator(EnvParts parts, PolicyFactory factory, int workers);
  double success_rate(const TaskParams& task, std::uint64_t seed, int episodes, int worker) override;
  int workers() const override { return workers_; }

 private:
  EnvParts parts_;
  PolicyFactory factory_;
  int workers_;
};

/// Scripted stand-in for a policy whose capture probability falls linearly
/// with the initial pursuer-evader distance: 1 below `near`, 0 beyond `far`.
class DistanceThresholdEvaluator final : public TaskEvaluator {
 public:
  DistanceThresholdEvaluator(double near, double far) : near_(near), far_(far) {}
  double success_rate(const TaskParams& task, std::uint64_t seed, int episodes, int worker) override;
  double success_probability(const TaskParams& task) const;
  static double initial_distance(const TaskParams& task);

 private:
  double near_;
  double far_;
};

struct CurriculumResult {
  Archive archive;
  std::vector<IterationStats> stats;
};

CurriculumResult curriculum_loop(TaskEvaluator& evaluator, const CurriculumConfig& cfg, const EnvConfig& env,
                                 int iterations, std::uint64_t seed);

void save_archive(const std::filesystem::path& path, const Archive& archive, int iteration);
Archive load_archive(const std::filesystem::path& path, int* iteration = nullptr);
void write_stats_csv(std::ostream& out, std::span<const IterationStats> stats);

}  // namespace pursuit
