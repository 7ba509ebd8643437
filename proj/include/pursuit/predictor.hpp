#pragma once

// Evader trajectory prediction: the sliding history-window pipeline and three
// non-neural predictors (oracle rollout, constant velocity, ridge-regressed
// affine map) behind a common interface.

#include "pursuit/config.hpp"
#include "pursuit/evader.hpp"
#include "pursuit/geometry.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace pursuit {

/// One tick of history. When the evader is undetected its position and
/// velocity hold the mask triple and `visible` is false.
struct HistoryTick {
  Vec3List pursuers;
  Vec3 evader_p = Vec3::Zero();
  Vec3 evader_v = Vec3::Zero();
  int tick = 0;
  bool visible = true;

  bool operator==(const HistoryTick&) const = default;
};

struct HistoryWindow {
  std::vector<HistoryTick> ticks;  // oldest first, consecutive tick indices

  bool operator==(const HistoryWindow&) const = default;
};

struct TrainingPair {
  HistoryWindow x;
  Vec3List y;  // true evader positions for the K ticks after the window

  bool operator==(const TrainingPair&) const = default;
};

/// Ground-truth tick from a rollout; `detected` decides masking when windows are cut.
struct TickRecord {
  Vec3List pursuers;
  Vec3 evader_p = Vec3::Zero();
  Vec3 evader_v = Vec3::Zero();
  int tick = 0;
  bool detected = true;
};

using TrajectoryLog = std::vector<TickRecord>;

HistoryTick to_history_tick(const TickRecord& rec, double mask_value, bool privileged = false);

/// Window of `n` ticks ending at `last` (inclusive).
HistoryWindow window_ending_at(const TrajectoryLog& log, std::size_t last, int n, double mask_value,
                               bool privileged = false);

/// One pair per sliding start index; empty if the log is shorter than n + K.
std::vector<TrainingPair> collect_windows(const TrajectoryLog& log, int n, int horizon, double mask_value);

struct Prediction {
  Vec3List positions;
  bool fallback = false;  // no visible evader in the window
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const HistoryWindow& window) const = 0;
  virtual int horizon() const = 0;
  /// Privileged predictors are fed unmasked windows.
  virtual bool privileged() const { return false; }
};

/// Arena-centre constant prediction used when nothing is visible.
Prediction fallback_prediction(const Arena& arena, int horizon);

class ConstantVelocityPredictor final : public Predictor {
 public:
  ConstantVelocityPredictor(int horizon, double dt, Arena arena);
  Prediction predict(const HistoryWindow& window) const override;
  int horizon() const override { return horizon_; }

 private:
  int horizon_;
  double dt_;
  Arena arena_;
};

/// Rolls the evader's own force model forward with pursuers frozen at their
/// last observed positions.
class OraclePredictor final : public Predictor {
 public:
  OraclePredictor(int horizon, double dt, Arena arena, std::vector<Vec2> obstacles, double obstacle_radius,
                  EvaderConfig evader);
  Prediction predict(const HistoryWindow& window) const override;
  int horizon() const override { return horizon_; }
  bool privileged() const override { return true; }

 private:
  int horizon_;
  double dt_;
  Arena arena_;
  std::vector<Vec2> obstacles_;
  double obstacle_radius_;
  EvaderConfig evader_;
};

/// Per tick: pursuer positions, evader position, evader velocity, tick / max_steps; then a bias 1.
Eigen::VectorXd window_features(const HistoryWindow& window, int max_steps);

struct LinearFit {
  Eigen::MatrixXd weights;  // (3K) x (features + 1)
  double loss = 0.0;        // mean squared error over all label coordinates
  int rank = 0;
  bool rank_deficient = false;
};

/// Ridge-damped least squares via the normal equations; the bias column is not damped.
LinearFit fit_linear(std::span<const TrainingPair> pairs, double ridge, int max_steps);

double mean_squared_loss(const Eigen::MatrixXd& weights, std::span<const TrainingPair> pairs, int max_steps);

class LinearPredictor final : public Predictor {
 public:
  LinearPredictor(Eigen::MatrixXd weights, int max_steps, Arena arena);
  Prediction predict(const HistoryWindow& window) const override;
  int horizon() const override { return static_cast<int>(weights_.rows() / 3); }

 private:
  Eigen::MatrixXd weights_;
  int max_steps_;
  Arena arena_;
};

/// Mean distance between the first predicted position and the true next
/// position over every tick that has a full window behind it and a successor.
double prediction_error(const Predictor& predictor, std::span<const TrajectoryLog> episodes, int n,
                        double mask_value);

void write_pairs_jsonl(const std::filesystem::path& path, std::span<const TrainingPair> pairs);
std::vector<TrainingPair> read_pairs_jsonl(const std::filesystem::path& path);

}  // namespace pursuit
