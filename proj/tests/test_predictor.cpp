#include "pursuit/predictor.hpp"
#include "pursuit/world.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace pursuit;

namespace {

TrajectoryLog straight_line(int len, const Vec3& start, const Vec3& v, double dt) {
  TrajectoryLog log;
  for (int t = 0; t < len; ++t) {
    TickRecord r;
    r.pursuers = {Vec3(-0.5, 0, 0.5), Vec3(-0.5, 0.3, 0.5)};
    r.evader_p = start + v * dt * t;
    r.evader_v = v;
    r.tick = t;
    log.push_back(r);
  }
  return log;
}

}  // namespace

TEST(Predictor, WindowCountFormula) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len_d(0, 40), n_d(1, 10), k_d(1, 6);
  for (int i = 0; i < 100; ++i) {
    const int len = len_d(rng), n = n_d(rng), k = k_d(rng);
    const auto log = straight_line(len, Vec3::Zero(), Vec3(0.1, 0, 0), 0.01);
    const auto pairs = collect_windows(log, n, k, -5.0);
    EXPECT_EQ(static_cast<int>(pairs.size()), std::max(0, len - (n + k) + 1));
    for (const auto& p : pairs) {
      EXPECT_EQ(static_cast<int>(p.x.ticks.size()), n);
      EXPECT_EQ(static_cast<int>(p.y.size()), k);
    }
  }
}

TEST(Predictor, WindowMasksUndetectedTicks) {
  auto log = straight_line(12, Vec3::Zero(), Vec3(0.1, 0, 0), 0.01);
  log[5].detected = false;
  const auto w = window_ending_at(log, 6, 3, -5.0);
  ASSERT_EQ(w.ticks.size(), 3u);
  EXPECT_FALSE(w.ticks[1].visible);
  EXPECT_EQ(w.ticks[1].evader_p, Vec3::Constant(-5.0));
  EXPECT_EQ(w.ticks[1].evader_v, Vec3::Constant(-5.0));
  EXPECT_TRUE(w.ticks[2].visible);
  const auto priv = window_ending_at(log, 6, 3, -5.0, true);
  EXPECT_EQ(priv.ticks[1].evader_p, log[5].evader_p);
}

TEST(Predictor, WindowPaddedBeforeStart) {
  const auto log = straight_line(3, Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0, 0), 0.01);
  const auto w = window_ending_at(log, 1, 4, -5.0);
  ASSERT_EQ(w.ticks.size(), 4u);
  EXPECT_EQ(w.ticks[0].evader_p, log[0].evader_p);
  EXPECT_EQ(w.ticks[3].evader_p, log[1].evader_p);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(w.ticks[i].tick, w.ticks[i - 1].tick + 1);
}

TEST(Predictor, FallbackWhenNothingVisible) {
  auto log = straight_line(10, Vec3::Zero(), Vec3(0.1, 0, 0), 0.01);
  for (auto& r : log) r.detected = false;
  const Arena arena{0.9, 1.2};
  ConstantVelocityPredictor cv(5, 0.01, arena);
  const auto p = cv.predict(window_ending_at(log, 9, 10, -5.0));
  EXPECT_TRUE(p.fallback);
  ASSERT_EQ(p.positions.size(), 5u);
  for (const auto& x : p.positions) EXPECT_EQ(x, arena.center());
}

TEST(Predictor, ConstantVelocityExtrapolates) {
  const Vec3 v(0.5, -0.2, 0.0);
  const auto log = straight_line(20, Vec3(0, 0, 0.6), v, 0.01);
  ConstantVelocityPredictor cv(5, 0.01, Arena{0.9, 1.2});
  const auto p = cv.predict(window_ending_at(log, 9, 10, -5.0));
  EXPECT_FALSE(p.fallback);
  for (int k = 0; k < 5; ++k) EXPECT_LT((p.positions[k] - log[10 + k].evader_p).norm(), 1e-12);
}

TEST(Predictor, LinearFitRecoversStraightLine) {
  std::vector<TrainingPair> pairs;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int e = 0; e < 20; ++e) {
    const auto log = straight_line(30, Vec3(u(rng), u(rng), 0.6), Vec3(u(rng), u(rng), 0), 0.01);
    const auto w = collect_windows(log, 3, 2, -5.0);
    pairs.insert(pairs.end(), w.begin(), w.end());
  }
  const auto fit = fit_linear(pairs, 0.0, 800);
  EXPECT_LT(fit.loss, 1e-8);
  EXPECT_NEAR(fit.loss, mean_squared_loss(fit.weights, pairs, 800), 1e-15);
  EXPECT_TRUE(fit.rank_deficient);  // frozen pursuers duplicate the bias column
}

TEST(Predictor, LinearFitMatchesGradientDescent) {
  // Small random regression where gradient descent on the same objective converges.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 0.3);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 40; ++i) {
    TrainingPair p;
    HistoryTick t;
    t.pursuers = {Vec3(g(rng), g(rng), g(rng))};
    t.evader_p = Vec3(g(rng), g(rng), g(rng));
    t.evader_v = Vec3(g(rng), g(rng), g(rng));
    t.tick = i;
    p.x.ticks = {t};
    p.y = {Vec3(g(rng), g(rng), g(rng))};
    pairs.push_back(p);
  }
  const double ridge = 0.05;
  const auto fit = fit_linear(pairs, ridge, 800);

  // Objective: (1/n) sum ||W phi - y||^2 + ridge * ||W without bias column||^2.
  const int d = static_cast<int>(window_features(pairs[0].x, 800).size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, d);
  for (int it = 0; it < 20000; ++it) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(3, d);
    for (const auto& p : pairs) {
      const Eigen::VectorXd phi = window_features(p.x, 800);
      grad += 2.0 * (W * phi - p.y[0]) * phi.transpose() / pairs.size();
    }
    Eigen::MatrixXd reg = 2.0 * ridge * W;
    reg.col(d - 1).setZero();
    W -= 0.05 * (grad + reg);
  }
  EXPECT_LT((W - fit.weights).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Predictor, LinearPredictorUsesWeights) {
  const auto log = straight_line(40, Vec3(0, 0, 0.6), Vec3(0.3, 0.1, 0), 0.01);
  const auto pairs = collect_windows(log, 4, 3, -5.0);
  const auto fit = fit_linear(pairs, 1e-12, 800);
  LinearPredictor lp(fit.weights, 800, Arena{0.9, 1.2});
  EXPECT_EQ(lp.horizon(), 3);
  const auto p = lp.predict(pairs[5].x);
  for (int k = 0; k < 3; ++k) EXPECT_LT((p.positions[k] - pairs[5].y[k]).norm(), 1e-5);
}

TEST(Predictor, PairsRoundTripJsonl) {
  auto log = straight_line(15, Vec3(0, 0, 0.6), Vec3(0.3, 0.1, 0), 0.01);
  log[4].detected = false;
  const auto pairs = collect_windows(log, 3, 2, -5.0);
  const auto path = std::filesystem::temp_directory_path() / "pursuit_pairs_test.jsonl";
  write_pairs_jsonl(path, pairs);
  EXPECT_EQ(read_pairs_jsonl(path), pairs);
  std::filesystem::remove(path);
}

TEST(Predictor, OracleZeroErrorOnFrozenPursuers) {
  EnvParts parts;
  Env env(parts);
  TaskParams task;
  task.obstacles = {Vec2(0.3, 0.3), Vec2(-0.2, 0.5)};
  task.pursuer_starts = {Vec3(-0.5, 0, 0.6), Vec3(-0.5, 0.3, 0.6), Vec3(-0.5, -0.3, 0.6)};
  task.evader_start = Vec3(0.2, -0.3, 0.6);
  env.reset(task, 1);
  const Vec3List zero(3, Vec3::Zero());
  while (!env.done()) env.step_velocity(zero);
  const OraclePredictor oracle(5, parts.env.control_dt, arena_of(parts.env), task.obstacles,
                               parts.env.obstacle_radius, parts.evader);
  const std::vector<TrajectoryLog> episodes{env.log()};
  EXPECT_EQ(prediction_error(oracle, episodes, 10, -5.0), 0.0);
}
