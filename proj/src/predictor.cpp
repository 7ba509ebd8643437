#include "pursuit/predictor.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace pursuit {

HistoryTick to_history_tick(const TickRecord& rec, double mask_value, bool privileged) {
  HistoryTick tick;
  tick.pursuers = rec.pursuers;
  tick.tick = rec.tick;
  tick.visible = privileged || rec.detected;
  if (tick.visible) {
    tick.evader_p = rec.evader_p;
    tick.evader_v = rec.evader_v;
  } else {
    tick.evader_p = Vec3::Constant(mask_value);
    tick.evader_v = Vec3::Constant(mask_value);
  }
  return tick;
}

HistoryWindow window_ending_at(const TrajectoryLog& log, std::size_t last, int n, double mask_value,
                               bool privileged) {
  if (log.empty() || last >= log.size()) throw std::out_of_range("window_ending_at: index outside log");
  HistoryWindow window;
  window.ticks.reserve(n);
  const long first = static_cast<long>(last) - n + 1;
  for (long i = first; i <= static_cast<long>(last); ++i) {
    if (i >= 0) {
      window.ticks.push_back(to_history_tick(log[i], mask_value, privileged));
    } else {
      // Before the first record the world is taken to have been at rest.
      HistoryTick pad = to_history_tick(log.front(), mask_value, privileged);
      pad.tick = log.front().tick + static_cast<int>(i);
      window.ticks.push_back(std::move(pad));
    }
  }
  return window;
}

std::vector<TrainingPair> collect_windows(const TrajectoryLog& log, int n, int horizon, double mask_value) {
  std::vector<TrainingPair> pairs;
  if (n < 1 || horizon < 1 || static_cast<long>(log.size()) < n + horizon) return pairs;
  const std::size_t count = log.size() - (n + horizon) + 1;
  pairs.reserve(count);
  for (std::size_t start = 0; start < count; ++start) {
    TrainingPair pair;
    pair.x = window_ending_at(log, start + n - 1, n, mask_value);
    for (int k = 1; k <= horizon; ++k) pair.y.push_back(log[start + n - 1 + k].evader_p);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

Prediction fallback_prediction(const Arena& arena, int horizon) {
  return {Vec3List(horizon, arena.center()), true};
}

namespace {

const HistoryTick* last_visible(const HistoryWindow& window) {
  for (auto it = window.ticks.rbegin(); it != window.ticks.rend(); ++it)
    if (it->visible) return &*it;
  return nullptr;
}

}  // namespace

ConstantVelocityPredictor::ConstantVelocityPredictor(int horizon, double dt, Arena arena)
    : horizon_(horizon), dt_(dt), arena_(arena) {}

Prediction ConstantVelocityPredictor::predict(const HistoryWindow& window) const {
  const HistoryTick* seen = last_visible(window);
  if (seen == nullptr || window.ticks.empty()) return fallback_prediction(arena_, horizon_);
  const int lag = window.ticks.back().tick - seen->tick;
  Prediction out;
  out.positions.reserve(horizon_);
  for (int k = 1; k <= horizon_; ++k) out.positions.push_back(seen->evader_p + seen->evader_v * (dt_ * (lag + k)));
  return out;
}

OraclePredictor::OraclePredictor(int horizon, double dt, Arena arena, std::vector<Vec2> obstacles,
                                 double obstacle_radius, EvaderConfig evader)
    : horizon_(horizon),
      dt_(dt),
      arena_(arena),
      obstacles_(std::move(obstacles)),
      obstacle_radius_(obstacle_radius),
      evader_(evader) {}

Prediction OraclePredictor::predict(const HistoryWindow& window) const {
  if (window.ticks.empty() || !window.ticks.back().visible) return fallback_prediction(arena_, horizon_);
  const HistoryTick& now = window.ticks.back();
  Vec3 position = now.evader_p;
  const double speed = now.evader_v.norm();
  Vec3 heading = speed > 0.0 ? Vec3(now.evader_v / speed) : Vec3::UnitX();
  const ObstacleField field{obstacles_, obstacle_radius_};

  Prediction out;
  out.positions.reserve(horizon_);
  for (int k = 0; k < horizon_; ++k) {
    const Vec3 force = evader_force(position, now.pursuers, field, arena_, evader_);
    const EvaderMotion motion = evader_step(position, heading, force, dt_, arena_, evader_);
    position = motion.position;
    heading = motion.heading;
    out.positions.push_back(position);
  }
  return out;
}

Eigen::VectorXd window_features(const HistoryWindow& window, int max_steps) {
  std::size_t dim = 1;
  for (const auto& t : window.ticks) dim += 3 * t.pursuers.size() + 7;
  Eigen::VectorXd f(dim);
  Eigen::Index at = 0;
  for (const auto& t : window.ticks) {
    for (const Vec3& p : t.pursuers) {
      f.segment<3>(at) = p;
      at += 3;
    }
    f.segment<3>(at) = t.evader_p;
    f.segment<3>(at + 3) = t.evader_v;
    f[at + 6] = static_cast<double>(t.tick) / max_steps;
    at += 7;
  }
  f[at] = 1.0;
  return f;
}

namespace {

Eigen::VectorXd flatten_labels(const Vec3List& y) {
  Eigen::VectorXd out(3 * y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out.segment<3>(3 * k) = y[k];
  return out;
}

}  // namespace

double mean_squared_loss(const Eigen::MatrixXd& weights, std::span<const TrainingPair> pairs, int max_steps) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pair : pairs)
    total += (flatten_labels(pair.y) - weights * window_features(pair.x, max_steps)).squaredNorm();
  return total / (static_cast<double>(pairs.size()) * weights.rows());
}

LinearFit fit_linear(std::span<const TrainingPair> pairs, double ridge, int max_steps) {
  if (pairs.empty()) throw std::invalid_argument("fit_linear: need at least one training pair");
  if (ridge < 0.0) throw std::invalid_argument("fit_linear: ridge must be non-negative");
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  const Eigen::Index d = window_features(pairs.front().x, max_steps).size();
  const Eigen::Index out_dim = 3 * static_cast<Eigen::Index>(pairs.front().y.size());

  Eigen::MatrixXd features(n, d);
  Eigen::MatrixXd labels(n, out_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd f = window_features(pairs[i].x, max_steps);
    const Eigen::VectorXd y = flatten_labels(pairs[i].y);
    if (f.size() != d || y.size() != out_dim) throw std::invalid_argument("fit_linear: inconsistent pair shapes");
    features.row(i) = f.transpose();
    labels.row(i) = y.transpose();
  }

  Eigen::MatrixXd gram = features.transpose() * features;
  gram.diagonal().head(d - 1).array() += ridge * static_cast<double>(n);
  const Eigen::MatrixXd rhs = features.transpose() * labels;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver(gram);

  LinearFit fit;
  fit.weights = solver.solve(rhs).transpose();
  fit.rank = static_cast<int>(solver.rank());
  fit.rank_deficient = fit.rank < d;
  fit.loss = mean_squared_loss(fit.weights, pairs, max_steps);
  return fit;
}

LinearPredictor::LinearPredictor(Eigen::MatrixXd weights, int max_steps, Arena arena)
    : weights_(std::move(weights)), max_steps_(max_steps), arena_(arena) {
  if (weights_.rows() % 3 != 0) throw std::invalid_argument("LinearPredictor: output rows must be 3K");
}

Prediction LinearPredictor::predict(const HistoryWindow& window) const {
  if (last_visible(window) == nullptr) return fallback_prediction(arena_, horizon());
  const Eigen::VectorXd f = window_features(window, max_steps_);
  if (f.size() != weights_.cols()) throw std::invalid_argument("LinearPredictor: window shape mismatch");
  const Eigen::VectorXd y = weights_ * f;
  Prediction out;
  for (Eigen::Index k = 0; k < y.size() / 3; ++k) out.positions.push_back(y.segment<3>(3 * k));
  return out;
}

double prediction_error(const Predictor& predictor, std::span<const TrajectoryLog> episodes, int n,
                        double mask_value) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& log : episodes) {
    for (std::size_t t = n - 1; t + 1 < log.size(); ++t) {
      const HistoryWindow window = window_ending_at(log, t, n, mask_value, predictor.privileged());
      const Prediction pred = predictor.predict(window);
      total += (pred.positions.front() - log[t + 1].evader_p).norm();
      ++count;
    }
  }
  return count ? total / count : 0.0;
}

namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_pairs_jsonl(const std::filesystem::path& path, std::span<const TrainingPair> pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& pair : pairs) {
    json x = json::array();
    for (const auto& t : pair.x.ticks) {
      json pursuers = json::array();
      for (const auto& p : t.pursuers) pursuers.push_back(vec_json(p));
      x.push_back({{"tick", t.tick},
                   {"visible", t.visible},
                   {"pursuers", pursuers},
                   {"evader_p", vec_json(t.evader_p)},
                   {"evader_v", vec_json(t.evader_v)}});
    }
    json y = json::array();
    for (const auto& p : pair.y) y.push_back(vec_json(p));
    out << json{{"x", x}, {"y", y}}.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TrainingPair> read_pairs_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TrainingPair pair;
      for (const auto& t : j.at("x")) {
        HistoryTick tick;
        tick.tick = t.at("tick").get<int>();
        tick.visible = t.at("visible").get<bool>();
        for (const auto& p : t.at("pursuers")) tick.pursuers.push_back(json_vec(p));
        tick.evader_p = json_vec(t.at("evader_p"));
        tick.evader_v = json_vec(t.at("evader_v"));
        pair.x.ticks.push_back(std::move(tick));
      }
      for (const auto& p : j.at("y")) pair.y.push_back(json_vec(p));
      pairs.push_back(std::move(pair));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace pursuit
