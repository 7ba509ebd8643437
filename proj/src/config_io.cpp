#include "pursuit/config_io.hpp"

#include <fstream>
#include <set>

namespace pursuit {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

void EnvConfig::validate() const {
  auto fail = [](const char* field, const char* msg) { throw ConfigError(std::string("env.") + field, msg); };
  if (!(arena_radius > 0)) fail("arena_radius", "must be positive");
  if (!(arena_height > 0)) fail("arena_height", "must be positive");
  if (n_pursuers < 1) fail("n_pursuers", "must be at least 1");
  if (!(obstacle_radius > 0)) fail("obstacle_radius", "must be positive");
  if (min_obstacles < 0 || max_obstacles < min_obstacles) fail("max_obstacles", "need 0 <= min <= max");
  if (!(clearance > 0)) fail("clearance", "must be positive");
  if (!(capture_radius > clearance)) fail("capture_radius", "must exceed clearance");
  if (max_steps < 1) fail("max_steps", "must be at least 1");
  if (!(pursuer_max_speed > 0)) fail("pursuer_max_speed", "must be positive");
  if (!(evader_speed > 0)) fail("evader_speed", "must be positive");
  if (k_nearest_obstacles < 0) fail("k_nearest_obstacles", "must be non-negative");
  if (!(gamma >= 0 && gamma <= 1)) fail("gamma", "must lie in [0, 1]");
  if (prediction_horizon < 1) fail("prediction_horizon", "must be at least 1");
  if (history_length < 1) fail("history_length", "must be at least 1");
  if (!(control_dt > 0)) fail("control_dt", "must be positive");
  if (physics_substeps < 1) fail("physics_substeps", "must be at least 1");
  if (!(velocity_lag_tau >= 0)) fail("velocity_lag_tau", "must be non-negative");
}

void EvaderConfig::validate() const {
  auto fail = [](const char* field, const char* msg) { throw ConfigError(std::string("evader.") + field, msg); };
  if (!(w_pursuer >= 0)) fail("w_pursuer", "must be non-negative");
  if (!(w_obstacle >= 0)) fail("w_obstacle", "must be non-negative");
  if (!(w_boundary >= 0)) fail("w_boundary", "must be non-negative");
  if (!(eps_dist > 0)) fail("eps_dist", "must be positive");
  if (!(speed > 0)) fail("speed", "must be positive");
}

void CurriculumConfig::validate() const {
  auto fail = [](const char* field, const char* msg) { throw ConfigError(std::string("curriculum.") + field, msg); };
  if (!(expand_probability >= 0 && expand_probability <= 1)) fail("expand_probability", "must lie in [0, 1]");
  if (!(sigma_min >= 0 && sigma_min <= 1)) fail("sigma_min", "must lie in [0, 1]");
  if (!(sigma_max >= 0 && sigma_max <= 1)) fail("sigma_max", "must lie in [0, 1]");
  if (!(sigma_min <= sigma_max)) fail("sigma_min", "must not exceed sigma_max");
  if (!(delta > 0)) fail("delta", "must be positive");
  if (batch_size < 1) fail("batch_size", "must be at least 1");
  if (archive_cap < 1) fail("archive_cap", "must be at least 1");
  if (eval_episodes_per_task < 1) fail("eval_episodes_per_task", "must be at least 1");
  if (reevaluate_after < 1) fail("reevaluate_after", "must be at least 1");
}

namespace {

/// Reads (or writes) the fields of one section, tracking which keys were consumed.
class Section {
 public:
  Section(const json* in, json* out, std::string path) : in_(in), out_(out), path_(std::move(path)) {
    if (in_ && !in_->is_object()) throw ConfigError(path_, "expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& value) {
    seen_.insert(key);
    if (out_) {
      (*out_)[key] = encode(value);
      return;
    }
    if (!in_ || !in_->contains(key)) return;
    try {
      decode(in_->at(key), value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path_ + "." + key, e.what());
    }
  }

  void reject_unknown() const {
    if (!in_) return;
    for (const auto& [key, _] : in_->items())
      if (!seen_.count(key)) throw ConfigError(path_ + "." + key, "unknown field");
  }

 private:
  static json encode(const RewardStage& s) { return s == RewardStage::one ? "one" : "two"; }
  template <int N>
  static json encode(const Eigen::Matrix<double, N, 1>& v) {
    json a = json::array();
    for (int i = 0; i < N; ++i) a.push_back(v[i]);
    return a;
  }
  template <typename T>
  static json encode(const T& v) {
    return v;
  }

  static void decode(const json& j, RewardStage& s) {
    const auto name = j.get<std::string>();
    if (name == "one") s = RewardStage::one;
    else if (name == "two") s = RewardStage::two;
    else throw std::invalid_argument("expected \"one\" or \"two\"");
  }
  template <int N>
  static void decode(const json& j, Eigen::Matrix<double, N, 1>& v) {
    if (!j.is_array() || j.size() != N) throw std::invalid_argument("expected an array of " + std::to_string(N));
    for (int i = 0; i < N; ++i) v[i] = j[i].get<double>();
  }
  template <typename T>
  static void decode(const json& j, T& v) {
    v = j.get<T>();
  }

  const json* in_;
  json* out_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_section(const json* doc_in, json* doc_out, const char* name, Fn&& fn) {
  const json* in = doc_in && doc_in->contains(name) ? &doc_in->at(name) : nullptr;
  json* out = doc_out ? &(*doc_out)[name] : nullptr;
  if (out) *out = json::object();
  Section s(in, out, name);
  fn(s);
  s.reject_unknown();
}

template <typename Fn>
void with_subsection(const json* in_parent, json* out_parent, const std::string& path, const char* name, Fn&& fn) {
  const json* in = in_parent && in_parent->contains(name) ? &in_parent->at(name) : nullptr;
  json* out = out_parent ? &(*out_parent)[name] : nullptr;
  if (out) *out = json::object();
  Section s(in, out, path + "." + name);
  fn(s);
  s.reject_unknown();
}

void visit_env(Section& s, EnvConfig& c) {
  s("arena_radius", c.arena_radius);
  s("arena_height", c.arena_height);
  s("n_pursuers", c.n_pursuers);
  s("obstacle_radius", c.obstacle_radius);
  s("obstacle_height", c.obstacle_height);
  s("min_obstacles", c.min_obstacles);
  s("max_obstacles", c.max_obstacles);
  s("capture_radius", c.capture_radius);
  s("clearance", c.clearance);
  s("max_steps", c.max_steps);
  s("pursuer_max_speed", c.pursuer_max_speed);
  s("evader_speed", c.evader_speed);
  s("k_nearest_obstacles", c.k_nearest_obstacles);
  s("mask_value", c.mask_value);
  s("gamma", c.gamma);
  s("reward_stage", c.reward_stage);
  s("prediction_horizon", c.prediction_horizon);
  s("history_length", c.history_length);
  s("control_dt", c.control_dt);
  s("physics_substeps", c.physics_substeps);
  s("velocity_lag_tau", c.velocity_lag_tau);
}

struct QuadFields {
  double arm = 0.046;
  double f_max = 0.5;
};

void visit_quad(Section& s, QuadParamsd& q, QuadFields& extra) {
  s("mass", q.mass);
  s("inertia", q.inertia);
  s("k_f", q.k_f);
  s("k_m", q.k_m);
  s("motor_rate", q.motor_rate);
  s("rotor_spin", q.rotor_spin);
  s("gravity", q.gravity);
  s("arm_length", extra.arm);
  s("f_max", extra.f_max);
}

void visit_pid(Section& s, RatePidConfig& c) {
  s("kp", c.kp);
  s("ki", c.ki);
  s("kd", c.kd);
  s("i_limit", c.i_limit);
  s("output_scale", c.output_scale);
}

void visit_evader(Section& s, EvaderConfig& c) {
  s("w_pursuer", c.w_pursuer);
  s("w_obstacle", c.w_obstacle);
  s("w_boundary", c.w_boundary);
  s("eps_dist", c.eps_dist);
  s("planar", c.planar);
}

void visit_angelani(Section& s, AngelaniConfig& c) {
  s("repulse_gain", c.repulse_gain);
  s("repulse_radius", c.repulse_radius);
}

void visit_janosov(Section& s, JanosovConfig& c) {
  s("lookahead", c.lookahead);
  s("smoothing", c.smoothing);
  s("noise_sigma", c.noise_sigma);
  s("wall_margin", c.wall_margin);
  s("wall_gain", c.wall_gain);
  s("repulse_gain", c.repulse_gain);
  s("repulse_radius", c.repulse_radius);
}

void visit_apf(Section& s, ApfConfig& c) {
  s("gain_attract", c.gain_attract);
  s("gain_repulse_obstacle", c.gain_repulse_obstacle);
  s("gain_inter", c.gain_inter);
  s("influence_radius", c.influence_radius);
}

void visit_curriculum(Section& s, CurriculumConfig& c) {
  s("expand_probability", c.expand_probability);
  s("sigma_min", c.sigma_min);
  s("sigma_max", c.sigma_max);
  s("delta", c.delta);
  s("batch_size", c.batch_size);
  s("archive_cap", c.archive_cap);
  s("eval_episodes_per_task", c.eval_episodes_per_task);
  s("reevaluate_after", c.reevaluate_after);
}

void visit_eval(Section& s, EvalConfig& c) {
  s("policy", c.policy);
  s("scenario", c.scenario);
  s("episodes_per_seed", c.episodes_per_seed);
  s("seeds", c.seeds);
  s("workers", c.workers);
  s("radii", c.radii);
  s("grid", c.grid);
}

/// Shared traversal for both directions; exactly one of in/out is non-null.
void traverse(const json* in, json* out, SimConfig& cfg) {
  if (in && !in->is_object()) throw ConfigError("<root>", "expected a JSON object");
  if (in) {
    static const std::set<std::string> known{"env", "quad", "control", "evader", "policies", "curriculum", "eval"};
    for (const auto& [key, _] : in->items())
      if (!known.count(key)) throw ConfigError(key, "unknown section");
  }

  with_section(in, out, "env", [&](Section& s) { visit_env(s, cfg.parts.env); });

  QuadFields extra;
  if (out) {
    extra.arm = cfg.parts.quad.rotor_pos[0].head<2>().norm();
    extra.f_max = cfg.parts.quad.f_max;
  }
  with_section(in, out, "quad", [&](Section& s) { visit_quad(s, cfg.parts.quad, extra); });
  if (in) {
    if (!(extra.arm > 0)) throw ConfigError("quad.arm_length", "must be positive");
    if (!(extra.f_max > 0)) throw ConfigError("quad.f_max", "must be positive");
    cfg.parts.quad.set_x_layout(extra.arm);
    cfg.parts.quad.set_thrust_cap(extra.f_max);
  }

  with_section(in, out, "control", [&](Section& s) { visit_pid(s, cfg.parts.pid); });
  with_section(in, out, "evader", [&](Section& s) { visit_evader(s, cfg.parts.evader); });

  const json* pin = in && in->contains("policies") ? &in->at("policies") : nullptr;
  json* pout = out ? &(*out)["policies"] : nullptr;
  if (pout) *pout = json::object();
  if (pin && !pin->is_object()) throw ConfigError("policies", "expected an object");
  with_subsection(pin, pout, "policies", "angelani", [&](Section& s) { visit_angelani(s, cfg.policies.angelani); });
  with_subsection(pin, pout, "policies", "janosov", [&](Section& s) { visit_janosov(s, cfg.policies.janosov); });
  with_subsection(pin, pout, "policies", "apf", [&](Section& s) { visit_apf(s, cfg.policies.apf); });
  if (pin)
    for (const auto& [key, _] : pin->items())
      if (key != "angelani" && key != "janosov" && key != "apf") throw ConfigError("policies." + key, "unknown policy");

  with_section(in, out, "curriculum", [&](Section& s) { visit_curriculum(s, cfg.curriculum); });
  with_section(in, out, "eval", [&](Section& s) { visit_eval(s, cfg.eval); });
}

}  // namespace

SimConfig config_from_json(const json& doc) {
  SimConfig cfg;
  traverse(&doc, nullptr, cfg);
  // The evader speed lives in env; the evader section does not duplicate it.
  cfg.parts.evader.speed = cfg.parts.env.evader_speed;
  cfg.parts.env.validate();
  cfg.parts.evader.validate();
  try {
    cfg.parts.quad.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("quad", e.what());
  }
  if (!cfg.parts.pid.valid()) throw ConfigError("control", "gains must be finite and i_limit positive");
  cfg.curriculum.validate();
  if (cfg.eval.episodes_per_seed < 1) throw ConfigError("eval.episodes_per_seed", "must be at least 1");
  if (cfg.eval.seeds.empty()) throw ConfigError("eval.seeds", "need at least one seed");
  if (cfg.eval.workers < 1) throw ConfigError("eval.workers", "must be at least 1");
  return cfg;
}

json config_to_json(const SimConfig& cfg) {
  json doc = json::object();
  SimConfig copy = cfg;
  traverse(nullptr, &doc, copy);
  return doc;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void set_policy_param(PoliciesConfig& cfg, const std::string& key, double value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError(key, "expected <policy>.<field>");
  const std::string policy = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  json patch = {{field, value}};
  auto apply = [&](auto visit, auto& target) {
    Section s(&patch, nullptr, "policies." + policy);
    visit(s, target);
    s.reject_unknown();
  };
  if (policy == "angelani") apply(visit_angelani, cfg.angelani);
  else if (policy == "janosov") apply(visit_janosov, cfg.janosov);
  else if (policy == "apf") apply(visit_apf, cfg.apf);
  else throw ConfigError("policies." + policy, "unknown policy");
}

json task_to_json(const TaskParams& task) {
  json obstacles = json::array();
  for (const Vec2& c : task.obstacles) obstacles.push_back({c.x(), c.y()});
  json pursuers = json::array();
  for (const Vec3& p : task.pursuer_starts) pursuers.push_back({p.x(), p.y(), p.z()});
  const Vec3& e = task.evader_start;
  return {{"obstacles", obstacles}, {"pursuer_starts", pursuers}, {"evader_start", {e.x(), e.y(), e.z()}}};
}

TaskParams task_from_json(const json& j) {
  auto vec = [](const json& a, std::size_t n, const char* what) {
    if (!a.is_array() || a.size() != n)
      throw std::invalid_argument(std::string(what) + ": expected an array of " + std::to_string(n));
    return a;
  };
  TaskParams task;
  for (const auto& c : j.at("obstacles")) {
    const json a = vec(c, 2, "obstacles");
    task.obstacles.emplace_back(a[0].get<double>(), a[1].get<double>());
  }
  for (const auto& p : j.at("pursuer_starts")) {
    const json a = vec(p, 3, "pursuer_starts");
    task.pursuer_starts.emplace_back(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  }
  const json e = vec(j.at("evader_start"), 3, "evader_start");
  task.evader_start = Vec3(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
  return task;
}

}  // namespace pursuit
