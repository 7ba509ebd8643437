#include "pursuit/harness.hpp"

#include "pursuit/config_io.hpp"
#include "pursuit/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>

namespace pursuit {

SeedMetrics summarize_episodes(std::span<const EpisodeOutcome> episodes, int max_steps) {
  SeedMetrics m;
  m.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return m;
  double captures = 0.0, steps = 0.0, collision_rate = 0.0;
  for (const auto& e : episodes) {
    captures += e.capture_step ? 1.0 : 0.0;
    steps += e.capture_step ? *e.capture_step : max_steps;
    collision_rate += e.length > 0 ? static_cast<double>(e.collisions) / e.length : 0.0;
    m.errors += e.error ? 1 : 0;
  }
  const double n = static_cast<double>(episodes.size());
  m.capture_rate = captures / n;
  m.capture_step = steps / n;
  m.collision_rate = collision_rate / n;
  return m;
}

namespace {

std::pair<double, double> mean_std(std::span<const SeedMetrics> seeds, double SeedMetrics::*field) {
  if (seeds.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (const auto& s : seeds) sum += s.*field;
  const double mean = sum / seeds.size();
  double var = 0.0;
  for (const auto& s : seeds) var += (s.*field - mean) * (s.*field - mean);
  return {mean, std::sqrt(var / seeds.size())};
}

}  // namespace

Metrics aggregate(std::span<const SeedMetrics> seeds) {
  Metrics m;
  std::tie(m.capture_rate, m.capture_rate_std) = mean_std(seeds, &SeedMetrics::capture_rate);
  std::tie(m.capture_step, m.capture_step_std) = mean_std(seeds, &SeedMetrics::capture_step);
  std::tie(m.collision_rate, m.collision_rate_std) = mean_std(seeds, &SeedMetrics::collision_rate);
  for (const auto& s : seeds) {
    m.episodes += s.episodes;
    m.errors += s.errors;
  }
  m.per_seed.assign(seeds.begin(), seeds.end());
  return m;
}

std::string format_mean_std(double mean, double std, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f(%.*f)", precision, mean, precision, std);
  return buf;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return mix_seed(seed, static_cast<std::uint64_t>(episode));
}

EpisodeOutcome run_episode(Env& env, Policy& policy, const TaskParams& task, std::uint64_t seed) {
  EpisodeOutcome out;
  env.reset(task, seed);
  policy.reset(seed);
  try {
    while (!env.done()) {
      const StepResult r = apply_policy(env, policy);
      if (r.info.failed) out.error = true;
    }
  } catch (const std::exception&) {
    out.error = true;
  }
  out.length = env.step_count();
  out.collisions = env.total_collisions();
  if (env.captured() && !out.error) out.capture_step = env.step_count();
  return out;
}

Metrics evaluate(const PolicyFactory& factory, const TaskSource& tasks, const EnvParts& parts,
                 const EvaluateOptions& options) {
  if (options.episodes_per_seed < 1) throw std::invalid_argument("evaluate: episodes_per_seed must be >= 1");
  const std::size_t per_seed = static_cast<std::size_t>(options.episodes_per_seed);
  const std::size_t total = per_seed * options.seeds.size();
  std::vector<EpisodeOutcome> outcomes(total);

  const int workers = std::max(1, options.workers);
  std::vector<std::unique_ptr<Env>> envs(workers);
  std::vector<std::unique_ptr<Policy>> policies(workers);
  parallel_for(total, workers, [&](std::size_t i, int w) {
    if (!envs[w]) {
      envs[w] = std::make_unique<Env>(parts);
      policies[w] = factory();
    }
    const std::uint64_t seed = episode_seed(options.seeds[i / per_seed], static_cast<int>(i % per_seed));
    TaskParams task;
    try {
      task = tasks(seed);
    } catch (const std::exception&) {
      outcomes[i] = {std::nullopt, parts.env.max_steps, 0, true};
      return;
    }
    outcomes[i] = run_episode(*envs[w], *policies[w], task, seed);
  });

  std::vector<SeedMetrics> seeds;
  for (std::size_t s = 0; s < options.seeds.size(); ++s)
    seeds.push_back(summarize_episodes(std::span(outcomes).subspan(s * per_seed, per_seed), parts.env.max_steps));
  return aggregate(seeds);
}

Metrics evaluate(const PolicyFactory& factory, const ScenarioSpec& spec, const EnvParts& parts,
                 const EvaluateOptions& options) {
  const EnvConfig env = parts.env;
  return evaluate(factory, [&spec, env](std::uint64_t seed) { return build_scenario(spec, env, seed); }, parts,
                  options);
}

std::vector<RadiusRow> radius_sweep(const PolicyFactory& factory, const EnvParts& parts, std::span<const double> radii,
                                    const EvaluateOptions& options) {
  EnvConfig sampling = parts.env;
  for (double r : radii)
    if (r < 2 * parts.env.arena_radius) sampling.capture_radius = std::max(sampling.capture_radius, r);
  const ScenarioSpec spec = make_scenario(ScenarioName::obstacle_free);
  const TaskSource tasks = [spec, sampling](std::uint64_t seed) { return build_scenario(spec, sampling, seed); };

  std::vector<RadiusRow> rows;
  for (double r : radii) {
    EnvParts at = parts;
    at.env.capture_radius = r;
    rows.push_back({r, evaluate(factory, tasks, at, options)});
  }
  return rows;
}

std::vector<ParamPoint> expand_grid(const std::map<std::string, std::vector<double>>& grid) {
  std::vector<ParamPoint> points{ParamPoint{}};
  for (const auto& [key, values] : grid) {
    std::vector<ParamPoint> next;
    for (const auto& p : points)
      for (double v : values) {
        ParamPoint q = p;
        q[key] = v;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

std::size_t select_best(std::span<const GridRow> rows) {
  if (rows.empty()) throw std::invalid_argument("select_best: empty table");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Metrics& a = rows[i].metrics;
    const Metrics& b = rows[best].metrics;
    // Larger tuple is better: rate up, step down, collisions down.
    if (std::make_tuple(a.capture_rate, -a.capture_step, -a.collision_rate) >
        std::make_tuple(b.capture_rate, -b.capture_step, -b.collision_rate))
      best = i;
  }
  return best;
}

GridResult grid_search(const PolicyFamily& family, const std::map<std::string, std::vector<double>>& grid,
                       const ScenarioSpec& spec, const EnvParts& parts, const EvaluateOptions& options) {
  GridResult result;
  for (const ParamPoint& point : expand_grid(grid))
    result.table.push_back({point, evaluate(family(point), spec, parts, options)});
  result.best = select_best(result.table);
  return result;
}

EpisodeTrace record_episode(Env& env, Policy& policy, const TaskParams& task, std::uint64_t seed) {
  EpisodeTrace trace;
  trace.task = task;
  trace.seed = seed;
  trace.action_kind = policy.kind();
  env.reset(task, seed);
  policy.reset(seed);
  while (!env.done()) {
    const PolicyOutput out = policy.act(policy_input(env));
    TickTrace tick;
    StepResult r;
    if (policy.kind() == ActionKind::ctbr) {
      r = env.step(out.ctbr);
      for (const auto& a : out.ctbr) tick.actions.push_back(a.clamped().as_vector());
    } else {
      r = env.step_velocity(out.velocity);
      for (const auto& v : out.velocity) tick.actions.emplace_back(v.x(), v.y(), v.z(), 0.0);
    }
    tick.tick = env.step_count();
    tick.pursuers.assign(env.world().pursuers.begin(), env.world().pursuers.end());
    tick.evader_p = env.world().evader_p;
    tick.evader_v = env.world().evader_v;
    tick.detected = r.info.evader_detected;
    tick.reward = r.reward;
    trace.ticks.push_back(std::move(tick));
    if (r.info.failed) trace.outcome.error = true;
  }
  trace.outcome.length = env.step_count();
  trace.outcome.collisions = env.total_collisions();
  if (env.captured()) trace.outcome.capture_step = env.step_count();
  return trace;
}

namespace {

using nlohmann::json;

template <typename V>
json arr(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json reward_json(const RewardComponents& r) {
  return {{"capture", r.capture},
          {"distance", r.distance},
          {"collision", r.collision},
          {"smoothness", r.smoothness},
          {"total", r.total}};
}

}  // namespace

void export_trajectories(std::span<const EpisodeTrace> episodes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  json tasks = json::array();
  for (const auto& e : episodes)
    tasks.push_back({{"seed", e.seed},
                     {"task", task_to_json(e.task)},
                     {"length", e.outcome.length},
                     {"capture_step", e.outcome.capture_step ? json(*e.outcome.capture_step) : json(nullptr)}});
  const json header{{"type", "header"},
                    {"schema_version", kTrajectorySchemaVersion},
                    {"episodes", tasks},
                    {"action_layout", episodes.empty() || episodes.front().action_kind == ActionKind::ctbr
                                          ? "thrust,roll_rate,pitch_rate,yaw_rate"
                                          : "vx,vy,vz,unused"}};
  out << header.dump() << '\n';
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (const auto& t : episodes[e].ticks) {
      json pursuers = json::array();
      for (const auto& s : t.pursuers)
        pursuers.push_back({{"p", arr(s.p)},
                            {"q", json::array({s.q.w(), s.q.x(), s.q.y(), s.q.z()})},
                            {"v", arr(s.v)},
                            {"w", arr(s.w)}});
      json actions = json::array();
      for (const auto& a : t.actions) actions.push_back(arr(a));
      out << json{{"episode", e},
                  {"tick", t.tick},
                  {"pursuers", pursuers},
                  {"evader", {{"p", arr(t.evader_p)}, {"v", arr(t.evader_v)}}},
                  {"detected", t.detected},
                  {"reward", reward_json(t.reward)},
                  {"actions", actions}}
                 .dump()
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TraceLine> read_trajectory_rewards(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty trajectory file");
  const json header = json::parse(line);
  if (header.value("schema_version", 0) != kTrajectorySchemaVersion)
    throw std::runtime_error(path.string() + ": unsupported trajectory schema_version");
  std::vector<TraceLine> lines;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const json& r = j.at("reward");
    lines.push_back({j.at("episode").get<int>(), j.at("tick").get<int>(),
                     RewardComponents{r.at("capture").get<double>(), r.at("distance").get<double>(),
                                      r.at("collision").get<double>(), r.at("smoothness").get<double>(),
                                      r.at("total").get<double>()}});
  }
  return lines;
}

BenchReport run_bench(const EnvParts& parts, int envs, int steps, int workers, std::uint64_t seed) {
  const ScenarioSpec spec = make_scenario(ScenarioName::uniform);
  std::vector<TaskParams> tasks;
  for (int i = 0; i < envs; ++i) tasks.push_back(build_scenario(spec, parts.env, mix_seed(seed, i)));
  const PolicyFactory factory = make_policy_factory("hover", {}, parts);

  const auto start = std::chrono::steady_clock::now();
  parallel_for(static_cast<std::size_t>(envs), workers, [&](std::size_t i, int) {
    Env env(parts);
    auto policy = factory();
    env.reset(tasks[i], mix_seed(seed, i));
    for (int s = 0; s < steps; ++s) {
      if (env.done()) env.reset(tasks[i], mix_seed(seed, i));
      apply_policy(env, *policy);
    }
  });
  const auto stop = std::chrono::steady_clock::now();
  return {envs, workers, static_cast<long long>(envs) * steps, std::chrono::duration<double>(stop - start).count()};
}

}  // namespace pursuit
