// Command-line front end. Exit codes: 0 success, 1 invalid input or
// configuration, 2 runtime failure.

#include "pursuit/config_io.hpp"
#include "pursuit/curriculum.hpp"
#include "pursuit/flat_env.hpp"
#include "pursuit/harness.hpp"
#include "pursuit/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace pursuit;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool json_out = false;
};

SimConfig load(const Common& c) { return c.config_path.empty() ? SimConfig{} : load_config(c.config_path); }

ScenarioSpec scenario_of(const std::string& name) {
  const auto s = parse_scenario(name);
  if (!s) throw InputError("unknown scenario '" + name + "'");
  return make_scenario(*s);
}

PolicyFactory policy_of(const std::string& name, const SimConfig& cfg) {
  try {
    return make_policy_factory(name, cfg.policies, cfg.parts);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

json metrics_json(const Metrics& m) {
  json seeds = json::array();
  for (const auto& s : m.per_seed)
    seeds.push_back({{"capture_rate", s.capture_rate},
                     {"capture_step", s.capture_step},
                     {"collision_rate", s.collision_rate},
                     {"episodes", s.episodes},
                     {"errors", s.errors}});
  return {{"capture_rate", {m.capture_rate, m.capture_rate_std}},
          {"capture_step", {m.capture_step, m.capture_step_std}},
          {"collision_rate", {m.collision_rate, m.collision_rate_std}},
          {"episodes", m.episodes},
          {"errors", m.errors},
          {"per_seed", seeds}};
}

std::string metrics_row(const Metrics& m) {
  return format_mean_std(m.capture_rate, m.capture_rate_std) + "  " +
         format_mean_std(m.capture_step, m.capture_step_std, 1) + "  " +
         format_mean_std(m.collision_rate, m.collision_rate_std, 4);
}

constexpr const char* kHeader = "capture_rate  capture_step  collision_rate";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-quadrotor pursuit-evasion simulator"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Base random seed");
  app.add_flag("--json", common.json_out, "Print machine-readable JSON");

  // evaluate
  std::string policy, scenario;
  int episodes = -1, workers = -1;
  std::vector<std::uint64_t> seeds;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a policy on a scenario");
  evaluate_cmd->add_option("--policy", policy, "angelani, janosov, apf, idle or hover");
  evaluate_cmd->add_option("--scenario", scenario, "wall, narrow_gap, random, passage, obstacle_free or uniform");
  evaluate_cmd->add_option("--episodes", episodes, "Episodes per seed")->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--seeds", seeds, "Evaluation seeds")->delimiter(',');
  evaluate_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  // radius-sweep
  std::vector<double> radii;
  auto* sweep_cmd = app.add_subcommand("radius-sweep", "Capture rate against capture radius, obstacle-free");
  sweep_cmd->add_option("--policy", policy);
  sweep_cmd->add_option("--radii", radii)->delimiter(',');
  sweep_cmd->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seeds", seeds)->delimiter(',');
  sweep_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // grid-search
  auto* grid_cmd = app.add_subcommand("grid-search", "Search heuristic hyperparameters over eval.grid");
  grid_cmd->add_option("--policy", policy);
  grid_cmd->add_option("--scenario", scenario);
  grid_cmd->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  grid_cmd->add_option("--seeds", seeds)->delimiter(',');
  grid_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // curriculum
  int iterations = 10;
  std::string evaluator_kind = "policy", out_dir;
  std::vector<double> band{0.4, 1.0};
  auto* curriculum_cmd = app.add_subcommand("curriculum", "Run the adaptive environment generator");
  curriculum_cmd->add_option("--iterations", iterations)->check(CLI::PositiveNumber);
  curriculum_cmd->add_option("--policy", policy);
  curriculum_cmd->add_option("--evaluator", evaluator_kind, "policy or distance")
      ->check(CLI::IsMember({"policy", "distance"}));
  curriculum_cmd->add_option("--distance-band", band, "near,far for the distance evaluator")
      ->delimiter(',')
      ->expected(2);
  curriculum_cmd->add_option("--out", out_dir, "Directory for archive.json and stats.csv");
  curriculum_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // export
  std::string out_path;
  auto* export_cmd = app.add_subcommand("export", "Export rollout trajectories as JSONL");
  export_cmd->add_option("--out", out_path)->required();
  export_cmd->add_option("--policy", policy);
  export_cmd->add_option("--scenario", scenario);
  export_cmd->add_option("--episodes", episodes)->check(CLI::PositiveNumber);

  // bench
  int bench_envs = 64, bench_steps = 1000;
  auto* bench_cmd = app.add_subcommand("bench", "Measure simulation throughput");
  bench_cmd->add_option("--envs", bench_envs)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--steps", bench_steps)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // layout
  auto* layout_cmd = app.add_subcommand("layout", "Print the observation layout descriptor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    SimConfig cfg = load(common);
    EvalConfig& ev = cfg.eval;
    if (!policy.empty()) ev.policy = policy;
    if (!scenario.empty()) ev.scenario = scenario;
    if (episodes > 0) ev.episodes_per_seed = episodes;
    if (!seeds.empty()) ev.seeds = seeds;
    if (workers > 0) ev.workers = workers;
    if (!radii.empty()) ev.radii = radii;
    const EvaluateOptions options{ev.episodes_per_seed, ev.seeds, ev.workers};

    if (*evaluate_cmd) {
      const Metrics m = evaluate(policy_of(ev.policy, cfg), scenario_of(ev.scenario), cfg.parts, options);
      if (common.json_out) {
        std::cout << json{{"policy", ev.policy}, {"scenario", ev.scenario}, {"metrics", metrics_json(m)}}.dump(2)
                  << '\n';
      } else {
        std::cout << ev.policy << " on " << ev.scenario << " (" << m.episodes << " episodes)\n"
                  << kHeader << '\n'
                  << metrics_row(m) << '\n';
        if (m.errors) std::cout << m.errors << " episodes ended in error\n";
      }
    } else if (*sweep_cmd) {
      const auto rows = radius_sweep(policy_of(ev.policy, cfg), cfg.parts, ev.radii, options);
      json out = json::array();
      if (!common.json_out) std::cout << "radius  " << kHeader << '\n';
      for (const auto& r : rows) {
        if (common.json_out)
          out.push_back({{"radius", r.radius}, {"metrics", metrics_json(r.metrics)}});
        else
          std::cout << r.radius << "  " << metrics_row(r.metrics) << '\n';
      }
      if (common.json_out) std::cout << out.dump(2) << '\n';
    } else if (*grid_cmd) {
      if (ev.grid.empty()) throw ConfigError("eval.grid", "grid-search needs at least one parameter");
      for (const auto& [key, values] : ev.grid) {
        PoliciesConfig probe = cfg.policies;
        if (values.empty()) throw ConfigError("eval.grid." + key, "no candidate values");
        set_policy_param(probe, key, values.front());
      }
      policy_of(ev.policy, cfg);
      const PolicyFamily family = [&](const ParamPoint& point) {
        PoliciesConfig pc = cfg.policies;
        for (const auto& [key, v] : point) set_policy_param(pc, key, v);
        return make_policy_factory(ev.policy, pc, cfg.parts);
      };
      const GridResult result = grid_search(family, ev.grid, scenario_of(ev.scenario), cfg.parts, options);
      json table = json::array();
      for (std::size_t i = 0; i < result.table.size(); ++i) {
        const auto& row = result.table[i];
        if (common.json_out) {
          table.push_back({{"params", row.params}, {"metrics", metrics_json(row.metrics)}});
        } else {
          for (const auto& [k, v] : row.params) std::cout << k << '=' << v << ' ';
          std::cout << " " << metrics_row(row.metrics) << (i == result.best ? "  <- best" : "") << '\n';
        }
      }
      if (common.json_out) std::cout << json{{"table", table}, {"best", result.best}}.dump(2) << '\n';
    } else if (*curriculum_cmd) {
      std::unique_ptr<TaskEvaluator> evaluator;
      if (evaluator_kind == "distance") {
        if (!(band[0] < band[1])) throw InputError("--distance-band needs near < far");
        evaluator = std::make_unique<DistanceThresholdEvaluator>(band[0], band[1]);
      } else {
        evaluator = std::make_unique<PolicyTaskEvaluator>(cfg.parts, policy_of(ev.policy, cfg), ev.workers);
      }
      const CurriculumResult result = curriculum_loop(*evaluator, cfg.curriculum, cfg.parts.env, iterations, common.seed);
      std::ostringstream csv;
      write_stats_csv(csv, result.stats);
      std::cout << csv.str();
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        save_archive(std::filesystem::path(out_dir) / "archive.json", result.archive, iterations);
        std::ofstream(std::filesystem::path(out_dir) / "stats.csv") << csv.str();
      }
    } else if (*export_cmd) {
      const int n = episodes > 0 ? episodes : 1;
      const ScenarioSpec spec = scenario_of(ev.scenario);
      const PolicyFactory factory = policy_of(ev.policy, cfg);
      Env env(cfg.parts);
      auto p = factory();
      std::vector<EpisodeTrace> traces;
      for (int e = 0; e < n; ++e) {
        const std::uint64_t s = episode_seed(common.seed, e);
        traces.push_back(record_episode(env, *p, build_scenario(spec, cfg.parts.env, s), s));
      }
      export_trajectories(traces, out_path);
      std::cout << "wrote " << traces.size() << " episodes to " << out_path << '\n';
    } else if (*bench_cmd) {
      const int w = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      const BenchReport r = run_bench(cfg.parts, bench_envs, bench_steps, w, common.seed);
      if (common.json_out)
        std::cout << json{{"envs", r.envs},
                          {"workers", r.workers},
                          {"ticks", r.ticks},
                          {"seconds", r.seconds},
                          {"ticks_per_second", r.ticks_per_second()}}
                         .dump(2)
                  << '\n';
      else
        std::cout << r.ticks << " ticks in " << r.seconds << " s on " << r.workers << " workers: "
                  << r.ticks_per_second() << " ticks/s\n";
    } else if (*layout_cmd) {
      std::cout << layout_descriptor(cfg.parts.env).dump(2) << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "invalid task: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
