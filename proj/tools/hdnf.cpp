// Command-line front end: scenario generation, task assignment, deployment
// training/baselines, trajectory planning, the end-to-end pipeline, the
// benchmark/experiment matrix, and plot-data emission.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdnf/c2_service.hpp"
#include "hdnf/errors.hpp"
#include "hdnf/matd3.hpp"
#include "hdnf/pipeline.hpp"
#include "hdnf/planner.hpp"
#include "hdnf/scenario.hpp"
#include "hdnf/tasking.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hdnf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::string config_path;  // optional training-config JSON
  std::string outdir = ".";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "--overrides @file" reads the fragment from disk.
std::string resolve_overrides(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return read_file(arg.substr(1));
  return arg;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_outdir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

TrainConfig base_train_config(const Globals& g) {
  TrainConfig cfg;
  if (!g.config_path.empty()) {
    cfg = TrainConfig::from_json(json::parse(read_file(g.config_path)));
  }
  return cfg;
}

// Train-config knobs shared by `train` and `run --train`. Values read from
// the global --config file first; explicit flags win.
struct TrainFlags {
  int episodes = 0, steps = 0, batch = 0, warmup = 0, policy_delay = 0;
  std::size_t buffer = 0;
  double gamma = 0, tau = 0, sigma = 0, actor_lr = 0, critic_lr = 0,
         delta_t = 0;
  bool no_per = false, no_shared = false, flat2d = false;

  void add_to(CLI::App* sub) {
    sub->add_option("--episodes", episodes, "Training episodes");
    sub->add_option("--steps", steps, "Steps per episode");
    sub->add_option("--batch", batch, "Replay batch size");
    sub->add_option("--buffer", buffer, "Replay capacity");
    sub->add_option("--warmup", warmup, "Transitions before updates start");
    sub->add_option("--policy-delay", policy_delay, "Critic updates per actor update");
    sub->add_option("--gamma", gamma, "Discount factor");
    sub->add_option("--tau", tau, "Soft target update rate");
    sub->add_option("--sigma", sigma, "Exploration noise std");
    sub->add_option("--actor-lr", actor_lr, "Actor learning rate");
    sub->add_option("--critic-lr", critic_lr, "Critic learning rate");
    sub->add_option("--delta-t", delta_t, "Environment step length [s]");
    sub->add_flag("--no-per", no_per, "Uniform replay ablation");
    sub->add_flag("--no-shared", no_shared, "Per-agent backbone ablation");
    sub->add_flag("--flat2d", flat2d, "Terminal-layer-only ablation");
  }

  TrainConfig apply(CLI::App* sub, TrainConfig cfg,
                    std::uint64_t seed) const {
    cfg.seed = seed;
    if (sub->count("--episodes")) cfg.episodes = episodes;
    if (sub->count("--steps")) cfg.steps_per_episode = steps;
    if (sub->count("--batch")) cfg.batch_size = batch;
    if (sub->count("--buffer")) cfg.buffer_capacity = buffer;
    if (sub->count("--warmup")) cfg.warmup_transitions = warmup;
    if (sub->count("--policy-delay")) cfg.policy_delay = policy_delay;
    if (sub->count("--gamma")) cfg.gamma = gamma;
    if (sub->count("--tau")) cfg.tau = tau;
    if (sub->count("--sigma")) cfg.exploration_sigma = sigma;
    if (sub->count("--actor-lr")) cfg.actor_lr = actor_lr;
    if (sub->count("--critic-lr")) cfg.critic_lr = critic_lr;
    if (sub->count("--delta-t")) cfg.delta_t_s = delta_t;
    if (sub->count("--no-per")) cfg.no_per = true;
    if (sub->count("--no-shared")) cfg.no_shared_backbone = true;
    if (sub->count("--flat2d")) cfg.flat2d = true;
    return cfg;
  }
};

// Deployment-source flags shared by `deploy` and `run`.
struct SourceFlags {
  std::string policy_path;
  std::string baseline;  // grid | random
  int n_bs = 0;
  double altitude = 120.0;
  bool do_train = false;
  bool no_prune = false;
  double epsilon = 1e-6;
  TrainFlags train;

  void add_to(CLI::App* sub, bool with_train) {
    sub->add_option("--policy", policy_path, "Policy checkpoint to deploy from");
    sub->add_option("--baseline", baseline, "Baseline placement instead of a policy")
        ->check(CLI::IsMember({"grid", "random"}));
    sub->add_option("--n-bs", n_bs, "Baseline UAV-BS count (0 = scenario budget)");
    sub->add_option("--altitude", altitude, "Grid baseline altitude [m]")
        ->capture_default_str();
    if (with_train) {
      sub->add_flag("--train", do_train, "Train a fresh policy in-process");
      train.add_to(sub);
    }
    sub->add_flag("--no-prune", no_prune, "Skip redundancy pruning (policy sources)");
    sub->add_option("--prune-epsilon", epsilon, "Allowed synthetic-coverage drop when pruning")
        ->capture_default_str();
  }

  DeploymentSource build(CLI::App* sub, const Globals& g) const {
    const int picks = (policy_path.empty() ? 0 : 1) +
                      (baseline.empty() ? 0 : 1) + (do_train ? 1 : 0);
    if (picks != 1) {
      throw ConfigError(
          "exactly one of --policy, --baseline, --train must be given");
    }
    DeploymentSource src;
    src.prune = !no_prune;
    src.prune_epsilon = epsilon;
    src.n_bs = n_bs;
    src.grid_altitude_m = altitude;
    src.random_seed = g.seed;
    if (do_train) {
      src.kind = DeploymentSource::Kind::train;
      src.train_config = train.apply(sub, base_train_config(g), g.seed);
    } else if (!policy_path.empty()) {
      src.kind = DeploymentSource::Kind::checkpoint;
      src.checkpoint_path = policy_path;
    } else if (baseline == "grid") {
      src.kind = DeploymentSource::Kind::grid;
    } else {
      src.kind = DeploymentSource::Kind::random;
    }
    return src;
  }
};

void emit_manifest(const std::string& path, const Scenario& scenario,
                   const std::string& command,
                   const std::vector<std::string>& outputs,
                   const json& extra = json::object()) {
  json info = extra;
  info["command"] = command;
  json outs = json::array();
  for (const std::string& o : outputs) outs.push_back(fs::path(o).filename().string());
  info["outputs"] = outs;
  write_manifest(path, scenario, info);
}

RoutePlan plan_or_throw(const Scenario& scenario, const std::string& plan_path,
                        int* exit_code) {
  if (!plan_path.empty()) return load_route_plan(plan_path, scenario);
  AssignResult r = assign_tasks(scenario);
  if (!r.feasible) {
    std::cout << "infeasible: no insertion for task " << r.blocking_task_id
              << "\n";
    *exit_code = kExitInfeasible;
    return {};
  }
  return r.plan;
}

void print_metrics(const MetricsReport& m) {
  std::cout << "deployed_bs " << m.deployed_bs << "  success_rate "
            << format_sig9(m.task_success_rate) << "  outage_slots "
            << m.outage_slots << "  energy_j "
            << format_sig9(m.total_energy_j) << "  objective "
            << format_sig9(m.objective_value) << "\n"
            << "coverage c_term " << format_sig9(m.coverage.c_term)
            << "  c_vert " << format_sig9(m.coverage.c_vert) << "  c_corr "
            << format_sig9(m.coverage.c_corr) << "  cbar_syn "
            << format_sig9(m.coverage.cbar_syn) << "  c_conn "
            << format_sig9(m.c_conn) << "\n";
}

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  double area = 3000.0;
  int tasks = 30;
  std::string overrides;
  std::string out;
};

int cmd_generate(const Globals& g, const GenerateOpts& o) {
  ensure_outdir(g.outdir);
  const std::string out =
      o.out.empty() ? join_path(g.outdir, "scenario.json") : o.out;
  const Scenario scenario = generate_scenario(
      g.seed, o.area, o.tasks, resolve_overrides(o.overrides));
  save_scenario(scenario, out);
  emit_manifest(out + ".manifest.json", scenario, "generate", {out});
  std::cout << "wrote " << out << ": " << scenario.tasks.size()
            << " tasks, area " << format_sig9(scenario.area_side_m)
            << " m, fleet " << scenario.fleet.num_delivery_uavs
            << ", bs budget " << scenario.max_bs << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ assign

struct AssignOpts {
  std::string scenario;
  std::string out;
};

int cmd_assign(const Globals& g, const AssignOpts& o) {
  const Scenario scenario = load_scenario(o.scenario);
  const AssignResult result = assign_tasks(scenario);
  if (!result.feasible) {
    std::cout << "infeasible: no insertion for task "
              << result.blocking_task_id << "\n";
    return kExitInfeasible;
  }
  ensure_outdir(g.outdir);
  const std::string out =
      o.out.empty() ? join_path(g.outdir, "route_plan.json") : o.out;
  save_route_plan(result.plan, scenario, out);
  emit_manifest(out + ".manifest.json", scenario, "assign", {out});
  int used = 0;
  for (const auto& seq : result.plan.sequences) used += seq.empty() ? 0 : 1;
  std::cout << "wrote " << out << ": " << used << "/"
            << result.plan.sequences.size() << " UAVs used, estimated energy "
            << format_sig9(result.plan.total_estimated_energy_j) << " J ("
            << result.stats.candidate_evals << " candidate evaluations)\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string scenario;
  std::string plan;
  std::string out;
  std::string log;
  TrainFlags flags;
};

int cmd_train(const Globals& g, CLI::App* sub, const TrainOpts& o) {
  const Scenario scenario = load_scenario(o.scenario);
  int code = kExitOk;
  const RoutePlan plan = plan_or_throw(scenario, o.plan, &code);
  if (code != kExitOk) return code;
  const TrainConfig cfg = o.flags.apply(sub, base_train_config(g), g.seed);
  const TrainResult result = train(scenario, plan, cfg);
  ensure_outdir(g.outdir);
  const std::string out =
      o.out.empty() ? join_path(g.outdir, "policy.json") : o.out;
  const std::string log =
      o.log.empty() ? join_path(g.outdir, "training_log.csv") : o.log;
  save_policy(result.bundle, out);
  save_training_log(result.log, log);
  emit_manifest(out + ".manifest.json", scenario, "train", {out, log},
                {{"train_config", cfg.to_json()}});
  const double last = result.log.empty() ? 0.0 : result.log.back().reward;
  std::cout << "wrote " << out << " and " << log << ": " << cfg.episodes
            << " episodes, final episode reward " << format_sig9(last)
            << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ deploy

struct DeployOpts {
  std::string scenario;
  std::string plan;
  std::string out;
  SourceFlags source;
};

int cmd_deploy(const Globals& g, CLI::App* sub, const DeployOpts& o) {
  const Scenario scenario = load_scenario(o.scenario);
  int code = kExitOk;
  const RoutePlan plan = plan_or_throw(scenario, o.plan, &code);
  if (code != kExitOk) return code;
  const DeploymentSource src = o.source.build(sub, g);

  Deployment deployment;
  Deployment initial;
  if (src.kind == DeploymentSource::Kind::grid) {
    const int n = src.n_bs > 0 ? src.n_bs : scenario.max_bs;
    deployment = grid_baseline(scenario, n, src.grid_altitude_m);
    initial = deployment;
  } else if (src.kind == DeploymentSource::Kind::random) {
    const int n = src.n_bs > 0 ? src.n_bs : scenario.max_bs;
    deployment = random_baseline(scenario, n, src.random_seed);
    initial = deployment;
  } else {
    PolicyBundle bundle;
    if (src.kind == DeploymentSource::Kind::train) {
      bundle = train(scenario, plan, src.train_config).bundle;
    } else {
      bundle = load_policy(src.checkpoint_path);
    }
    initial = extract_deployment(bundle, scenario, plan,
                                 scenario.thresholds.gate_threshold);
    deployment = src.prune
                     ? prune_deployment(initial, scenario, src.prune_epsilon)
                     : initial;
  }

  ensure_outdir(g.outdir);
  const std::string out =
      o.out.empty() ? join_path(g.outdir, "deployment.json") : o.out;
  save_deployment(deployment, out);
  emit_manifest(out + ".manifest.json", scenario, "deploy", {out});
  const SampleLayers layers = build_sample_layers(scenario);
  const LayerMetrics metrics =
      layer_metrics(layers, deployment.positions, scenario.channel,
                    scenario.thresholds, scenario.weights);
  std::cout << "wrote " << out << ": " << deployment.size() << " UAV-BS ("
            << initial.size() << " before pruning), cbar_syn "
            << format_sig9(metrics.cbar_syn) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- plan

struct PlanOpts {
  std::string scenario;
  std::string plan;
  std::string deployment;
  std::string prefix;
};

int cmd_plan(const Globals& g, const PlanOpts& o) {
  const Scenario scenario = load_scenario(o.scenario);
  int code = kExitOk;
  const RoutePlan plan = plan_or_throw(scenario, o.plan, &code);
  if (code != kExitOk) return code;
  const Deployment deployment = load_deployment(o.deployment);

  DeploymentSource src;
  src.kind = DeploymentSource::Kind::fixed;
  src.fixed_deployment = deployment;
  src.prune = false;
  const PipelineResult result = run_pipeline(scenario, src);

  ensure_outdir(g.outdir);
  const std::string prefix =
      o.prefix.empty() ? join_path(g.outdir, "traj") : o.prefix;
  std::vector<std::string> outputs = emit_trajectories_csv(result, prefix);
  const std::string metrics_path = join_path(g.outdir, "metrics.csv");
  const std::string per_uav_path = join_path(g.outdir, "per_uav.csv");
  write_metrics_csv(result.metrics, metrics_path);
  write_per_uav_csv(result.metrics, per_uav_path);
  outputs.push_back(metrics_path);
  outputs.push_back(per_uav_path);
  emit_manifest(join_path(g.outdir, "manifest.json"), scenario, "plan",
                outputs);
  print_metrics(result.metrics);
  return kExitOk;
}

// --------------------------------------------------------------------- run

struct RunOpts {
  std::string scenario;
  SourceFlags source;
};

int cmd_run(const Globals& g, CLI::App* sub, const RunOpts& o) {
  const Scenario scenario = load_scenario(o.scenario);
  const DeploymentSource src = o.source.build(sub, g);
  const PipelineResult result = run_pipeline(scenario, src);
  ensure_outdir(g.outdir);

  std::vector<std::string> outputs;
  if (!result.feasible) {
    const std::string metrics_path = join_path(g.outdir, "metrics.csv");
    write_metrics_csv(result.metrics, metrics_path);
    outputs.push_back(metrics_path);
    emit_manifest(join_path(g.outdir, "manifest.json"), scenario, "run",
                  outputs);
    std::cout << "infeasible: no insertion for task "
              << result.metrics.blocking_task_id << "\n";
    return kExitInfeasible;
  }

  const std::string plan_path = join_path(g.outdir, "route_plan.json");
  save_route_plan(result.plan, scenario, plan_path);
  outputs.push_back(plan_path);
  const std::string dep_path = join_path(g.outdir, "deployment.json");
  save_deployment(result.deployment, dep_path);
  outputs.push_back(dep_path);
  if (result.deployment_initial.size() != result.deployment.size()) {
    const std::string init_path =
        join_path(g.outdir, "deployment_initial.json");
    save_deployment(result.deployment_initial, init_path);
    outputs.push_back(init_path);
  }
  if (result.trained_bundle.has_value()) {
    const std::string policy_path = join_path(g.outdir, "policy.json");
    save_policy(*result.trained_bundle, policy_path);
    outputs.push_back(policy_path);
  }
  if (!result.training_log.empty()) {
    const std::string log_path = join_path(g.outdir, "training_log.csv");
    save_training_log(result.training_log, log_path);
    outputs.push_back(log_path);
  }
  for (const std::string& f :
       emit_trajectories_csv(result, join_path(g.outdir, "traj"))) {
    outputs.push_back(f);
  }
  const std::string metrics_path = join_path(g.outdir, "metrics.csv");
  const std::string per_uav_path = join_path(g.outdir, "per_uav.csv");
  write_metrics_csv(result.metrics, metrics_path);
  write_per_uav_csv(result.metrics, per_uav_path);
  outputs.push_back(metrics_path);
  outputs.push_back(per_uav_path);
  emit_manifest(join_path(g.outdir, "manifest.json"), scenario, "run",
                outputs);
  print_metrics(result.metrics);
  return kExitOk;
}

// ------------------------------------------------------------------- bench

struct BenchOpts {
  int grid_k = 48;
  bool skip_kernels = false;
  bool skip_matrix = false;
};

void bench_kernels(int grid_k) {
  using clock = std::chrono::steady_clock;
  json overrides = {{"sampling", {{"grid_k", grid_k}}}};
  const Scenario scenario = generate_scenario(7, 2000.0, 12, overrides.dump());
  const Deployment deployment = random_baseline(scenario, 10, 11);
  const SampleLayers layers = build_sample_layers(scenario);
  const LatticeSpec lattice = LatticeSpec::from_scenario(scenario);

  auto time_ms = [](auto&& fn) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };

  GridMap grid_par, grid_ser;
  const double t_grid_par = time_ms([&] {
    grid_par = build_grid_map(layers, deployment.positions, scenario.channel,
                              scenario.thresholds.gamma_ctrl_db,
                              scenario.sampling.grid_k, scenario.area_side_m);
  });
  const double t_grid_ser = time_ms([&] {
    grid_ser = build_grid_map_serial(
        layers, deployment.positions, scenario.channel,
        scenario.thresholds.gamma_ctrl_db, scenario.sampling.grid_k,
        scenario.area_side_m);
  });
  double grid_diff = 0.0;
  for (std::size_t i = 0; i < grid_par.values.size(); ++i) {
    grid_diff = std::max(grid_diff,
                         std::abs(grid_par.values[i] - grid_ser.values[i]));
  }

  SinrField field_par, field_ser;
  const double t_field_par = time_ms([&] {
    field_par =
        build_sinr_field(lattice, deployment.positions, scenario.channel);
  });
  const double t_field_ser = time_ms([&] {
    field_ser = build_sinr_field_serial(lattice, deployment.positions,
                                        scenario.channel);
  });
  double field_diff = 0.0;
  for (std::size_t i = 0; i < field_par.sinr_linear.size(); ++i) {
    field_diff = std::max(
        field_diff,
        std::abs(field_par.sinr_linear[i] - field_ser.sinr_linear[i]));
  }

  std::cout << "kernel benchmark (timings are machine-dependent):\n"
            << "  grid map  " << grid_par.k << "x" << grid_par.k
            << " serial " << format_sig9(t_grid_ser) << " ms, parallel "
            << format_sig9(t_grid_par) << " ms, speedup "
            << format_sig9(t_grid_ser / std::max(t_grid_par, 1e-9))
            << "x, max |diff| " << format_sig9(grid_diff) << "\n"
            << "  sinr field " << field_par.lattice.node_count()
            << " nodes serial " << format_sig9(t_field_ser)
            << " ms, parallel " << format_sig9(t_field_par)
            << " ms, speedup "
            << format_sig9(t_field_ser / std::max(t_field_par, 1e-9))
            << "x, max |diff| " << format_sig9(field_diff) << "\n";
  if (grid_diff != 0.0 || field_diff != 0.0) {
    throw TrainingFault("parallel and serial kernels disagree");
  }
}

ExperimentSpec toy_matrix_spec() {
  ExperimentSpec spec;
  spec.schemes = {"hdnf", "grid"};
  spec.areas_m = {800.0};
  spec.seeds = {1, 2};
  spec.bs_budgets = {3};
  spec.num_tasks = 3;
  json overrides = {
      {"sampling", {{"grid_k", 20}, {"m_v", 4}, {"i_t", 5}}},
  };
  spec.scenario_overrides = overrides.dump();
  spec.train.episodes = 3;
  spec.train.steps_per_episode = 10;
  spec.train.batch_size = 16;
  spec.train.warmup_transitions = 16;
  spec.train.buffer_capacity = 2048;
  return spec;
}

int cmd_bench(const Globals& g, const BenchOpts& o) {
  if (!o.skip_kernels) bench_kernels(o.grid_k);
  if (o.skip_matrix) return kExitOk;

  ensure_outdir(g.outdir);
  const MatrixResult result = run_experiment_matrix(toy_matrix_spec());
  const std::string results_path = join_path(g.outdir, "results.csv");
  const std::string area_path = join_path(g.outdir, "metrics_vs_area.csv");
  const std::string box_path = join_path(g.outdir, "boxplot.csv");
  write_results_csv(result, results_path);
  emit_metrics_vs_area_csv(result, area_path);
  emit_boxplot_csv(result, box_path);

  const Scenario manifest_scenario = generate_scenario(1, 800.0, 3, "");
  emit_manifest(join_path(g.outdir, "manifest.json"), manifest_scenario,
                "bench", {results_path, area_path, box_path});
  int ok = 0;
  for (const CellResult& cell : result.cells) ok += cell.status == "ok";
  std::cout << "wrote " << results_path << ": " << result.cells.size()
            << " cells (" << ok << " ok)\n";
  return kExitOk;
}

// --------------------------------------------------------------- plot-data

struct PlotOpts {
  std::string kind;
  std::string log;
  std::string results;
  std::string scenario;
  std::string deployment;
  std::string plan;
  std::string out;
  std::string prefix;
  int steps = 10;
  double altitude = 120.0;
};

int cmd_plot_data(const Globals& g, const PlotOpts& o) {
  ensure_outdir(g.outdir);
  auto out_or = [&](const char* name) {
    return o.out.empty() ? join_path(g.outdir, name) : o.out;
  };
  auto need = [](const std::string& value, const char* flag) {
    if (value.empty()) {
      throw ConfigError(std::string("plot-data: missing ") + flag);
    }
  };

  if (o.kind == "convergence") {
    need(o.log, "--log");
    emit_convergence_csv(load_training_log(o.log), out_or("convergence.csv"));
  } else if (o.kind == "metrics_vs_area") {
    need(o.results, "--results");
    emit_metrics_vs_area_csv(read_results_csv(o.results),
                             out_or("metrics_vs_area.csv"));
  } else if (o.kind == "boxplot") {
    need(o.results, "--results");
    emit_boxplot_csv(read_results_csv(o.results), out_or("boxplot.csv"));
  } else if (o.kind == "weight_sweep") {
    need(o.scenario, "--scenario");
    need(o.deployment, "--deployment");
    const Scenario scenario = load_scenario(o.scenario);
    const Deployment deployment = load_deployment(o.deployment);
    emit_weight_sweep_csv(scenario, deployment.positions, o.steps,
                          out_or("weight_sweep.csv"));
  } else if (o.kind == "coverage_heatmap") {
    need(o.scenario, "--scenario");
    need(o.deployment, "--deployment");
    const Scenario scenario = load_scenario(o.scenario);
    const Deployment deployment = load_deployment(o.deployment);
    emit_coverage_heatmap_csv(scenario, deployment.positions, o.altitude,
                              out_or("coverage_heatmap.csv"));
  } else if (o.kind == "trajectories") {
    need(o.scenario, "--scenario");
    need(o.deployment, "--deployment");
    const Scenario scenario = load_scenario(o.scenario);
    int code = kExitOk;
    const RoutePlan plan = plan_or_throw(scenario, o.plan, &code);
    if (code != kExitOk) return code;
    DeploymentSource src;
    src.kind = DeploymentSource::Kind::fixed;
    src.fixed_deployment = load_deployment(o.deployment);
    src.prune = false;
    const PipelineResult result = run_pipeline(scenario, src);
    const std::string prefix =
        o.prefix.empty() ? join_path(g.outdir, "traj") : o.prefix;
    emit_trajectories_csv(result, prefix);
  } else {
    throw ConfigError("plot-data: unknown kind '" + o.kind + "'");
  }
  std::cout << "plot-data " << o.kind << " done\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-disaster UAV delivery toolkit: dual-network deployment "
               "and communication-aware trajectory planning"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--seed", globals.seed, "Master RNG seed")
      ->capture_default_str();
  app.add_option("--config", globals.config_path,
                 "Training-config JSON (base for train flags)");
  app.add_option("--outdir", globals.outdir, "Output directory")
      ->capture_default_str();

  int exit_code = kExitOk;

  GenerateOpts gen;
  CLI::App* sub_gen = app.add_subcommand("generate", "Generate a scenario file");
  sub_gen->fallthrough();
  sub_gen->add_option("--area", gen.area, "Area side length [m]")
      ->capture_default_str();
  sub_gen->add_option("--tasks", gen.tasks, "Number of delivery tasks")
      ->capture_default_str();
  sub_gen->add_option("--overrides", gen.overrides,
                      "JSON fragment merged over the generated scenario "
                      "(@file reads from disk)");
  sub_gen->add_option("-o,--out", gen.out, "Scenario output path");
  sub_gen->callback([&] { exit_code = cmd_generate(globals, gen); });

  AssignOpts asg;
  CLI::App* sub_asg =
      app.add_subcommand("assign", "Assign and order delivery tasks");
  sub_asg->fallthrough();
  sub_asg->add_option("--scenario", asg.scenario, "Scenario file")->required();
  sub_asg->add_option("-o,--out", asg.out, "Route-plan output path");
  sub_asg->callback([&] { exit_code = cmd_assign(globals, asg); });

  TrainOpts trn;
  CLI::App* sub_trn =
      app.add_subcommand("train", "Train the deployment policy");
  sub_trn->fallthrough();
  sub_trn->add_option("--scenario", trn.scenario, "Scenario file")->required();
  sub_trn->add_option("--plan", trn.plan,
                      "Route-plan file (default: assign in-process)");
  sub_trn->add_option("-o,--out", trn.out, "Policy checkpoint output path");
  sub_trn->add_option("--log", trn.log, "Training-log CSV output path");
  trn.flags.add_to(sub_trn);
  sub_trn->callback([&] { exit_code = cmd_train(globals, sub_trn, trn); });

  DeployOpts dep;
  CLI::App* sub_dep =
      app.add_subcommand("deploy", "Produce a UAV-BS deployment");
  sub_dep->fallthrough();
  sub_dep->add_option("--scenario", dep.scenario, "Scenario file")->required();
  sub_dep->add_option("--plan", dep.plan,
                      "Route-plan file (default: assign in-process)");
  sub_dep->add_option("-o,--out", dep.out, "Deployment output path");
  dep.source.add_to(sub_dep, /*with_train=*/true);
  sub_dep->callback([&] { exit_code = cmd_deploy(globals, sub_dep, dep); });

  PlanOpts pln;
  CLI::App* sub_pln = app.add_subcommand(
      "plan", "Plan communication-aware trajectories for a deployment");
  sub_pln->fallthrough();
  sub_pln->add_option("--scenario", pln.scenario, "Scenario file")->required();
  sub_pln->add_option("--plan", pln.plan,
                      "Route-plan file (default: assign in-process)");
  sub_pln->add_option("--deployment", pln.deployment, "Deployment file")
      ->required();
  sub_pln->add_option("--out-prefix", pln.prefix,
                      "Trajectory CSV prefix (default <outdir>/traj)");
  sub_pln->callback([&] { exit_code = cmd_plan(globals, pln); });

  RunOpts run;
  CLI::App* sub_run =
      app.add_subcommand("run", "Run the full pipeline end-to-end");
  sub_run->fallthrough();
  sub_run->add_option("--scenario", run.scenario, "Scenario file")->required();
  run.source.add_to(sub_run, /*with_train=*/true);
  sub_run->callback([&] { exit_code = cmd_run(globals, sub_run, run); });

  BenchOpts ben;
  CLI::App* sub_ben = app.add_subcommand(
      "bench", "Kernel benchmark plus a deterministic toy experiment matrix");
  sub_ben->fallthrough();
  sub_ben->add_option("--grid-k", ben.grid_k, "Benchmark grid resolution")
      ->capture_default_str();
  sub_ben->add_flag("--skip-kernels", ben.skip_kernels,
                    "Skip the serial-vs-parallel kernel comparison");
  sub_ben->add_flag("--skip-matrix", ben.skip_matrix,
                    "Skip the toy experiment matrix");
  sub_ben->callback([&] { exit_code = cmd_bench(globals, ben); });

  PlotOpts plt;
  CLI::App* sub_plt =
      app.add_subcommand("plot-data", "Emit tabular data for plotting");
  sub_plt->fallthrough();
  sub_plt->add_option("--kind", plt.kind, "Data kind")
      ->required()
      ->check(CLI::IsMember({"convergence", "metrics_vs_area", "boxplot",
                             "weight_sweep", "coverage_heatmap",
                             "trajectories"}));
  sub_plt->add_option("--log", plt.log, "Training-log CSV (convergence)");
  sub_plt->add_option("--results", plt.results,
                      "Results CSV (metrics_vs_area, boxplot)");
  sub_plt->add_option("--scenario", plt.scenario, "Scenario file");
  sub_plt->add_option("--deployment", plt.deployment, "Deployment file");
  sub_plt->add_option("--plan", plt.plan, "Route-plan file (trajectories)");
  sub_plt->add_option("-o,--out", plt.out, "Output path (single-file kinds)");
  sub_plt->add_option("--out-prefix", plt.prefix,
                      "Trajectory CSV prefix (trajectories)");
  sub_plt->add_option("--steps", plt.steps, "Simplex subdivisions (weight_sweep)")
      ->capture_default_str();
  sub_plt->add_option("--altitude", plt.altitude,
                      "Evaluation altitude [m] (coverage_heatmap)")
      ->capture_default_str();
  sub_plt->callback([&] { exit_code = cmd_plot_data(globals, plt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingFault& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return kExitRuntime;
  }
  return exit_code;
}
