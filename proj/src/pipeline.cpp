#include "hdnf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "hdnf/errors.hpp"

namespace hdnf {

using nlohmann::json;

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

constexpr double kOutageTolDb = 1e-9;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

// Cumulative along-trajectory arrival times with hover-until-open waits.
// Window compliance is not re-checked here: a delivered task counts as
// served even if the realized 3D detour arrives late.
void fill_delivery_times(const TrajectoryResult& traj,
                         std::span<const Task> tasks, double v_max,
                         UavReport& report) {
  std::vector<double> cumulative(traj.trajectory.waypoints.size(), 0.0);
  for (std::size_t i = 1; i < traj.trajectory.waypoints.size(); ++i) {
    cumulative[i] = cumulative[i - 1] +
                    distance_m(traj.trajectory.waypoints[i - 1],
                               traj.trajectory.waypoints[i]);
  }
  double clock = 0.0;
  double prev_dist = 0.0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    report.task_ids.push_back(tasks[t].id);
    if (t < traj.task_waypoint_index.size()) {
      const double dist = cumulative[traj.task_waypoint_index[t]];
      clock += (dist - prev_dist) / v_max;
      prev_dist = dist;
      clock = std::max(clock, tasks[t].window_open_s);
      report.task_success.push_back(1);
      report.delivery_time_s.push_back(clock);
    } else {
      report.task_success.push_back(0);
      report.delivery_time_s.push_back(-1.0);
    }
  }
}

MetricsReport build_metrics(const Scenario& scenario, const RoutePlan& plan,
                            const Deployment& deployment,
                            std::span<const TrajectoryResult> trajectories) {
  MetricsReport m;
  m.tasks_total = static_cast<int>(scenario.tasks.size());
  m.deployed_bs = static_cast<int>(deployment.size());

  const SampleLayers layers = build_sample_layers(scenario);
  const RewardBreakdown rb =
      compute_reward(deployment.positions, scenario, layers);
  m.coverage = rb.metrics;
  m.c_conn = rb.c_conn;
  m.lambda2 = rb.lambda2;

  for (std::size_t u = 0; u < trajectories.size(); ++u) {
    const TrajectoryResult& traj = trajectories[u];
    UavReport r;
    r.uav = static_cast<int>(u);
    r.energy_j = traj.trajectory.energy_j;
    r.length_m = traj.trajectory.length_m;
    r.mission_complete = traj.success;
    r.failure_reason = traj.failure_reason;
    // A UAV without tasks never takes off; its parked depot waypoint does
    // not count toward outage.
    if (!plan.sequences[u].empty()) {
      for (double s : traj.trajectory.per_waypoint_sinr_db) {
        if (s < scenario.thresholds.gamma_ctrl_db - kOutageTolDb) {
          ++r.outage_slots;
        }
      }
    }
    fill_delivery_times(traj, plan.sequences[u], scenario.fleet.max_speed_mps,
                        r);
    for (char ok : r.task_success) {
      if (ok) ++m.tasks_succeeded;
    }
    m.outage_slots += r.outage_slots;
    m.total_energy_j += r.energy_j;
    m.per_uav.push_back(std::move(r));
  }
  m.task_success_rate =
      m.tasks_total > 0
          ? static_cast<double>(m.tasks_succeeded) / m.tasks_total
          : 0.0;
  m.objective_value = evaluate_objective(deployment, trajectories, scenario);
  return m;
}

}  // namespace

double evaluate_objective(const Deployment& deployment,
                          std::span<const TrajectoryResult> trajectories,
                          const Scenario& scenario) {
  const SampleLayers layers = build_sample_layers(scenario);
  const LayerMetrics cov =
      layer_metrics(layers, deployment.positions, scenario.channel,
                    scenario.thresholds, scenario.weights);
  double energy = 0.0;
  for (const TrajectoryResult& t : trajectories) {
    energy += t.trajectory.energy_j;
  }
  const Weights& w = scenario.weights;
  return w.omega_d * static_cast<double>(deployment.size()) +
         w.omega_e * energy -
         (w.gamma_t * cov.c_term + w.gamma_v * cov.c_vert +
          w.gamma_c * cov.c_corr);
}

double evaluate_objective(const RoutePlan& plan, const Deployment& deployment,
                          const Scenario& scenario) {
  const SinrField field =
      build_sinr_field(LatticeSpec::from_scenario(scenario),
                       deployment.positions, scenario.channel);
  std::vector<TrajectoryResult> trajectories;
  trajectories.reserve(plan.sequences.size());
  for (const auto& seq : plan.sequences) {
    trajectories.push_back(route_to_trajectory(seq, field, scenario));
  }
  return evaluate_objective(deployment, trajectories, scenario);
}

PipelineResult run_pipeline(const Scenario& scenario,
                            const DeploymentSource& source) {
  scenario.validate();
  PipelineResult out;
  AssignResult assign = assign_tasks(scenario);
  if (!assign.feasible) {
    out.feasible = false;
    out.metrics.stage_one_feasible = false;
    out.metrics.blocking_task_id = assign.blocking_task_id;
    out.metrics.tasks_total = static_cast<int>(scenario.tasks.size());
    return out;
  }
  out.feasible = true;
  out.plan = std::move(assign.plan);

  const double gate_th = scenario.thresholds.gate_threshold;
  auto from_policy = [&](const PolicyBundle& bundle) {
    Deployment dep =
        extract_deployment(bundle, scenario, out.plan, gate_th);
    out.deployment_initial = dep;
    if (source.prune && !dep.positions.empty()) {
      dep = prune_deployment(dep, scenario, source.prune_epsilon);
    }
    out.deployment = std::move(dep);
  };

  switch (source.kind) {
    case DeploymentSource::Kind::train: {
      TrainResult tr = train(scenario, out.plan, source.train_config);
      out.training_log = std::move(tr.log);
      from_policy(tr.bundle);
      out.trained_bundle = std::move(tr.bundle);
      break;
    }
    case DeploymentSource::Kind::checkpoint: {
      const PolicyBundle bundle = load_policy(source.checkpoint_path);
      from_policy(bundle);
      break;
    }
    case DeploymentSource::Kind::grid: {
      const int n = source.n_bs > 0 ? source.n_bs : scenario.max_bs;
      out.deployment = grid_baseline(scenario, n, source.grid_altitude_m);
      out.deployment_initial = out.deployment;
      break;
    }
    case DeploymentSource::Kind::random: {
      const int n = source.n_bs > 0 ? source.n_bs : scenario.max_bs;
      out.deployment = random_baseline(scenario, n, source.random_seed);
      out.deployment_initial = out.deployment;
      break;
    }
    case DeploymentSource::Kind::fixed: {
      for (const Position3D& p : source.fixed_deployment.positions) {
        const bool inside = p.x >= 0.0 && p.x <= scenario.area_side_m &&
                            p.y >= 0.0 && p.y <= scenario.area_side_m &&
                            p.z >= scenario.bs_altitude_min_m &&
                            p.z <= scenario.bs_altitude_max_m;
        if (!inside) {
          throw ConfigError(
              "fixed deployment position outside area or altitude band");
        }
      }
      out.deployment = source.fixed_deployment;
      out.deployment_initial = out.deployment;
      break;
    }
  }

  const SinrField field =
      build_sinr_field(LatticeSpec::from_scenario(scenario),
                       out.deployment.positions, scenario.channel);
  out.trajectories.reserve(out.plan.sequences.size());
  for (const auto& seq : out.plan.sequences) {
    out.trajectories.push_back(route_to_trajectory(seq, field, scenario));
  }
  out.metrics =
      build_metrics(scenario, out.plan, out.deployment, out.trajectories);
  return out;
}

void ExperimentSpec::validate() const {
  std::string bad;
  auto flag = [&bad](bool ok, const char* what) {
    if (!ok) {
      if (!bad.empty()) bad += "; ";
      bad += what;
    }
  };
  flag(!schemes.empty(), "schemes nonempty");
  for (const std::string& s : schemes) {
    flag(s == "hdnf" || s == "grid" || s == "flat2d" || s == "no_per" ||
             s == "no_shared",
         "scheme in {hdnf, grid, flat2d, no_per, no_shared}");
  }
  flag(!areas_m.empty(), "areas nonempty");
  flag(!seeds.empty(), "seeds nonempty");
  flag(!bs_budgets.empty(), "bs budgets nonempty");
  for (int n : bs_budgets) flag(n >= 1, "bs budgets >= 1");
  flag(num_tasks >= 1, "num_tasks >= 1");
  flag(prune_epsilon >= 0.0, "prune_epsilon >= 0");
  if (!bad.empty()) throw ConfigError("invalid experiment spec: " + bad);
  train.validate();
}

namespace {

DeploymentSource source_for_scheme(const std::string& scheme,
                                   const ExperimentSpec& spec, int n_bs,
                                   std::uint64_t seed) {
  DeploymentSource src;
  if (scheme == "grid") {
    src.kind = DeploymentSource::Kind::grid;
    src.n_bs = n_bs;
    src.grid_altitude_m = spec.grid_altitude_m;
    src.prune = false;
    return src;
  }
  src.kind = DeploymentSource::Kind::train;
  src.train_config = spec.train;
  src.train_config.seed = seed;
  src.train_config.flat2d = scheme == "flat2d";
  src.train_config.no_per = scheme == "no_per";
  src.train_config.no_shared_backbone = scheme == "no_shared";
  src.prune = true;
  src.prune_epsilon = spec.prune_epsilon;
  return src;
}

std::string sanitize_status(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

double quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

struct NumericColumns {
  std::vector<std::string> names;
  std::vector<std::function<double(const CellResult&)>> getters;
};

const NumericColumns& metric_columns() {
  static const NumericColumns cols = [] {
    NumericColumns c;
    auto add = [&c](const char* name,
                    std::function<double(const CellResult&)> get) {
      c.names.push_back(name);
      c.getters.push_back(std::move(get));
    };
    add("deployed_bs",
        [](const CellResult& r) { return double(r.metrics.deployed_bs); });
    add("tasks_total",
        [](const CellResult& r) { return double(r.metrics.tasks_total); });
    add("tasks_succeeded",
        [](const CellResult& r) { return double(r.metrics.tasks_succeeded); });
    add("success_rate",
        [](const CellResult& r) { return r.metrics.task_success_rate; });
    add("outage_slots",
        [](const CellResult& r) { return double(r.metrics.outage_slots); });
    add("total_energy_j",
        [](const CellResult& r) { return r.metrics.total_energy_j; });
    add("objective",
        [](const CellResult& r) { return r.metrics.objective_value; });
    add("c_term", [](const CellResult& r) { return r.metrics.coverage.c_term; });
    add("c_vert", [](const CellResult& r) { return r.metrics.coverage.c_vert; });
    add("c_corr", [](const CellResult& r) { return r.metrics.coverage.c_corr; });
    add("cbar_syn",
        [](const CellResult& r) { return r.metrics.coverage.cbar_syn; });
    add("c_conn", [](const CellResult& r) { return r.metrics.c_conn; });
    add("lambda2", [](const CellResult& r) { return r.metrics.lambda2; });
    return c;
  }();
  return cols;
}

}  // namespace

MatrixResult run_experiment_matrix(const ExperimentSpec& spec) {
  spec.validate();
  MatrixResult result;
  for (const std::string& scheme : spec.schemes) {
    for (double area : spec.areas_m) {
      for (int n_bs : spec.bs_budgets) {
        for (std::uint64_t seed : spec.seeds) {
          CellResult cell;
          cell.scheme = scheme;
          cell.area_m = area;
          cell.seed = seed;
          cell.n_bs = n_bs;
          try {
            json overrides = spec.scenario_overrides.empty()
                                 ? json::object()
                                 : json::parse(spec.scenario_overrides);
            overrides["max_bs"] = n_bs;
            const Scenario scenario = generate_scenario(
                seed, area, spec.num_tasks, overrides.dump());
            const DeploymentSource src =
                source_for_scheme(scheme, spec, n_bs, seed);
            const PipelineResult pr = run_pipeline(scenario, src);
            cell.metrics = pr.metrics;
            if (!pr.feasible) cell.status = "infeasible";
          } catch (const std::exception& e) {
            cell.status = sanitize_status(e.what());
          }
          result.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return result;
}

void write_results_csv(const MatrixResult& result, const std::string& path) {
  std::ofstream out = open_out(path);
  const NumericColumns& cols = metric_columns();
  out << "row,scheme,area_m,seed,n_bs,status";
  for (const std::string& name : cols.names) out << ',' << name;
  out << '\n';
  for (const CellResult& cell : result.cells) {
    out << "cell," << cell.scheme << ',' << format_sig9(cell.area_m) << ','
        << cell.seed << ',' << cell.n_bs << ',' << cell.status;
    for (const auto& get : cols.getters) out << ',' << format_sig9(get(cell));
    out << '\n';
  }

  // Aggregates over seeds, keyed by (scheme, area, n_bs), ok cells only.
  std::vector<std::tuple<std::string, double, int>> keys;
  for (const CellResult& cell : result.cells) {
    const auto key = std::make_tuple(cell.scheme, cell.area_m, cell.n_bs);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }
  for (const auto& [scheme, area, n_bs] : keys) {
    std::vector<const CellResult*> group;
    for (const CellResult& cell : result.cells) {
      if (cell.scheme == scheme && cell.area_m == area && cell.n_bs == n_bs &&
          cell.status == "ok") {
        group.push_back(&cell);
      }
    }
    if (group.empty()) continue;
    const char* kinds[] = {"mean", "q1", "median", "q3"};
    for (const char* kind : kinds) {
      out << kind << ',' << scheme << ',' << format_sig9(area) << ",," << n_bs
          << ',';
      for (std::size_t c = 0; c < cols.getters.size(); ++c) {
        std::vector<double> values;
        values.reserve(group.size());
        for (const CellResult* cell : group) {
          values.push_back(cols.getters[c](*cell));
        }
        std::sort(values.begin(), values.end());
        double v = 0.0;
        if (std::string_view(kind) == "mean") {
          for (double x : values) v += x;
          v /= static_cast<double>(values.size());
        } else if (std::string_view(kind) == "q1") {
          v = quantile(values, 0.25);
        } else if (std::string_view(kind) == "median") {
          v = quantile(values, 0.5);
        } else {
          v = quantile(values, 0.75);
        }
        out << ',' << format_sig9(v);
      }
      out << '\n';
    }
  }
}

MatrixResult read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results csv: " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
  };
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty results csv: " + path);
  const NumericColumns& cols = metric_columns();
  const std::vector<std::string> header = split(line);
  if (header.size() != 6 + cols.names.size() || header[0] != "row") {
    throw ConfigError("unrecognized results csv header: " + path);
  }
  for (std::size_t c = 0; c < cols.names.size(); ++c) {
    if (header[6 + c] != cols.names[c]) {
      throw ConfigError("unexpected results column '" + header[6 + c] + "'");
    }
  }
  MatrixResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.empty() || fields[0] != "cell") continue;  // skip aggregates
    if (fields.size() != header.size()) {
      throw ConfigError("malformed results row: " + line);
    }
    CellResult cell;
    cell.scheme = fields[1];
    cell.area_m = std::stod(fields[2]);
    cell.seed = std::stoull(fields[3]);
    cell.n_bs = std::stoi(fields[4]);
    cell.status = fields[5];
    MetricsReport& m = cell.metrics;
    std::size_t f = 6;
    m.deployed_bs = static_cast<int>(std::llround(std::stod(fields[f++])));
    m.tasks_total = static_cast<int>(std::llround(std::stod(fields[f++])));
    m.tasks_succeeded = static_cast<int>(std::llround(std::stod(fields[f++])));
    m.task_success_rate = std::stod(fields[f++]);
    m.outage_slots = static_cast<int>(std::llround(std::stod(fields[f++])));
    m.total_energy_j = std::stod(fields[f++]);
    m.objective_value = std::stod(fields[f++]);
    m.coverage.c_term = std::stod(fields[f++]);
    m.coverage.c_vert = std::stod(fields[f++]);
    m.coverage.c_corr = std::stod(fields[f++]);
    m.coverage.cbar_syn = std::stod(fields[f++]);
    m.c_conn = std::stod(fields[f++]);
    m.lambda2 = std::stod(fields[f++]);
    m.stage_one_feasible = cell.status != "infeasible";
    result.cells.push_back(std::move(cell));
  }
  return result;
}

void write_metrics_csv(const MetricsReport& metrics, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "stage_one_feasible,blocking_task_id,deployed_bs,tasks_total,"
         "tasks_succeeded,success_rate,outage_slots,total_energy_j,objective,"
         "c_term,c_vert,c_corr,cbar_syn,c_conn,lambda2\n";
  out << (metrics.stage_one_feasible ? 1 : 0) << ','
      << metrics.blocking_task_id << ',' << metrics.deployed_bs << ','
      << metrics.tasks_total << ',' << metrics.tasks_succeeded << ','
      << format_sig9(metrics.task_success_rate) << ',' << metrics.outage_slots
      << ',' << format_sig9(metrics.total_energy_j) << ','
      << format_sig9(metrics.objective_value) << ','
      << format_sig9(metrics.coverage.c_term) << ','
      << format_sig9(metrics.coverage.c_vert) << ','
      << format_sig9(metrics.coverage.c_corr) << ','
      << format_sig9(metrics.coverage.cbar_syn) << ','
      << format_sig9(metrics.c_conn) << ',' << format_sig9(metrics.lambda2)
      << '\n';
}

void write_per_uav_csv(const MetricsReport& metrics, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "uav,tasks,tasks_succeeded,energy_j,length_m,outage_slots,"
         "mission_complete,failure_reason\n";
  for (const UavReport& r : metrics.per_uav) {
    int ok = 0;
    for (char s : r.task_success) ok += s ? 1 : 0;
    out << r.uav << ',' << r.task_ids.size() << ',' << ok << ','
        << format_sig9(r.energy_j) << ',' << format_sig9(r.length_m) << ','
        << r.outage_slots << ',' << (r.mission_complete ? 1 : 0) << ','
        << sanitize_status(r.failure_reason) << '\n';
  }
}

void emit_convergence_csv(const std::vector<EpisodeLog>& log,
                          const std::string& path) {
  save_training_log(log, path);
}

void emit_metrics_vs_area_csv(const MatrixResult& result,
                              const std::string& path) {
  std::ofstream out = open_out(path);
  out << "scheme,area_m,n_bs,mean_deployed_bs,mean_success_rate,"
         "mean_outage_slots,mean_objective,mean_cbar_syn,mean_c_conn\n";
  std::vector<std::tuple<std::string, double, int>> keys;
  for (const CellResult& cell : result.cells) {
    const auto key = std::make_tuple(cell.scheme, cell.area_m, cell.n_bs);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }
  for (const auto& [scheme, area, n_bs] : keys) {
    double bs = 0, sr = 0, outage = 0, obj = 0, cbar = 0, conn = 0;
    int count = 0;
    for (const CellResult& cell : result.cells) {
      if (cell.scheme != scheme || cell.area_m != area || cell.n_bs != n_bs ||
          cell.status != "ok") {
        continue;
      }
      bs += cell.metrics.deployed_bs;
      sr += cell.metrics.task_success_rate;
      outage += cell.metrics.outage_slots;
      obj += cell.metrics.objective_value;
      cbar += cell.metrics.coverage.cbar_syn;
      conn += cell.metrics.c_conn;
      ++count;
    }
    if (count == 0) continue;
    const double n = count;
    out << scheme << ',' << format_sig9(area) << ',' << n_bs << ','
        << format_sig9(bs / n) << ',' << format_sig9(sr / n) << ','
        << format_sig9(outage / n) << ',' << format_sig9(obj / n) << ','
        << format_sig9(cbar / n) << ',' << format_sig9(conn / n) << '\n';
  }
}

void emit_boxplot_csv(const MatrixResult& result, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "scheme,area_m,n_bs,metric,min,q1,median,q3,max,mean\n";
  const char* metrics[] = {"objective", "success_rate", "deployed_bs",
                           "outage_slots", "total_energy_j"};
  const NumericColumns& cols = metric_columns();
  std::vector<std::tuple<std::string, double, int>> keys;
  for (const CellResult& cell : result.cells) {
    const auto key = std::make_tuple(cell.scheme, cell.area_m, cell.n_bs);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }
  for (const auto& [scheme, area, n_bs] : keys) {
    for (const char* metric : metrics) {
      const auto it =
          std::find(cols.names.begin(), cols.names.end(), metric);
      const auto& get = cols.getters[it - cols.names.begin()];
      std::vector<double> values;
      for (const CellResult& cell : result.cells) {
        if (cell.scheme == scheme && cell.area_m == area &&
            cell.n_bs == n_bs && cell.status == "ok") {
          values.push_back(get(cell));
        }
      }
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      out << scheme << ',' << format_sig9(area) << ',' << n_bs << ','
          << metric << ',' << format_sig9(values.front()) << ','
          << format_sig9(quantile(values, 0.25)) << ','
          << format_sig9(quantile(values, 0.5)) << ','
          << format_sig9(quantile(values, 0.75)) << ','
          << format_sig9(values.back()) << ',' << format_sig9(mean) << '\n';
    }
  }
}

void emit_weight_sweep_csv(const Scenario& scenario,
                           std::span<const Position3D> deployment, int steps,
                           const std::string& path) {
  if (steps < 1) {
    throw std::invalid_argument("emit_weight_sweep_csv: steps must be >= 1");
  }
  std::ofstream out = open_out(path);
  out << "omega_t,omega_v,omega_c,cbar_syn,cbar_t,cbar_v,cbar_c\n";
  const SampleLayers layers = build_sample_layers(scenario);
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; b <= steps - a; ++b) {
      Weights w = scenario.weights;
      w.omega_t = static_cast<double>(a) / steps;
      w.omega_v = static_cast<double>(b) / steps;
      w.omega_c = 1.0 - w.omega_t - w.omega_v;
      const LayerMetrics m = layer_metrics(layers, deployment,
                                           scenario.channel,
                                           scenario.thresholds, w);
      out << format_sig9(w.omega_t) << ',' << format_sig9(w.omega_v) << ','
          << format_sig9(w.omega_c) << ',' << format_sig9(m.cbar_syn) << ','
          << format_sig9(m.cbar_t) << ',' << format_sig9(m.cbar_v) << ','
          << format_sig9(m.cbar_c) << '\n';
    }
  }
}

void emit_coverage_heatmap_csv(const Scenario& scenario,
                               std::span<const Position3D> deployment,
                               double altitude_m, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "row,col,x_m,y_m,sinr_db\n";
  const int k = scenario.sampling.grid_k;
  const double w = scenario.area_side_m / k;
  std::vector<Position3D> points;
  points.reserve(static_cast<std::size_t>(k) * k);
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < k; ++col) {
      points.push_back({(col + 0.5) * w, (row + 0.5) * w, altitude_m});
    }
  }
  const std::vector<double> sinr =
      best_sinr_at_points(points, deployment, scenario.channel);
  std::size_t i = 0;
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < k; ++col, ++i) {
      out << row << ',' << col << ',' << format_sig9(points[i].x) << ','
          << format_sig9(points[i].y) << ','
          << format_sig9(linear_to_db(sinr[i])) << '\n';
    }
  }
}

std::vector<std::string> emit_trajectories_csv(const PipelineResult& result,
                                               const std::string& prefix) {
  std::vector<std::string> paths;
  for (std::size_t u = 0; u < result.trajectories.size(); ++u) {
    const std::string path = prefix + "_uav" + std::to_string(u) + ".csv";
    std::ofstream out = open_out(path);
    out << "x_m,y_m,z_m,sinr_db\n";
    const Trajectory& t = result.trajectories[u].trajectory;
    for (std::size_t i = 0; i < t.waypoints.size(); ++i) {
      out << format_sig9(t.waypoints[i].x) << ','
          << format_sig9(t.waypoints[i].y) << ','
          << format_sig9(t.waypoints[i].z) << ','
          << format_sig9(t.per_waypoint_sinr_db[i]) << '\n';
    }
    paths.push_back(path);
  }
  return paths;
}

void write_manifest(const std::string& path, const Scenario& scenario,
                    const json& extra) {
  json j;
  j["format_version"] = 1;
  j["tool"] = "hdnf";
  j["tool_version"] = "1.0.0";
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(serialize_scenario(scenario))));
  j["scenario_hash_fnv1a64"] = hash;
  j["rng_seed"] = scenario.rng_seed;
  j["area_side_m"] = scenario.area_side_m;
  j["num_tasks"] = scenario.tasks.size();
  for (const auto& [key, value] : extra.items()) j[key] = value;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace hdnf
