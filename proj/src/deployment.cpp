#include "hdnf/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hdnf/errors.hpp"

namespace hdnf {

using nlohmann::json;

Eigen::VectorXd AgentObservation::flat() const {
  Eigen::VectorXd v(kObsDims);
  v(0) = own_position_norm.x;
  v(1) = own_position_norm.y;
  v(2) = own_position_norm.z;
  for (int m = 0; m < 4; ++m) v(3 + m) = metric_vector[m];
  for (int n = 0; n < kNumNeighbors; ++n) {
    v(7 + 3 * n) = neighbor_offsets[n].x;
    v(7 + 3 * n + 1) = neighbor_offsets[n].y;
    v(7 + 3 * n + 2) = neighbor_offsets[n].z;
  }
  v(kLayerIndicatorIndex) = layer_indicator;
  v(17) = guidance.x;
  v(18) = guidance.y;
  v(19) = guidance.z;
  return v;
}

Eigen::VectorXd pooled_grid_features(const GridMap& grid) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(kPooledFeatures);
  const int k = grid.k;
  if (k <= 0) return out;
  auto bin = [k](int i) {
    return static_cast<int>(static_cast<long>(i) * k / kPooledSide);
  };
  int idx = 0;
  for (int c = 0; c < 3; ++c) {
    for (int pr = 0; pr < kPooledSide; ++pr) {
      const int r0 = bin(pr);
      const int r1 = std::min(k, std::max(r0 + 1, bin(pr + 1)));
      for (int pc = 0; pc < kPooledSide; ++pc) {
        const int c0 = bin(pc);
        const int c1 = std::min(k, std::max(c0 + 1, bin(pc + 1)));
        double sum = 0.0;
        for (int r = r0; r < r1; ++r) {
          for (int cc = c0; cc < c1; ++cc) sum += grid.at(c, r, cc);
        }
        out(idx++) = sum / (static_cast<double>(r1 - r0) * (c1 - c0));
      }
    }
  }
  return out;
}

namespace {

std::vector<Position3D> dedup_exact(std::span<const Position3D> positions,
                                    const Position3D& depot) {
  std::vector<Position3D> nodes{depot};
  for (const Position3D& p : positions) {
    if (std::find(nodes.begin(), nodes.end(), p) == nodes.end()) {
      nodes.push_back(p);
    }
  }
  return nodes;
}

double topology_penalty(std::span<const Position3D> active,
                        const Weights& w, double h_max) {
  double penalty = 0.0;
  const double safe_sq = w.delta_safe_m * w.delta_safe_m;
  for (std::size_t i = 0; i < active.size(); ++i) {
    std::vector<double> dists;
    dists.reserve(active.size() - 1);
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (j != i) dists.push_back(distance_m(active[i], active[j]));
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t nn = std::min<std::size_t>(2, dists.size());
    for (std::size_t n = 0; n < nn; ++n) {
      penalty += w.eta_coll * std::exp(-(dists[n] * dists[n]) / safe_sq);
    }
    penalty += w.w_h * active[i].z / h_max;
  }
  return penalty;
}

}  // namespace

RewardBreakdown compute_reward(std::span<const Position3D> active,
                               const Scenario& scenario,
                               const SampleLayers& layers) {
  RewardBreakdown rb;
  rb.active_count = static_cast<int>(active.size());
  rb.metrics = layer_metrics(layers, active, scenario.channel,
                             scenario.thresholds, scenario.weights);
  const std::vector<Position3D> nodes = dedup_exact(active, scenario.depot);
  const BackhaulGraph graph = build_backhaul_graph(
      nodes, scenario.channel, scenario.thresholds.gamma_bh_db);
  const ConnectivityReport report =
      analyze_connectivity(graph, scenario.thresholds.lambda_req);
  rb.lambda2 = report.lambda2;
  rb.c_conn = report.utility;

  const Weights& w = scenario.weights;
  rb.r_vol = w.gamma_t * rb.metrics.c_term + w.gamma_v * rb.metrics.c_vert +
             w.gamma_c * rb.metrics.c_corr;
  rb.r_net =
      w.lambda_conn * rb.c_conn + w.lambda_cap * (rb.metrics.cbar_syn - w.cbar_req);
  rb.r_topo = -topology_penalty(active, w, scenario.bs_altitude_max_m);
  rb.total = rb.r_vol + rb.r_net + rb.r_topo;
  return rb;
}

Environment::Environment(const Scenario& scenario, const RoutePlan& plan,
                         bool flat2d)
    : scenario_(scenario), flat2d_(flat2d) {
  scenario_.validate();
  if (plan.assignment.size() != static_cast<std::size_t>(scenario.fleet.num_delivery_uavs)) {
    throw ConfigError("environment: route plan does not match scenario fleet size");
  }
  std::size_t assigned = 0;
  for (const auto& seq : plan.sequences) assigned += seq.size();
  if (assigned != scenario.tasks.size()) {
    throw ConfigError("environment: route plan does not cover scenario tasks");
  }
  if (flat2d_) {
    scenario_.weights.gamma_v = 0.0;
    scenario_.weights.gamma_c = 0.0;
    scenario_.weights.omega_t = 1.0;
    scenario_.weights.omega_v = 0.0;
    scenario_.weights.omega_c = 0.0;
  }
  layers_ = build_sample_layers(scenario_);
}

EnvState Environment::make_state(std::vector<Position3D> positions,
                                 std::vector<double> gates) const {
  const double gate_th = scenario_.thresholds.gate_threshold;
  std::vector<Position3D> active;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (gates[i] >= gate_th) active.push_back(positions[i]);
  }

  EnvState state;
  state.positions = std::move(positions);
  state.gates = std::move(gates);
  state.reward = compute_reward(active, scenario_, layers_);
  state.grid = build_grid_map(layers_, active, scenario_.channel,
                              scenario_.thresholds.gamma_ctrl_db,
                              scenario_.sampling.grid_k, scenario_.area_side_m);
  if (flat2d_) {
    // Blank the corridor and vertical channels; only terminal demand remains.
    const std::size_t plane =
        static_cast<std::size_t>(state.grid.k) * state.grid.k;
    std::fill(state.grid.values.begin() + plane, state.grid.values.end(), 0.0);
  }

  const double area = scenario_.area_side_m;
  const double h_min = scenario_.bs_altitude_min_m;
  const double h_range = scenario_.bs_altitude_max_m - h_min;
  const double h_mid = h_min + 0.5 * h_range;
  const int n = static_cast<int>(state.positions.size());

  state.observations.resize(n);
  state.obs_matrix.resize(n, kObsDims);
  for (int i = 0; i < n; ++i) {
    AgentObservation& obs = state.observations[i];
    const Position3D& p = state.positions[i];
    obs.own_position_norm = {p.x / area, p.y / area, (p.z - h_min) / h_range};
    obs.metric_vector = {state.reward.metrics.c_term,
                         flat2d_ ? 0.0 : state.reward.metrics.c_vert,
                         flat2d_ ? 0.0 : state.reward.metrics.c_corr,
                         state.reward.c_conn};
    std::vector<std::pair<double, int>> others;
    others.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) others.emplace_back(distance_m(p, state.positions[j]), j);
    }
    std::sort(others.begin(), others.end());
    for (int s = 0; s < kNumNeighbors; ++s) {
      if (s < static_cast<int>(others.size())) {
        const Position3D& q = state.positions[others[s].second];
        obs.neighbor_offsets[s] = {(q.x - p.x) / area, (q.y - p.y) / area,
                                   (q.z - p.z) / h_range};
      } else {
        obs.neighbor_offsets[s] = {0.0, 0.0, 0.0};
      }
    }
    obs.layer_indicator = p.z > h_mid ? 1.0 : 0.0;
    obs.guidance =
        guidance_vector(p, state.grid, scenario_.fleet.cruise_altitude_m);
    state.obs_matrix.row(i) = obs.flat().transpose();
  }
  state.pooled = pooled_grid_features(state.grid);
  return state;
}

EnvState Environment::reset(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(0.0, scenario_.area_side_m);
  std::uniform_real_distribution<double> alt(scenario_.bs_altitude_min_m,
                                             scenario_.bs_altitude_max_m);
  const int n = num_agents();
  std::vector<Position3D> positions(n);
  for (int i = 0; i < n; ++i) {
    positions[i].x = xy(rng);
    positions[i].y = xy(rng);
    positions[i].z = alt(rng);
  }
  return make_state(std::move(positions), std::vector<double>(n, 0.0));
}

std::pair<RewardBreakdown, EnvState> Environment::step(
    const EnvState& state, std::span<const AgentAction> actions,
    double delta_t_s) const {
  const int n = num_agents();
  if (static_cast<int>(actions.size()) != n) {
    throw std::invalid_argument("env step: one action per agent required");
  }
  if (delta_t_s <= 0.0) {
    throw std::invalid_argument("env step: delta_t_s must be positive");
  }
  const double vmax = scenario_.fleet.max_speed_mps;
  std::vector<Position3D> positions(n);
  std::vector<double> gates(n);
  for (int i = 0; i < n; ++i) {
    const AgentAction& a = actions[i];
    const bool finite = std::isfinite(a.motion_command[0]) &&
                        std::isfinite(a.motion_command[1]) &&
                        std::isfinite(a.motion_command[2]) &&
                        std::isfinite(a.gate_score);
    if (!finite) {
      throw TrainingFault("non-finite action for agent " + std::to_string(i));
    }
    auto clip = [](double v, double lo, double hi) {
      return std::clamp(v, lo, hi);
    };
    const Position3D& p = state.positions[i];
    positions[i].x =
        clip(p.x + vmax * clip(a.motion_command[0], -1.0, 1.0) * delta_t_s, 0.0,
             scenario_.area_side_m);
    positions[i].y =
        clip(p.y + vmax * clip(a.motion_command[1], -1.0, 1.0) * delta_t_s, 0.0,
             scenario_.area_side_m);
    positions[i].z =
        clip(p.z + vmax * clip(a.motion_command[2], -1.0, 1.0) * delta_t_s,
             scenario_.bs_altitude_min_m, scenario_.bs_altitude_max_m);
    gates[i] = clip(a.gate_score, 0.0, 1.0);
  }
  EnvState next = make_state(std::move(positions), std::move(gates));
  return {next.reward, std::move(next)};
}

Deployment prune_deployment(const Deployment& deployment,
                            const Scenario& scenario, double epsilon) {
  if (deployment.positions.empty()) {
    throw std::invalid_argument("prune_deployment: empty deployment");
  }
  if (epsilon < 0.0) {
    throw std::invalid_argument("prune_deployment: epsilon must be >= 0");
  }
  const SampleLayers layers = build_sample_layers(scenario);
  auto cbar_syn = [&](std::span<const Position3D> positions) {
    return layer_metrics(layers, positions, scenario.channel,
                         scenario.thresholds, scenario.weights)
        .cbar_syn;
  };
  auto conn_utility = [&](std::span<const Position3D> positions) {
    const std::vector<Position3D> nodes =
        dedup_exact(positions, scenario.depot);
    const BackhaulGraph graph = build_backhaul_graph(
        nodes, scenario.channel, scenario.thresholds.gamma_bh_db);
    return analyze_connectivity(graph, scenario.thresholds.lambda_req).utility;
  };

  const std::size_t n = deployment.positions.size();
  const double cbar_init = cbar_syn(deployment.positions);

  // Candidate scan order: ascending drop in Cbar_syn upon sole removal from
  // the *initial* deployment, ties toward the lower index.
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    std::vector<Position3D> without;
    without.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != b) without.push_back(deployment.positions[j]);
    }
    order.emplace_back(cbar_init - cbar_syn(without), b);
  }
  std::sort(order.begin(), order.end());

  std::vector<bool> removed(n, false);
  for (const auto& [drop, b] : order) {
    std::vector<Position3D> temp;
    temp.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != b && !removed[j]) temp.push_back(deployment.positions[j]);
    }
    if (temp.empty()) continue;
    if (conn_utility(temp) == 1.0 && cbar_syn(temp) >= cbar_init - epsilon) {
      removed[b] = true;
    }
  }

  Deployment pruned;
  for (std::size_t j = 0; j < n; ++j) {
    if (!removed[j]) {
      pruned.positions.push_back(deployment.positions[j]);
      pruned.gate_scores.push_back(
          j < deployment.gate_scores.size() ? deployment.gate_scores[j] : 1.0);
    }
  }
  return pruned;
}

Deployment grid_baseline(const Scenario& scenario, int n_bs,
                         double altitude_m) {
  if (n_bs < 1) throw std::invalid_argument("grid_baseline: n_bs must be >= 1");
  if (altitude_m < scenario.bs_altitude_min_m ||
      altitude_m > scenario.bs_altitude_max_m) {
    throw std::invalid_argument(
        "grid_baseline: altitude outside the allowed band");
  }
  const int side = static_cast<int>(std::ceil(std::sqrt(n_bs)));
  const double w = scenario.area_side_m / side;
  Deployment dep;
  for (int r = 0; r < side && static_cast<int>(dep.positions.size()) < n_bs; ++r) {
    for (int c = 0; c < side && static_cast<int>(dep.positions.size()) < n_bs; ++c) {
      dep.positions.push_back({(c + 0.5) * w, (r + 0.5) * w, altitude_m});
      dep.gate_scores.push_back(1.0);
    }
  }
  return dep;
}

Deployment random_baseline(const Scenario& scenario, int n_bs,
                           std::uint64_t seed) {
  if (n_bs < 1) {
    throw std::invalid_argument("random_baseline: n_bs must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(0.0, scenario.area_side_m);
  std::uniform_real_distribution<double> alt(scenario.bs_altitude_min_m,
                                             scenario.bs_altitude_max_m);
  Deployment dep;
  for (int i = 0; i < n_bs; ++i) {
    Position3D p;
    p.x = xy(rng);
    p.y = xy(rng);
    p.z = alt(rng);
    dep.positions.push_back(p);
    dep.gate_scores.push_back(1.0);
  }
  return dep;
}

std::string serialize_deployment(const Deployment& deployment) {
  json j;
  j["format_version"] = 1;
  json positions = json::array();
  for (const Position3D& p : deployment.positions) {
    positions.push_back(json{{"x_m", p.x}, {"y_m", p.y}, {"z_m", p.z}});
  }
  j["positions"] = std::move(positions);
  j["gate_scores"] = deployment.gate_scores;
  return j.dump(2) + "\n";
}

Deployment parse_deployment(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("deployment: invalid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw ConfigError("deployment: unsupported or missing format_version");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "format_version" && key != "positions" && key != "gate_scores") {
      throw ConfigError("unknown key '" + key + "' in deployment");
    }
  }
  Deployment dep;
  try {
    for (const json& p : j.at("positions")) {
      for (const auto& [key, value] : p.items()) {
        (void)value;
        if (key != "x_m" && key != "y_m" && key != "z_m") {
          throw ConfigError("unknown key '" + key + "' in deployment position");
        }
      }
      dep.positions.push_back({p.at("x_m").get<double>(),
                               p.at("y_m").get<double>(),
                               p.at("z_m").get<double>()});
    }
    dep.gate_scores = j.at("gate_scores").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("deployment: ") + e.what());
  }
  if (dep.gate_scores.size() != dep.positions.size()) {
    throw ConfigError("deployment: gate_scores and positions length mismatch");
  }
  return dep;
}

void save_deployment(const Deployment& deployment, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write deployment file: " + path);
  out << serialize_deployment(deployment);
}

Deployment load_deployment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open deployment file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_deployment(ss.str());
}

}  // namespace hdnf
