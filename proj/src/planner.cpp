#include "hdnf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace hdnf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int snap_axis(double coord, double cell, int count) {
  // Cell-center index nearest to coord; exact midpoints go to the lower index.
  const double f = coord / cell - 0.5;
  const int c = static_cast<int>(std::ceil(f - 0.5));
  return std::clamp(c, 0, count - 1);
}

}  // namespace

LatticeSpec LatticeSpec::from_scenario(const Scenario& scenario) {
  LatticeSpec lattice;
  lattice.k = scenario.sampling.grid_k;
  lattice.area_side_m = scenario.area_side_m;
  lattice.delta_h_m = scenario.sampling.delta_h_m;
  lattice.levels = static_cast<int>(std::floor(
                       scenario.bs_altitude_max_m / lattice.delta_h_m + 1e-9)) +
                   1;
  return lattice;
}

Position3D LatticeSpec::node_center(int id) const {
  const double w = cell_m();
  return {(col_of(id) + 0.5) * w, (row_of(id) + 0.5) * w,
          level_of(id) * delta_h_m};
}

int LatticeSpec::nearest_node(const Position3D& p, int level) const {
  const double w = cell_m();
  const int col = snap_axis(p.x, w, k);
  const int row = snap_axis(p.y, w, k);
  return node_id(level, row, col);
}

SinrField build_sinr_field(const LatticeSpec& lattice,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params,
                           bool include_interference) {
  if (lattice.node_count() <= 0) {
    throw std::invalid_argument("build_sinr_field: empty lattice");
  }
  std::vector<Position3D> centers(lattice.node_count());
  for (int id = 0; id < lattice.node_count(); ++id) {
    centers[id] = lattice.node_center(id);
  }
  SinrField field;
  field.lattice = lattice;
  field.sinr_linear =
      best_sinr_at_points(centers, deployment, params, include_interference);
  field.s_max =
      *std::max_element(field.sinr_linear.begin(), field.sinr_linear.end());
  return field;
}

SinrField build_sinr_field_serial(const LatticeSpec& lattice,
                                  std::span<const Position3D> deployment,
                                  const ChannelParams& params,
                                  bool include_interference) {
  if (lattice.node_count() <= 0) {
    throw std::invalid_argument("build_sinr_field: empty lattice");
  }
  std::vector<Position3D> centers(lattice.node_count());
  for (int id = 0; id < lattice.node_count(); ++id) {
    centers[id] = lattice.node_center(id);
  }
  SinrField field;
  field.lattice = lattice;
  field.sinr_linear = best_sinr_at_points_serial(centers, deployment, params,
                                                 include_interference);
  field.s_max =
      *std::max_element(field.sinr_linear.begin(), field.sinr_linear.end());
  return field;
}

double node_penalty(double sinr_linear, double gamma_ctrl_linear, double s_max,
                    double epsilon_psi) {
  if (sinr_linear < gamma_ctrl_linear) return kInf;
  if (s_max <= gamma_ctrl_linear + epsilon_psi) return 0.0;
  return std::max(0.0, (s_max - sinr_linear) / (s_max - gamma_ctrl_linear));
}

double edge_cost(int from, int to, const SinrField& field,
                 const Scenario& scenario) {
  const double psi =
      node_penalty(field.sinr_linear[to],
                   db_to_linear(scenario.thresholds.gamma_ctrl_db), field.s_max);
  if (std::isinf(psi)) return kInf;
  const double dist = distance_m(field.lattice.node_center(from),
                                 field.lattice.node_center(to));
  return scenario.weights.omega_e * dist + scenario.weights.lambda_out * psi;
}

double heuristic(int node, int goal, const LatticeSpec& lattice,
                 double omega_e) {
  return omega_e * distance_m(lattice.node_center(node),
                              lattice.node_center(goal));
}

PathResult find_path(int start, int goal, const SinrField& field,
                     const Scenario& scenario) {
  const LatticeSpec& lat = field.lattice;
  const int n = lat.node_count();
  if (start < 0 || start >= n || goal < 0 || goal >= n) {
    throw std::invalid_argument("find_path: node id outside the lattice");
  }
  const double gamma = db_to_linear(scenario.thresholds.gamma_ctrl_db);
  PathResult result;
  if (field.sinr_linear[start] < gamma) {
    result.failure_reason = "start node in outage";
    return result;
  }
  if (field.sinr_linear[goal] < gamma) {
    result.failure_reason = "goal node in outage";
    return result;
  }
  const double omega_e = scenario.weights.omega_e;
  const double lambda_out = scenario.weights.lambda_out;

  std::vector<double> g(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  using Entry = std::tuple<double, double, int>;  // f, g, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  g[start] = 0.0;
  open.emplace(heuristic(start, goal, lat, omega_e), 0.0, start);

  while (!open.empty()) {
    const auto [f, gc, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == goal) break;
    const int level = lat.level_of(cur);
    const int row = lat.row_of(cur);
    const int col = lat.col_of(cur);
    const Position3D cur_center = lat.node_center(cur);
    for (int dl = -1; dl <= 1; ++dl) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dl == 0 && dr == 0 && dc == 0) continue;
          const int nl = level + dl;
          const int nr = row + dr;
          const int nc = col + dc;
          if (nl < 0 || nl >= lat.levels || nr < 0 || nr >= lat.k || nc < 0 ||
              nc >= lat.k) {
            continue;
          }
          const int nb = lat.node_id(nl, nr, nc);
          if (closed[nb]) continue;
          const double psi =
              node_penalty(field.sinr_linear[nb], gamma, field.s_max);
          if (std::isinf(psi)) continue;  // outage: never expanded
          const double cost =
              omega_e * distance_m(cur_center, lat.node_center(nb)) +
              lambda_out * psi;
          const double ng = g[cur] + cost;
          if (ng < g[nb]) {
            g[nb] = ng;
            parent[nb] = cur;
            open.emplace(ng + heuristic(nb, goal, lat, omega_e), ng, nb);
          }
        }
      }
    }
  }

  if (!closed[goal]) {
    result.failure_reason = "frontier exhausted";
    return result;
  }
  std::vector<int> nodes;
  for (int at = goal; at != -1; at = parent[at]) nodes.push_back(at);
  std::reverse(nodes.begin(), nodes.end());
  result.found = true;
  result.nodes = std::move(nodes);
  result.cost = g[goal];
  result.per_node_sinr_db.reserve(result.nodes.size());
  for (int id : result.nodes) {
    result.per_node_sinr_db.push_back(linear_to_db(field.sinr_linear[id]));
  }
  return result;
}

TrajectoryResult route_to_trajectory(std::span<const Task> sequence,
                                     const SinrField& field,
                                     const Scenario& scenario) {
  const LatticeSpec& lat = field.lattice;
  TrajectoryResult out;
  const int depot_node = lat.nearest_node(scenario.depot, 0);

  std::vector<int> waypoint_nodes;
  waypoint_nodes.push_back(depot_node);
  for (const Task& task : sequence) {
    waypoint_nodes.push_back(lat.nearest_node(task.location, 0));
  }
  waypoint_nodes.push_back(depot_node);

  auto append_node = [&](int id) {
    out.trajectory.waypoints.push_back(lat.node_center(id));
    out.trajectory.per_waypoint_sinr_db.push_back(
        linear_to_db(field.sinr_linear[id]));
  };

  if (sequence.empty()) {
    append_node(depot_node);
    out.success = true;
    return out;
  }

  double payload_total = 0.0;
  for (const Task& task : sequence) payload_total += task.payload_kg;

  const std::size_t legs = waypoint_nodes.size() - 1;
  for (std::size_t leg = 0; leg < legs; ++leg) {
    const PathResult path = find_path(waypoint_nodes[leg],
                                      waypoint_nodes[leg + 1], field, scenario);
    if (!path.found) {
      out.failed_leg = static_cast<int>(leg);
      out.failure_reason =
          "leg " + std::to_string(leg) + ": " + path.failure_reason;
      break;
    }
    out.total_cost += path.cost;
    const std::size_t from = out.trajectory.waypoints.empty() ? 0 : 1;
    for (std::size_t i = from; i < path.nodes.size(); ++i) {
      append_node(path.nodes[i]);
    }
    if (leg + 1 < waypoint_nodes.size() - 1) {
      out.task_waypoint_index.push_back(out.trajectory.waypoints.size() - 1);
    }
  }
  out.success = out.failed_leg < 0;

  double length = 0.0;
  for (std::size_t i = 1; i < out.trajectory.waypoints.size(); ++i) {
    length += distance_m(out.trajectory.waypoints[i - 1],
                         out.trajectory.waypoints[i]);
  }
  out.trajectory.length_m = length;
  out.trajectory.energy_j =
      scenario.fleet.energy_coeff_j_per_m_kg * length * payload_total;
  return out;
}

TrajectoryResult route_to_trajectory(std::span<const Task> sequence,
                                     std::span<const Position3D> deployment,
                                     const Scenario& scenario) {
  const SinrField field = build_sinr_field(LatticeSpec::from_scenario(scenario),
                                           deployment, scenario.channel);
  return route_to_trajectory(sequence, field, scenario);
}

}  // namespace hdnf
