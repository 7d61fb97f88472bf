#pragma once

#include <span>
#include <string>
#include <vector>

#include "hdnf/c2_service.hpp"
#include "hdnf/scenario.hpp"

namespace hdnf {

// K x K x levels lattice of cell-node centers; level L sits at z = L * delta_h
// so ground access (takeoff/landing) is representable at level 0.
struct LatticeSpec {
  int k = 0;
  double area_side_m = 0.0;
  double delta_h_m = 0.0;
  int levels = 0;

  static LatticeSpec from_scenario(const Scenario& scenario);

  int node_count() const { return k * k * levels; }
  double cell_m() const { return area_side_m / k; }
  int node_id(int level, int row, int col) const {
    return (level * k + row) * k + col;
  }
  int level_of(int id) const { return id / (k * k); }
  int row_of(int id) const { return (id / k) % k; }
  int col_of(int id) const { return id % k; }
  Position3D node_center(int id) const;
  // Nearest node center at the given level; ties resolve to the lower id.
  int nearest_node(const Position3D& p, int level) const;
};

// Best-server SINR cached for every lattice node of one deployment. Tests
// may fill sinr_linear directly to inject synthetic coverage fields.
struct SinrField {
  LatticeSpec lattice;
  std::vector<double> sinr_linear;
  double s_max = 0.0;
};

SinrField build_sinr_field(const LatticeSpec& lattice,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params,
                           bool include_interference = true);
SinrField build_sinr_field_serial(const LatticeSpec& lattice,
                                  std::span<const Position3D> deployment,
                                  const ChannelParams& params,
                                  bool include_interference = true);

inline constexpr double kPsiEpsilon = 1e-6;  // linear-domain slack on s_max

// Outage penalty: +inf below gamma_ctrl; 0 when the whole field is at the
// threshold (s_max within epsilon of gamma); else the normalized SINR gap.
double node_penalty(double sinr_linear, double gamma_ctrl_linear, double s_max,
                    double epsilon_psi = kPsiEpsilon);

double edge_cost(int from, int to, const SinrField& field,
                 const Scenario& scenario);

double heuristic(int node, int goal, const LatticeSpec& lattice,
                 double omega_e);

struct PathResult {
  bool found = false;
  std::vector<int> nodes;
  double cost = 0.0;
  std::vector<double> per_node_sinr_db;
  std::string failure_reason;  // set when !found
};

// A* with f = g + h, ties broken toward smaller g then smaller node id.
// Outage nodes are never expanded; an outage start or goal short-circuits.
PathResult find_path(int start, int goal, const SinrField& field,
                     const Scenario& scenario);

struct TrajectoryResult {
  bool success = false;
  Trajectory trajectory;                        // partial up to a failed leg
  std::vector<std::size_t> task_waypoint_index;  // per completed task
  double total_cost = 0.0;
  int failed_leg = -1;                          // 0-based, -1 when success
  std::string failure_reason;
};

// [depot, tasks..., depot] snapped to ground-level nodes, planned leg by leg
// and concatenated without duplicated junction nodes. A failed leg ends the
// mission there: the partial trajectory is kept and no return leg is added.
TrajectoryResult route_to_trajectory(std::span<const Task> sequence,
                                     const SinrField& field,
                                     const Scenario& scenario);
TrajectoryResult route_to_trajectory(std::span<const Task> sequence,
                                     std::span<const Position3D> deployment,
                                     const Scenario& scenario);

}  // namespace hdnf
