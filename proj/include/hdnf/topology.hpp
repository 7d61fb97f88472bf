#pragma once

#include <vector>

#include "hdnf/channel.hpp"

namespace hdnf {

// Undirected backhaul graph over depot (node 0) plus UAV-BSs.
struct BackhaulGraph {
  std::vector<Position3D> node_positions;
  std::vector<std::vector<int>> adjacency;  // symmetric, zero diagonal
  std::vector<int> degrees;

  std::size_t size() const { return node_positions.size(); }
  std::vector<std::vector<int>> laplacian() const;
};

struct ConnectivityReport {
  double lambda2 = 0.0;
  double utility = 0.0;  // min(1, lambda2 / lambda_req)
  bool is_connected = false;
};

// Edge (j,k) is present iff both directional SINRs clear gamma_bh_db, with
// every other node acting as an interferer. Throws std::invalid_argument on
// duplicate positions or an empty node list.
BackhaulGraph build_backhaul_graph(std::span<const Position3D> nodes,
                                   const ChannelParams& params,
                                   double gamma_bh_db);

// Second-smallest Laplacian eigenvalue; values within 1e-9 of zero are
// reported as exactly 0. A single-node graph reports 0 by convention.
double algebraic_connectivity(const BackhaulGraph& graph);

// Throws std::invalid_argument for lambda_req <= 0.
double connectivity_utility(double lambda2, double lambda_req);

ConnectivityReport analyze_connectivity(const BackhaulGraph& graph,
                                        double lambda_req);

}  // namespace hdnf
