#include "hdnf/topology.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace hdnf {

namespace {
constexpr double kZeroTol = 1e-9;
}

std::vector<std::vector<int>> BackhaulGraph::laplacian() const {
  const std::size_t n = size();
  std::vector<std::vector<int>> lap(n, std::vector<int>(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    lap[j][j] = degrees[j];
    for (std::size_t k = 0; k < n; ++k) {
      if (j != k && adjacency[j][k] == 1) lap[j][k] = -1;
    }
  }
  return lap;
}

BackhaulGraph build_backhaul_graph(std::span<const Position3D> nodes,
                                   const ChannelParams& params,
                                   double gamma_bh_db) {
  if (nodes.empty()) {
    throw std::invalid_argument("build_backhaul_graph: empty node list");
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t k = j + 1; k < nodes.size(); ++k) {
      if (nodes[j] == nodes[k]) {
        throw std::invalid_argument(
            "build_backhaul_graph: duplicate node positions");
      }
    }
  }

  const std::size_t n = nodes.size();
  BackhaulGraph graph;
  graph.node_positions.assign(nodes.begin(), nodes.end());
  graph.adjacency.assign(n, std::vector<int>(n, 0));
  graph.degrees.assign(n, 0);

  const double gamma_lin = db_to_linear(gamma_bh_db);
  const double noise = params.noise_power_w();

  // Received power matrix: power[j][k] = power of j's signal at node k.
  std::vector<std::vector<double>> power(n, std::vector<double>(n, 0.0));
  std::vector<double> total_at(n, 0.0);  // sum of all incoming powers
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      power[j][k] = rx_power_w(nodes[j], nodes[k], params);
      total_at[k] += power[j][k];
    }
  }

  // Directional SINR j->k: interferers are every node other than the
  // endpoints (the receiver does not jam itself).
  auto directional = [&](std::size_t j, std::size_t k) {
    const double interference = total_at[k] - power[j][k];
    return power[j][k] / (noise + interference);
  };

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double q = std::min(directional(j, k), directional(k, j));
      if (q >= gamma_lin) {
        graph.adjacency[j][k] = 1;
        graph.adjacency[k][j] = 1;
        ++graph.degrees[j];
        ++graph.degrees[k];
      }
    }
  }
  return graph;
}

double algebraic_connectivity(const BackhaulGraph& graph) {
  const std::size_t n = graph.size();
  if (n < 2) return 0.0;
  Eigen::MatrixXd lap(n, n);
  const auto lap_int = graph.laplacian();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      lap(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          static_cast<double>(lap_int[j][k]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("algebraic_connectivity: eigensolver failed");
  }
  double lambda2 = solver.eigenvalues()(1);  // ascending order
  if (std::abs(lambda2) <= kZeroTol) lambda2 = 0.0;
  return lambda2;
}

double connectivity_utility(double lambda2, double lambda_req) {
  if (lambda_req <= 0.0) {
    throw std::invalid_argument("connectivity_utility: lambda_req must be > 0");
  }
  return std::min(1.0, lambda2 / lambda_req);
}

ConnectivityReport analyze_connectivity(const BackhaulGraph& graph,
                                        double lambda_req) {
  ConnectivityReport report;
  report.lambda2 = algebraic_connectivity(graph);
  report.utility = connectivity_utility(report.lambda2, lambda_req);
  report.is_connected = report.lambda2 > kZeroTol;
  return report;
}

}  // namespace hdnf
