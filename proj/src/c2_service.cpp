#include "hdnf/c2_service.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace hdnf {

namespace {

// Half-open bins [lo, hi) with the last bin closed, so samples at the far
// boundary land deterministically.
int bin_index(double coord, double area_side_m, int k) {
  const double w = area_side_m / k;
  int idx = static_cast<int>(std::floor(coord / w));
  if (idx < 0) idx = 0;
  if (idx >= k) idx = k - 1;
  return idx;
}

double capacity_from_sinr(double sinr_linear, double c_max) {
  return std::min(1.0, std::log2(1.0 + sinr_linear) / c_max);
}

LayerMetrics metrics_from_sinr(
    const SampleLayers& layers, const std::vector<double>& term,
    const std::vector<double>& vert, const std::vector<double>& corr,
    const Thresholds& thresholds, const Weights& weights) {
  const double gamma_lin = db_to_linear(thresholds.gamma_ctrl_db);
  auto reduce = [&](const std::vector<double>& sinr, double& coverage,
                    double& capacity) {
    double feas = 0.0;
    double cap = 0.0;
    for (double s : sinr) {
      if (s >= gamma_lin) feas += 1.0;
      cap += capacity_from_sinr(s, thresholds.c_max_bps_hz);
    }
    coverage = feas / static_cast<double>(sinr.size());
    capacity = cap / static_cast<double>(sinr.size());
  };
  LayerMetrics m;
  reduce(term, m.c_term, m.cbar_t);
  reduce(vert, m.c_vert, m.cbar_v);
  reduce(corr, m.c_corr, m.cbar_c);
  m.cbar_syn = weights.omega_t * m.cbar_t + weights.omega_v * m.cbar_v +
               weights.omega_c * m.cbar_c;
  return m;
}

void require_nonempty(const SampleLayers& layers) {
  if (layers.terminal.empty() || layers.vertical.empty() ||
      layers.corridor.empty()) {
    throw std::invalid_argument("layer_metrics: empty sample layer");
  }
}

GridMap grid_from_flags(const SampleLayers& layers,
                        const std::vector<std::vector<char>>& feasible, int k,
                        double area_side_m) {
  GridMap grid;
  grid.k = k;
  grid.area_side_m = area_side_m;
  grid.values.assign(3u * k * k, 0.0);

  const std::vector<Position3D>* channel_sets[3] = {
      &layers.terminal, &layers.corridor, &layers.vertical};
  for (int c = 0; c < 3; ++c) {
    std::vector<int> count(static_cast<std::size_t>(k) * k, 0);
    std::vector<int> covered(static_cast<std::size_t>(k) * k, 0);
    const auto& points = *channel_sets[c];
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int col = bin_index(points[i].x, area_side_m, k);
      const int row = bin_index(points[i].y, area_side_m, k);
      const std::size_t cell = static_cast<std::size_t>(row) * k + col;
      ++count[cell];
      covered[cell] += feasible[c][i] ? 1 : 0;
    }
    for (int row = 0; row < k; ++row) {
      for (int col = 0; col < k; ++col) {
        const std::size_t cell = static_cast<std::size_t>(row) * k + col;
        if (count[cell] > 0) {
          const double kappa =
              static_cast<double>(covered[cell]) / count[cell];
          grid.at(c, row, col) = 1.0 - kappa;
        }
        // no samples: kappa = 1 by definition, outage density stays 0
      }
    }
  }
  return grid;
}

std::vector<std::vector<char>> feasibility_flags(
    const SampleLayers& layers, std::span<const Position3D> deployment,
    const ChannelParams& params, double gamma_ctrl_db, bool parallel) {
  const double gamma_lin = db_to_linear(gamma_ctrl_db);
  const std::vector<Position3D>* channel_sets[3] = {
      &layers.terminal, &layers.corridor, &layers.vertical};
  std::vector<std::vector<char>> flags(3);
  for (int c = 0; c < 3; ++c) {
    const auto sinr = parallel
                          ? best_sinr_at_points(*channel_sets[c], deployment,
                                                params)
                          : best_sinr_at_points_serial(*channel_sets[c],
                                                       deployment, params);
    flags[c].resize(sinr.size());
    for (std::size_t i = 0; i < sinr.size(); ++i) {
      flags[c][i] = sinr[i] >= gamma_lin ? 1 : 0;
    }
  }
  return flags;
}

}  // namespace

SampleLayers build_sample_layers(const Scenario& scenario) {
  SampleLayers layers;
  const auto& s = scenario.sampling;
  for (const Task& t : scenario.tasks) {
    layers.terminal.push_back(t.location);
  }
  for (const Task& t : scenario.tasks) {
    for (int m = 0; m <= s.m_v; ++m) {
      layers.vertical.push_back(
          {t.location.x, t.location.y, m * s.delta_h_m});
    }
  }
  const Position3D depot = scenario.depot;
  const double h = scenario.fleet.cruise_altitude_m;
  for (const Task& t : scenario.tasks) {
    for (int i = 0; i <= s.i_t; ++i) {
      const double f = static_cast<double>(i) / s.i_t;
      layers.corridor.push_back({depot.x + f * (t.location.x - depot.x),
                                 depot.y + f * (t.location.y - depot.y), h});
    }
  }
  return layers;
}

std::vector<double> best_sinr_at_points_serial(
    std::span<const Position3D> points, std::span<const Position3D> deployment,
    const ChannelParams& params, bool include_interference) {
  std::vector<double> sinr(points.size(), 0.0);
  if (deployment.empty()) return sinr;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sinr[i] =
        best_server_sinr(points[i], deployment, params, include_interference)
            .sinr_linear;
  }
  return sinr;
}

std::vector<double> best_sinr_at_points(std::span<const Position3D> points,
                                        std::span<const Position3D> deployment,
                                        const ChannelParams& params,
                                        bool include_interference) {
  std::vector<double> sinr(points.size(), 0.0);
  if (deployment.empty()) return sinr;
  const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    sinr[i] =
        best_server_sinr(points[i], deployment, params, include_interference)
            .sinr_linear;
  }
  return sinr;
}

bool point_feasible(const Position3D& point,
                    std::span<const Position3D> deployment,
                    const ChannelParams& params, double gamma_ctrl_db) {
  if (deployment.empty()) return false;
  return best_server_sinr(point, deployment, params).sinr_linear >=
         db_to_linear(gamma_ctrl_db);
}

double normalized_capacity(const Position3D& point,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params, double c_max_bps_hz) {
  if (c_max_bps_hz <= 0.0) {
    throw std::invalid_argument("normalized_capacity: c_max must be > 0");
  }
  if (deployment.empty()) return 0.0;
  return capacity_from_sinr(
      best_server_sinr(point, deployment, params).sinr_linear, c_max_bps_hz);
}

LayerMetrics layer_metrics(const SampleLayers& layers,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params,
                           const Thresholds& thresholds, const Weights& weights,
                           bool include_interference) {
  require_nonempty(layers);
  return metrics_from_sinr(
      layers,
      best_sinr_at_points(layers.terminal, deployment, params,
                          include_interference),
      best_sinr_at_points(layers.vertical, deployment, params,
                          include_interference),
      best_sinr_at_points(layers.corridor, deployment, params,
                          include_interference),
      thresholds, weights);
}

LayerMetrics layer_metrics_serial(const SampleLayers& layers,
                                  std::span<const Position3D> deployment,
                                  const ChannelParams& params,
                                  const Thresholds& thresholds,
                                  const Weights& weights,
                                  bool include_interference) {
  require_nonempty(layers);
  return metrics_from_sinr(
      layers,
      best_sinr_at_points_serial(layers.terminal, deployment, params,
                                 include_interference),
      best_sinr_at_points_serial(layers.vertical, deployment, params,
                                 include_interference),
      best_sinr_at_points_serial(layers.corridor, deployment, params,
                                 include_interference),
      thresholds, weights);
}

GridMap build_grid_map(const SampleLayers& layers,
                       std::span<const Position3D> deployment,
                       const ChannelParams& params, double gamma_ctrl_db, int k,
                       double area_side_m) {
  if (k < 2) throw std::invalid_argument("build_grid_map: k must be >= 2");
  return grid_from_flags(
      layers,
      feasibility_flags(layers, deployment, params, gamma_ctrl_db, true), k,
      area_side_m);
}

GridMap build_grid_map_serial(const SampleLayers& layers,
                              std::span<const Position3D> deployment,
                              const ChannelParams& params, double gamma_ctrl_db,
                              int k, double area_side_m) {
  if (k < 2) throw std::invalid_argument("build_grid_map: k must be >= 2");
  return grid_from_flags(
      layers,
      feasibility_flags(layers, deployment, params, gamma_ctrl_db, false), k,
      area_side_m);
}

Position3D guidance_vector(const Position3D& agent_pos, const GridMap& grid,
                           double h_cruise_m) {
  const double w = grid.area_side_m / grid.k;
  double mass = 0.0;
  double cx = 0.0, cy = 0.0;
  for (int row = 0; row < grid.k; ++row) {
    for (int col = 0; col < grid.k; ++col) {
      double density = 0.0;
      for (int c = 0; c < 3; ++c) density += grid.at(c, row, col);
      if (density <= 0.0) continue;
      mass += density;
      cx += density * (col + 0.5) * w;
      cy += density * (row + 0.5) * w;
    }
  }
  if (mass <= 0.0) return {0.0, 0.0, 0.0};
  const Position3D centroid{cx / mass, cy / mass, h_cruise_m};
  const double dx = centroid.x - agent_pos.x;
  const double dy = centroid.y - agent_pos.y;
  const double dz = centroid.z - agent_pos.z;
  const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (norm <= 0.0) return {0.0, 0.0, 0.0};
  return {dx / norm, dy / norm, dz / norm};
}

}  // namespace hdnf
