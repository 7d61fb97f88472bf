#pragma once

#include <vector>

#include "hdnf/channel.hpp"
#include "hdnf/scenario.hpp"

namespace hdnf {

// Phase-specific sampling sets for the multi-layer C2 service model.
struct SampleLayers {
  std::vector<Position3D> terminal;  // task points, z = 0
  std::vector<Position3D> vertical;  // altitudes m * delta_h above each task
  std::vector<Position3D> corridor;  // depot->task segments at cruise altitude
};

struct LayerMetrics {
  double c_term = 0.0;
  double c_vert = 0.0;
  double c_corr = 0.0;
  double cbar_t = 0.0;
  double cbar_v = 0.0;
  double cbar_c = 0.0;
  double cbar_syn = 0.0;
};

// 3-channel outage-density map. Channel order: 0 terminal, 1 corridor,
// 2 vertical. Values in [0,1]; cells without samples hold 0.
struct GridMap {
  int k = 0;
  double area_side_m = 0.0;
  std::vector<double> values;  // channel-major, then row (y), then col (x)

  double& at(int channel, int row, int col) {
    return values[(static_cast<std::size_t>(channel) * k + row) * k + col];
  }
  double at(int channel, int row, int col) const {
    return values[(static_cast<std::size_t>(channel) * k + row) * k + col];
  }
};

SampleLayers build_sample_layers(const Scenario& scenario);

// Best-server SINR per point. OpenMP map over points with a fixed reduction
// order, so results are identical to the serial reference bit for bit.
// An empty deployment yields all zeros (no coverage anywhere).
std::vector<double> best_sinr_at_points(std::span<const Position3D> points,
                                        std::span<const Position3D> deployment,
                                        const ChannelParams& params,
                                        bool include_interference = true);
std::vector<double> best_sinr_at_points_serial(
    std::span<const Position3D> points, std::span<const Position3D> deployment,
    const ChannelParams& params, bool include_interference = true);

bool point_feasible(const Position3D& point,
                    std::span<const Position3D> deployment,
                    const ChannelParams& params, double gamma_ctrl_db);

// min(1, log2(1 + best SINR) / c_max); 0 with no deployment.
double normalized_capacity(const Position3D& point,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params, double c_max_bps_hz);

// Per-layer coverage ratios and normalized capacities plus their weighted
// combination. Throws std::invalid_argument if any layer is empty.
LayerMetrics layer_metrics(const SampleLayers& layers,
                           std::span<const Position3D> deployment,
                           const ChannelParams& params,
                           const Thresholds& thresholds, const Weights& weights,
                           bool include_interference = true);
LayerMetrics layer_metrics_serial(const SampleLayers& layers,
                                  std::span<const Position3D> deployment,
                                  const ChannelParams& params,
                                  const Thresholds& thresholds,
                                  const Weights& weights,
                                  bool include_interference = true);

GridMap build_grid_map(const SampleLayers& layers,
                       std::span<const Position3D> deployment,
                       const ChannelParams& params, double gamma_ctrl_db, int k,
                       double area_side_m);
GridMap build_grid_map_serial(const SampleLayers& layers,
                              std::span<const Position3D> deployment,
                              const ChannelParams& params, double gamma_ctrl_db,
                              int k, double area_side_m);

// Unit vector from the agent toward the outage-density-weighted centroid of
// all cells (summed over channels, centers at cruise altitude); zero vector
// when the map has no outage mass.
Position3D guidance_vector(const Position3D& agent_pos, const GridMap& grid,
                           double h_cruise_m);

}  // namespace hdnf
