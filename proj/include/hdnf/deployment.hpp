#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdnf/c2_service.hpp"
#include "hdnf/scenario.hpp"
#include "hdnf/tasking.hpp"
#include "hdnf/topology.hpp"

namespace hdnf {

inline constexpr int kPooledSide = 10;
inline constexpr int kPooledFeatures = 3 * kPooledSide * kPooledSide;  // 300
inline constexpr int kNumNeighbors = 3;
inline constexpr int kObsDims = 20;      // 3 pos + 4 metrics + 9 neighbors + 1 layer + 3 guidance
inline constexpr int kActionDims = 4;    // 3 motion + 1 gate
inline constexpr int kLayerIndicatorIndex = 16;  // offset within the flat observation

struct AgentObservation {
  Position3D own_position_norm;                     // components in [0,1]
  std::array<double, 4> metric_vector{};            // C_term, C_vert, C_corr, C_conn
  std::array<Position3D, kNumNeighbors> neighbor_offsets{};  // normalized, zero-padded
  double layer_indicator = 0.0;                     // 1 above the altitude-band midpoint
  Position3D guidance;                              // unit vector toward outage mass

  Eigen::VectorXd flat() const;
};

struct AgentAction {
  std::array<double, 3> motion_command{};  // each in [-1, 1]
  double gate_score = 0.0;                 // in [0, 1]
};

struct Transition {
  Eigen::MatrixXd obs;          // N x kObsDims
  Eigen::VectorXd pooled;       // kPooledFeatures
  Eigen::MatrixXd actions;      // N x kActionDims
  double reward = 0.0;
  Eigen::MatrixXd next_obs;
  Eigen::VectorXd next_pooled;
  double priority = 1.0;        // informational; the buffer owns live values
};

struct Deployment {
  std::vector<Position3D> positions;
  std::vector<double> gate_scores;

  std::size_t size() const { return positions.size(); }
};

struct RewardBreakdown {
  double r_vol = 0.0;
  double r_net = 0.0;
  double r_topo = 0.0;
  double total = 0.0;
  LayerMetrics metrics;
  double c_conn = 0.0;   // connectivity utility
  double lambda2 = 0.0;
  int active_count = 0;
};

struct EnvState {
  std::vector<Position3D> positions;  // true coordinates in meters
  std::vector<double> gates;          // gate scores applied at the last step
  GridMap grid;
  RewardBreakdown reward;             // evaluated against the current active set
  std::vector<AgentObservation> observations;
  Eigen::MatrixXd obs_matrix;         // N x kObsDims
  Eigen::VectorXd pooled;             // kPooledFeatures
};

// Non-overlapping adaptive average pooling of the 3xKxK outage map down to
// 3x10x10, flattened channel-major.
Eigen::VectorXd pooled_grid_features(const GridMap& grid);

// Reward for a gated deployment: coverage volume, network value, and the
// topology penalty (2-nearest-neighbor collision Gaussian plus altitude
// regularization), all per the scenario weights. Connectivity is evaluated
// on depot + active positions with exact duplicates collapsed.
RewardBreakdown compute_reward(std::span<const Position3D> active,
                               const Scenario& scenario,
                               const SampleLayers& layers);

// MMDP environment. Stateless apart from configuration: reset/step are const
// and fully determined by their arguments, which keeps training replayable.
class Environment {
 public:
  // flat2d restricts reward and grid to the terminal layer (vertical and
  // corridor channels zeroed, gamma_v = gamma_c = 0, omega = (1,0,0)).
  Environment(const Scenario& scenario, const RoutePlan& plan,
              bool flat2d = false);

  int num_agents() const { return scenario_.max_bs; }
  const Scenario& scenario() const { return scenario_; }
  const SampleLayers& layers() const { return layers_; }
  bool flat2d() const { return flat2d_; }

  // Agents start at uniform-random positions inside area x [h_min, h_max]
  // with all gates zero, so no BS is active and all demand is uncovered.
  EnvState reset(std::uint64_t seed) const;

  // Kinematic update (v_max * motion * dt, clipped to bounds), then reward on
  // the gate >= gate_threshold subset and rebuilt observations. Non-finite
  // action components raise TrainingFault.
  std::pair<RewardBreakdown, EnvState> step(const EnvState& state,
                                            std::span<const AgentAction> actions,
                                            double delta_t_s = 1.0) const;

 private:
  EnvState make_state(std::vector<Position3D> positions,
                      std::vector<double> gates) const;

  Scenario scenario_;
  SampleLayers layers_;
  bool flat2d_ = false;
};

// Removes stations whose absence keeps C_conn at 1 and Cbar_syn within
// epsilon of the input deployment's value; candidates scanned in ascending
// order of their standalone Cbar_syn contribution. Throws on empty input.
Deployment prune_deployment(const Deployment& deployment,
                            const Scenario& scenario, double epsilon);

// ceil(sqrt(n)) square lattice of cell centers, row-major, truncated to n,
// all gates 1. Altitude must lie within the scenario altitude band.
Deployment grid_baseline(const Scenario& scenario, int n_bs, double altitude_m);

// Uniform random placement inside area x [h_min, h_max], gates 1.
Deployment random_baseline(const Scenario& scenario, int n_bs,
                           std::uint64_t seed);

std::string serialize_deployment(const Deployment& deployment);
Deployment parse_deployment(const std::string& json_text);
void save_deployment(const Deployment& deployment, const std::string& path);
Deployment load_deployment(const std::string& path);

}  // namespace hdnf
