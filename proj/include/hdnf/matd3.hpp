#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hdnf/deployment.hpp"
#include "hdnf/nets.hpp"
#include "hdnf/replay.hpp"

namespace hdnf {

struct TrainConfig {
  int episodes = 300;
  int steps_per_episode = 60;
  double gamma = 0.99;
  double tau = 0.005;
  double exploration_sigma = 0.2;
  int policy_delay = 2;
  double actor_lr = 1e-4;
  double critic_lr = 5e-4;
  std::size_t buffer_capacity = 1000000;
  int batch_size = 128;
  int warmup_transitions = 1000;
  double target_noise_std = 0.2;
  double target_noise_clip = 0.5;
  double per_alpha = 0.6;
  double per_beta_start = 0.4;
  double per_beta_end = 1.0;
  double per_epsilon = 1e-6;
  bool no_per = false;            // ablation: uniform replay
  bool no_shared_backbone = false;  // ablation: per-agent encoders/heads
  bool flat2d = false;            // ablation: terminal-layer-only reward/grid
  double delta_t_s = 1.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

 private:
  static void read_fields(const nlohmann::json& j, TrainConfig& c);
};

struct EpisodeLog {
  int episode = 0;
  double reward = 0.0;  // summed over the episode's steps
  double r_vol = 0.0;
  double r_net = 0.0;
  double r_topo = 0.0;
};

// Actor (shared encoder + role head, or per-agent copies under the
// no-shared-backbone ablation) plus centralized twin critics with targets
// and optimizer state.
struct PolicyBundle {
  TrainConfig config;
  int n_agents = 0;

  std::vector<nets::Mlp> encoders;  // size 1, or n_agents when not shared
  std::vector<nets::Mlp> heads;
  std::vector<nets::Mlp> target_encoders;
  std::vector<nets::Mlp> target_heads;
  nets::Mlp q1, q2, q1_target, q2_target;

  std::vector<nets::Adam> encoder_opts;
  std::vector<nets::Adam> head_opts;
  nets::Adam q1_opt, q2_opt;

  std::uint64_t env_steps = 0;
  std::uint64_t critic_updates = 0;

  int actor_index(int agent) const {
    return config.no_shared_backbone ? agent : 0;
  }
  int critic_input_size() const {
    return n_agents * (kObsDims + kActionDims) + kPooledFeatures;
  }
};

struct TrainResult {
  PolicyBundle bundle;
  std::vector<EpisodeLog> log;
};

PolicyBundle init_policy_bundle(const TrainConfig& config, int n_agents,
                                std::mt19937_64& rng);

// Deterministic policy forward: tanh motion, sigmoid gate, no noise.
std::vector<AgentAction> policy_actions(const PolicyBundle& bundle,
                                        const Eigen::MatrixXd& obs,
                                        const Eigen::VectorXd& pooled);

// Twin-critic TD step on a PER-weighted batch; targets use the minimum of
// the target critics under clipped-Gaussian target-policy smoothing.
// Returns |y - Q1| per sample for the priority refresh.
std::vector<double> critic_update(PolicyBundle& bundle,
                                  const std::vector<const Transition*>& batch,
                                  const std::vector<double>& weights,
                                  std::mt19937_64& rng);

// Deterministic policy-gradient ascent on Q1 through the shared encoder and
// head (agent gradients averaged 1/N), followed by soft target updates.
void actor_update(PolicyBundle& bundle,
                  const std::vector<const Transition*>& batch);

TrainResult train(const Scenario& scenario, const RoutePlan& plan,
                  const TrainConfig& config);

// Rolls the deterministic policy from the seeded reset for one episode and
// keeps agents whose final gate score strictly exceeds gate_threshold.
Deployment extract_deployment(const PolicyBundle& bundle,
                              const Scenario& scenario, const RoutePlan& plan,
                              double gate_threshold);

std::string serialize_policy(const PolicyBundle& bundle);
PolicyBundle parse_policy(const std::string& json_text);
void save_policy(const PolicyBundle& bundle, const std::string& path);
PolicyBundle load_policy(const std::string& path);

void save_training_log(const std::vector<EpisodeLog>& log,
                       const std::string& path);
std::vector<EpisodeLog> load_training_log(const std::string& path);

}  // namespace hdnf
