#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdnf/deployment.hpp"
#include "hdnf/matd3.hpp"
#include "hdnf/planner.hpp"
#include "hdnf/tasking.hpp"

namespace hdnf {

struct UavReport {
  int uav = 0;
  std::vector<int> task_ids;             // visit order
  std::vector<char> task_success;        // aligned with task_ids
  std::vector<double> delivery_time_s;   // aligned; -1 for failed tasks
  double energy_j = 0.0;
  double length_m = 0.0;
  int outage_slots = 0;
  bool mission_complete = false;  // every leg including the return succeeded
  std::string failure_reason;
};

struct MetricsReport {
  bool stage_one_feasible = true;
  int blocking_task_id = -1;
  int deployed_bs = 0;
  int tasks_total = 0;
  int tasks_succeeded = 0;
  double task_success_rate = 0.0;
  int outage_slots = 0;  // waypoints below gamma_ctrl across all UAVs
  double total_energy_j = 0.0;
  double objective_value = 0.0;
  LayerMetrics coverage;
  double c_conn = 0.0;
  double lambda2 = 0.0;
  std::vector<UavReport> per_uav;
};

// Where the UAV-BS deployment comes from. Pruning applies to the policy
// sources only; baselines are evaluated as constructed.
struct DeploymentSource {
  enum class Kind { train, checkpoint, grid, random, fixed };
  Kind kind = Kind::fixed;
  TrainConfig train_config;
  std::string checkpoint_path;
  int n_bs = 0;  // grid/random; 0 means scenario.max_bs
  double grid_altitude_m = 120.0;
  std::uint64_t random_seed = 0;
  Deployment fixed_deployment;
  bool prune = true;
  double prune_epsilon = 1e-6;
};

struct PipelineResult {
  bool feasible = false;  // Stage One outcome
  RoutePlan plan;
  Deployment deployment;          // final
  Deployment deployment_initial;  // before pruning (equal when not pruned)
  std::vector<TrajectoryResult> trajectories;  // per UAV
  MetricsReport metrics;
  std::vector<EpisodeLog> training_log;   // nonempty for Kind::train
  std::optional<PolicyBundle> trained_bundle;
};

PipelineResult run_pipeline(const Scenario& scenario,
                            const DeploymentSource& source);

// omega_d |Q| + omega_e sum(E_u) - (gamma_t C_term + gamma_v C_vert +
// gamma_c C_corr), energies taken from the realized trajectories.
double evaluate_objective(const Deployment& deployment,
                          std::span<const TrajectoryResult> trajectories,
                          const Scenario& scenario);
// Convenience overload that plans the trajectories itself.
double evaluate_objective(const RoutePlan& plan, const Deployment& deployment,
                          const Scenario& scenario);

struct ExperimentSpec {
  std::vector<std::string> schemes;  // hdnf, grid, flat2d, no_per, no_shared
  std::vector<double> areas_m;
  std::vector<std::uint64_t> seeds;
  std::vector<int> bs_budgets;
  int num_tasks = 30;
  std::string scenario_overrides;  // JSON fragment per generate_scenario
  TrainConfig train;               // base config; seed overridden per cell
  double grid_altitude_m = 120.0;
  double prune_epsilon = 1e-6;

  void validate() const;  // throws ConfigError
};

struct CellResult {
  std::string scheme;
  double area_m = 0.0;
  std::uint64_t seed = 0;
  int n_bs = 0;
  std::string status = "ok";  // or the per-cell error message
  MetricsReport metrics;
};

struct MatrixResult {
  std::vector<CellResult> cells;
};

// Cross product of schemes x areas x bs budgets x seeds; failures are
// recorded in their row and the matrix continues.
MatrixResult run_experiment_matrix(const ExperimentSpec& spec);

void write_results_csv(const MatrixResult& result, const std::string& path);
// Reads the "cell" rows back (aggregate rows are skipped).
MatrixResult read_results_csv(const std::string& path);

void write_metrics_csv(const MetricsReport& metrics, const std::string& path);
void write_per_uav_csv(const MetricsReport& metrics, const std::string& path);

void emit_convergence_csv(const std::vector<EpisodeLog>& log,
                          const std::string& path);
void emit_metrics_vs_area_csv(const MatrixResult& result,
                              const std::string& path);
void emit_boxplot_csv(const MatrixResult& result, const std::string& path);
// Simplex sweep over (omega_t, omega_v, omega_c) in 1/steps increments.
void emit_weight_sweep_csv(const Scenario& scenario,
                           std::span<const Position3D> deployment, int steps,
                           const std::string& path);
// Best-server SINR over the K x K grid at the given altitude; K^2 rows.
void emit_coverage_heatmap_csv(const Scenario& scenario,
                               std::span<const Position3D> deployment,
                               double altitude_m, const std::string& path);
// One file per UAV: <prefix>_uav<i>.csv with x,y,z,sinr rows.
std::vector<std::string> emit_trajectories_csv(const PipelineResult& result,
                                               const std::string& prefix);

std::uint64_t fnv1a64(std::string_view data);
// Reproducibility record: config hash, seeds, and caller-supplied entries.
void write_manifest(const std::string& path, const Scenario& scenario,
                    const nlohmann::json& extra);

std::string format_sig9(double v);  // %.9g, the table number format

}  // namespace hdnf
