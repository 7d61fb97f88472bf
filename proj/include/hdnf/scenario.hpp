#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdnf/channel.hpp"

namespace hdnf {

struct Task {
  int id = 0;
  Position3D location;  // z = 0
  double payload_kg = 0.0;
  double window_open_s = 0.0;
  double window_close_s = 0.0;
};

struct FleetParams {
  int num_delivery_uavs = 7;
  double max_speed_mps = 20.0;
  double cruise_altitude_m = 100.0;
  double max_payload_kg = 15.0;
  double battery_j = 1.0e7;
  double energy_coeff_j_per_m_kg = 500.0;
};

struct Thresholds {
  double gamma_ctrl_db = 14.0;
  double gamma_bh_db = 12.0;
  double lambda_req = 0.5;
  double c_max_bps_hz = 8.0;
  double gate_threshold = 0.5;
};

struct Weights {
  double omega_d = 0.5;
  double omega_e = 1.0;
  double omega_wait = 0.5;
  double omega_t = 0.3;
  double omega_v = 0.3;
  double omega_c = 0.4;
  double gamma_t = 2.0;
  double gamma_v = 2.0;
  double gamma_c = 4.0;
  double lambda_conn = 5.0;
  double lambda_cap = 1.0;
  double cbar_req = 0.0;
  double w_h = 0.5;
  double eta_coll = 50.0;
  double delta_safe_m = 250.0;
  double lambda_out = 1000.0;
  double m_infinity = 1.0e10;
};

struct SamplingParams {
  double delta_h_m = 10.0;
  int m_v = 15;       // vertical sampling intervals per task
  int i_t = 20;       // corridor sampling density factor
  int grid_k = 100;   // K x K grid resolution
};

// Immutable world description. Build via generate_scenario or load_scenario;
// both validate before returning.
struct Scenario {
  std::uint64_t rng_seed = 0;
  double area_side_m = 3000.0;
  Position3D depot{200.0, 100.0, 0.0};
  double bs_altitude_min_m = 30.0;
  double bs_altitude_max_m = 200.0;
  int max_bs = 15;
  std::vector<Task> tasks;
  FleetParams fleet;
  ChannelParams channel;
  Thresholds thresholds;
  Weights weights;
  SamplingParams sampling;

  // Throws ConfigError listing every violated field.
  void validate() const;
};

struct Trajectory {
  std::vector<Position3D> waypoints;
  std::vector<double> per_waypoint_sinr_db;
  double length_m = 0.0;
  double energy_j = 0.0;
};

struct ArrivalSchedule {
  std::vector<double> arrival_s;  // effective arrival (waits applied)
  std::vector<double> wait_s;     // hover time before each window opens
};

// Defaults follow the simulation-parameter table; overrides is a JSON text
// fragment merged over the generated document before validation ("" = none).
Scenario generate_scenario(std::uint64_t seed, double area_side_m,
                           int num_tasks, const std::string& overrides_json = "");

Scenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const Scenario& scenario);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

// Depot -> tasks -> depot tour length over ground coordinates.
double route_length(std::span<const Task> sequence, const Position3D& depot);

// eta * length * total payload; payload is charged over the whole route.
double route_energy(std::span<const Task> sequence, const Position3D& depot,
                    const FleetParams& fleet);

// Arrival times at max speed with hover-until-open waits; service time is 0.
ArrivalSchedule arrival_times(std::span<const Task> sequence,
                              const Position3D& depot,
                              const FleetParams& fleet);

}  // namespace hdnf
