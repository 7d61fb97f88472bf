#pragma once

#include <cstddef>
#include <span>

namespace hdnf {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3D&, const Position3D&) = default;
};

double distance_m(const Position3D& a, const Position3D& b);

// dB / linear conversions. All internal power math is done in Watts;
// dB values appear only at API boundaries.
double db_to_linear(double db);
double linear_to_db(double lin);
double dbm_to_watt(double dbm);
double watt_to_dbm(double w);

// Probabilistic air-to-air channel constants. Frequencies are stored in Hz;
// config files that carry GHz are converted at parse time.
struct ChannelParams {
  double carrier_frequency_hz = 2.4e9;
  double transmit_power_dbm = 23.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 10e6;
  double alpha = 9.61;  // environment sigmoid constants
  double beta = 0.16;
  double eta_los_db = 1.0;
  double eta_nlos_db = 20.0;
  double c0_mps = 3e8;

  // Throws std::invalid_argument listing every violated field.
  void validate() const;

  double transmit_power_w() const { return dbm_to_watt(transmit_power_dbm); }
  double noise_power_w() const {
    return dbm_to_watt(noise_psd_dbm_hz) * bandwidth_hz;
  }
};

struct LinkBudget {
  double distance_m = 0.0;
  double elevation_deg = 0.0;
  double p_los = 0.0;
  double mean_path_loss_db = 0.0;
  double rx_power_w = 0.0;
};

// Elevation angle between two aerial nodes, in [0, 90] degrees.
// Throws std::domain_error for coincident positions.
double elevation_angle_deg(const Position3D& a, const Position3D& b);

// Sigmoid LoS probability of the elevation angle; monotone nondecreasing.
double los_probability(double theta_deg, const ChannelParams& params);

// Free-space path loss in dB. Throws std::domain_error for distance <= 0.
double fspl_db(double distance_m, const ChannelParams& params);

// FSPL plus the LoS/NLoS excess-loss blend.
double mean_path_loss_db(const Position3D& a, const Position3D& b,
                         const ChannelParams& params);

// Average received power in Watts at b for a transmitter at a.
double rx_power_w(const Position3D& a, const Position3D& b,
                  const ChannelParams& params);

LinkBudget link_budget(const Position3D& a, const Position3D& b,
                       const ChannelParams& params);

// SINR at `receiver` served by transmitters[server_index]; every other
// transmitter contributes interference. Throws std::domain_error if the
// receiver coincides with any transmitter, std::out_of_range for a bad index.
double sinr_linear(const Position3D& receiver, std::size_t server_index,
                   std::span<const Position3D> transmitters,
                   const ChannelParams& params,
                   bool include_interference = true);

struct BestServer {
  double sinr_linear = 0.0;
  std::size_t index = 0;
};

// Maximum per-server SINR over the deployment, ties to the lowest index.
// Throws std::invalid_argument on an empty deployment.
BestServer best_server_sinr(const Position3D& point,
                            std::span<const Position3D> deployment,
                            const ChannelParams& params,
                            bool include_interference = true);

}  // namespace hdnf
