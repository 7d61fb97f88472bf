#include "hdnf/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdnf {

double distance_m(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

void ChannelParams::validate() const {
  std::string bad;
  auto flag = [&bad](bool ok, const char* field) {
    if (!ok) {
      if (!bad.empty()) bad += ", ";
      bad += field;
    }
  };
  flag(carrier_frequency_hz > 0.0, "carrier_frequency_hz");
  flag(bandwidth_hz > 0.0, "bandwidth_hz");
  flag(alpha > 0.0, "alpha");
  flag(beta > 0.0, "beta");
  flag(eta_los_db >= 0.0 && eta_nlos_db >= eta_los_db, "eta_los_db/eta_nlos_db");
  flag(c0_mps > 0.0, "c0_mps");
  if (!bad.empty()) {
    throw std::invalid_argument("invalid channel params: " + bad);
  }
}

double elevation_angle_deg(const Position3D& a, const Position3D& b) {
  const double d = distance_m(a, b);
  if (d <= 0.0) {
    throw std::domain_error("elevation_angle_deg: coincident positions");
  }
  const double ratio = std::min(1.0, std::abs(a.z - b.z) / d);
  return 180.0 / M_PI * std::asin(ratio);
}

double los_probability(double theta_deg, const ChannelParams& params) {
  return 1.0 /
         (1.0 + params.alpha *
                    std::exp(-params.beta * (theta_deg - params.alpha)));
}

double fspl_db(double distance_m, const ChannelParams& params) {
  if (distance_m <= 0.0) {
    throw std::domain_error("fspl_db: distance must be positive");
  }
  return 20.0 * std::log10(distance_m) +
         20.0 * std::log10(params.carrier_frequency_hz) +
         20.0 * std::log10(4.0 * M_PI / params.c0_mps);
}

double mean_path_loss_db(const Position3D& a, const Position3D& b,
                         const ChannelParams& params) {
  const double d = distance_m(a, b);
  const double p_los = los_probability(elevation_angle_deg(a, b), params);
  return fspl_db(d, params) + p_los * params.eta_los_db +
         (1.0 - p_los) * params.eta_nlos_db;
}

double rx_power_w(const Position3D& a, const Position3D& b,
                  const ChannelParams& params) {
  return params.transmit_power_w() *
         std::pow(10.0, -mean_path_loss_db(a, b, params) / 10.0);
}

LinkBudget link_budget(const Position3D& a, const Position3D& b,
                       const ChannelParams& params) {
  LinkBudget lb;
  lb.distance_m = distance_m(a, b);
  lb.elevation_deg = elevation_angle_deg(a, b);
  lb.p_los = los_probability(lb.elevation_deg, params);
  lb.mean_path_loss_db = fspl_db(lb.distance_m, params) +
                         lb.p_los * params.eta_los_db +
                         (1.0 - lb.p_los) * params.eta_nlos_db;
  lb.rx_power_w =
      params.transmit_power_w() * std::pow(10.0, -lb.mean_path_loss_db / 10.0);
  return lb;
}

double sinr_linear(const Position3D& receiver, std::size_t server_index,
                   std::span<const Position3D> transmitters,
                   const ChannelParams& params, bool include_interference) {
  if (server_index >= transmitters.size()) {
    throw std::out_of_range("sinr_linear: server_index out of range");
  }
  double signal = 0.0;
  double interference = 0.0;
  for (std::size_t i = 0; i < transmitters.size(); ++i) {
    const double p = rx_power_w(transmitters[i], receiver, params);
    if (i == server_index) {
      signal = p;
    } else if (include_interference) {
      interference += p;
    }
  }
  return signal / (params.noise_power_w() + interference);
}

BestServer best_server_sinr(const Position3D& point,
                            std::span<const Position3D> deployment,
                            const ChannelParams& params,
                            bool include_interference) {
  if (deployment.empty()) {
    throw std::invalid_argument("best_server_sinr: empty deployment");
  }
  // One pass over received powers; SINR_b = P_b / (noise + total - P_b).
  std::vector<double> powers(deployment.size());
  double total = 0.0;
  for (std::size_t i = 0; i < deployment.size(); ++i) {
    powers[i] = rx_power_w(deployment[i], point, params);
    total += powers[i];
  }
  const double noise = params.noise_power_w();
  BestServer best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < deployment.size(); ++i) {
    const double denom =
        include_interference ? noise + (total - powers[i]) : noise;
    const double s = powers[i] / denom;
    if (s > best.sinr_linear) {
      best = {s, i};
    }
  }
  return best;
}

}  // namespace hdnf
