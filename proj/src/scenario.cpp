#include "hdnf/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "hdnf/errors.hpp"

namespace hdnf {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

double num(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) {
    throw ConfigError("missing key '" + std::string(key) + "' in " + context);
  }
  if (!obj[key].is_number()) {
    throw ConfigError("key '" + std::string(key) + "' in " + context +
                      " must be a number");
  }
  return obj[key].get<double>();
}

json position_to_json(const Position3D& p) {
  return json{{"x_m", p.x}, {"y_m", p.y}, {"z_m", p.z}};
}

Position3D position_from_json(const json& obj, const std::string& context) {
  check_keys(obj, {"x_m", "y_m", "z_m"}, context);
  return Position3D{num(obj, "x_m", context), num(obj, "y_m", context),
                    num(obj, "z_m", context)};
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["format_version"] = 1;
  j["rng_seed"] = s.rng_seed;
  j["area_side_m"] = s.area_side_m;
  j["depot"] = position_to_json(s.depot);
  j["bs_altitude_min_m"] = s.bs_altitude_min_m;
  j["bs_altitude_max_m"] = s.bs_altitude_max_m;
  j["max_bs"] = s.max_bs;
  json tasks = json::array();
  for (const Task& t : s.tasks) {
    tasks.push_back(json{{"id", t.id},
                         {"x_m", t.location.x},
                         {"y_m", t.location.y},
                         {"payload_kg", t.payload_kg},
                         {"window_open_s", t.window_open_s},
                         {"window_close_s", t.window_close_s}});
  }
  j["tasks"] = std::move(tasks);
  j["fleet"] = json{{"num_delivery_uavs", s.fleet.num_delivery_uavs},
                    {"max_speed_mps", s.fleet.max_speed_mps},
                    {"cruise_altitude_m", s.fleet.cruise_altitude_m},
                    {"max_payload_kg", s.fleet.max_payload_kg},
                    {"battery_j", s.fleet.battery_j},
                    {"energy_coeff_j_per_m_kg", s.fleet.energy_coeff_j_per_m_kg}};
  j["channel"] = json{{"carrier_frequency_hz", s.channel.carrier_frequency_hz},
                      {"transmit_power_dbm", s.channel.transmit_power_dbm},
                      {"noise_psd_dbm_hz", s.channel.noise_psd_dbm_hz},
                      {"bandwidth_hz", s.channel.bandwidth_hz},
                      {"alpha", s.channel.alpha},
                      {"beta", s.channel.beta},
                      {"eta_los_db", s.channel.eta_los_db},
                      {"eta_nlos_db", s.channel.eta_nlos_db},
                      {"c0_mps", s.channel.c0_mps}};
  j["thresholds"] = json{{"gamma_ctrl_db", s.thresholds.gamma_ctrl_db},
                         {"gamma_bh_db", s.thresholds.gamma_bh_db},
                         {"lambda_req", s.thresholds.lambda_req},
                         {"c_max_bps_hz", s.thresholds.c_max_bps_hz},
                         {"gate_threshold", s.thresholds.gate_threshold}};
  j["weights"] = json{{"omega_d", s.weights.omega_d},
                      {"omega_e", s.weights.omega_e},
                      {"omega_wait", s.weights.omega_wait},
                      {"omega_t", s.weights.omega_t},
                      {"omega_v", s.weights.omega_v},
                      {"omega_c", s.weights.omega_c},
                      {"gamma_t", s.weights.gamma_t},
                      {"gamma_v", s.weights.gamma_v},
                      {"gamma_c", s.weights.gamma_c},
                      {"lambda_conn", s.weights.lambda_conn},
                      {"lambda_cap", s.weights.lambda_cap},
                      {"cbar_req", s.weights.cbar_req},
                      {"w_h", s.weights.w_h},
                      {"eta_coll", s.weights.eta_coll},
                      {"delta_safe_m", s.weights.delta_safe_m},
                      {"lambda_out", s.weights.lambda_out},
                      {"m_infinity", s.weights.m_infinity}};
  j["sampling"] = json{{"delta_h_m", s.sampling.delta_h_m},
                       {"m_v", s.sampling.m_v},
                       {"i_t", s.sampling.i_t},
                       {"grid_k", s.sampling.grid_k}};
  return j;
}

Scenario scenario_from_json(const json& j) {
  check_keys(j,
             {"format_version", "rng_seed", "area_side_m", "depot",
              "bs_altitude_min_m", "bs_altitude_max_m", "max_bs", "tasks",
              "fleet", "channel", "thresholds", "weights", "sampling"},
             "scenario");
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw ConfigError("scenario: unsupported or missing format_version");
  }
  Scenario s;
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.area_side_m = num(j, "area_side_m", "scenario");
  s.depot = position_from_json(j.at("depot"), "scenario.depot");
  s.bs_altitude_min_m = num(j, "bs_altitude_min_m", "scenario");
  s.bs_altitude_max_m = num(j, "bs_altitude_max_m", "scenario");
  s.max_bs = j.at("max_bs").get<int>();

  for (const json& t : j.at("tasks")) {
    check_keys(t,
               {"id", "x_m", "y_m", "payload_kg", "window_open_s",
                "window_close_s"},
               "scenario.tasks[]");
    Task task;
    task.id = t.at("id").get<int>();
    task.location = {num(t, "x_m", "task"), num(t, "y_m", "task"), 0.0};
    task.payload_kg = num(t, "payload_kg", "task");
    task.window_open_s = num(t, "window_open_s", "task");
    task.window_close_s = num(t, "window_close_s", "task");
    s.tasks.push_back(task);
  }

  const json& f = j.at("fleet");
  check_keys(f,
             {"num_delivery_uavs", "max_speed_mps", "cruise_altitude_m",
              "max_payload_kg", "battery_j", "energy_coeff_j_per_m_kg"},
             "scenario.fleet");
  s.fleet.num_delivery_uavs = f.at("num_delivery_uavs").get<int>();
  s.fleet.max_speed_mps = num(f, "max_speed_mps", "fleet");
  s.fleet.cruise_altitude_m = num(f, "cruise_altitude_m", "fleet");
  s.fleet.max_payload_kg = num(f, "max_payload_kg", "fleet");
  s.fleet.battery_j = num(f, "battery_j", "fleet");
  s.fleet.energy_coeff_j_per_m_kg = num(f, "energy_coeff_j_per_m_kg", "fleet");

  const json& c = j.at("channel");
  check_keys(c,
             {"carrier_frequency_hz", "transmit_power_dbm", "noise_psd_dbm_hz",
              "bandwidth_hz", "alpha", "beta", "eta_los_db", "eta_nlos_db",
              "c0_mps"},
             "scenario.channel");
  s.channel.carrier_frequency_hz = num(c, "carrier_frequency_hz", "channel");
  s.channel.transmit_power_dbm = num(c, "transmit_power_dbm", "channel");
  s.channel.noise_psd_dbm_hz = num(c, "noise_psd_dbm_hz", "channel");
  s.channel.bandwidth_hz = num(c, "bandwidth_hz", "channel");
  s.channel.alpha = num(c, "alpha", "channel");
  s.channel.beta = num(c, "beta", "channel");
  s.channel.eta_los_db = num(c, "eta_los_db", "channel");
  s.channel.eta_nlos_db = num(c, "eta_nlos_db", "channel");
  s.channel.c0_mps = num(c, "c0_mps", "channel");

  const json& th = j.at("thresholds");
  check_keys(th,
             {"gamma_ctrl_db", "gamma_bh_db", "lambda_req", "c_max_bps_hz",
              "gate_threshold"},
             "scenario.thresholds");
  s.thresholds.gamma_ctrl_db = num(th, "gamma_ctrl_db", "thresholds");
  s.thresholds.gamma_bh_db = num(th, "gamma_bh_db", "thresholds");
  s.thresholds.lambda_req = num(th, "lambda_req", "thresholds");
  s.thresholds.c_max_bps_hz = num(th, "c_max_bps_hz", "thresholds");
  s.thresholds.gate_threshold = num(th, "gate_threshold", "thresholds");

  const json& w = j.at("weights");
  check_keys(w,
             {"omega_d", "omega_e", "omega_wait", "omega_t", "omega_v",
              "omega_c", "gamma_t", "gamma_v", "gamma_c", "lambda_conn",
              "lambda_cap", "cbar_req", "w_h", "eta_coll", "delta_safe_m",
              "lambda_out", "m_infinity"},
             "scenario.weights");
  s.weights.omega_d = num(w, "omega_d", "weights");
  s.weights.omega_e = num(w, "omega_e", "weights");
  s.weights.omega_wait = num(w, "omega_wait", "weights");
  s.weights.omega_t = num(w, "omega_t", "weights");
  s.weights.omega_v = num(w, "omega_v", "weights");
  s.weights.omega_c = num(w, "omega_c", "weights");
  s.weights.gamma_t = num(w, "gamma_t", "weights");
  s.weights.gamma_v = num(w, "gamma_v", "weights");
  s.weights.gamma_c = num(w, "gamma_c", "weights");
  s.weights.lambda_conn = num(w, "lambda_conn", "weights");
  s.weights.lambda_cap = num(w, "lambda_cap", "weights");
  s.weights.cbar_req = num(w, "cbar_req", "weights");
  s.weights.w_h = num(w, "w_h", "weights");
  s.weights.eta_coll = num(w, "eta_coll", "weights");
  s.weights.delta_safe_m = num(w, "delta_safe_m", "weights");
  s.weights.lambda_out = num(w, "lambda_out", "weights");
  s.weights.m_infinity = num(w, "m_infinity", "weights");

  const json& sp = j.at("sampling");
  check_keys(sp, {"delta_h_m", "m_v", "i_t", "grid_k"}, "scenario.sampling");
  s.sampling.delta_h_m = num(sp, "delta_h_m", "sampling");
  s.sampling.m_v = sp.at("m_v").get<int>();
  s.sampling.i_t = sp.at("i_t").get<int>();
  s.sampling.grid_k = sp.at("grid_k").get<int>();

  s.validate();
  return s;
}

}  // namespace

void Scenario::validate() const {
  std::string bad;
  auto flag = [&bad](bool ok, const std::string& field) {
    if (!ok) {
      if (!bad.empty()) bad += ", ";
      bad += field;
    }
  };

  flag(area_side_m > 0.0, "area_side_m");
  flag(bs_altitude_min_m < bs_altitude_max_m, "bs_altitude_min_m < bs_altitude_max_m");
  flag(max_bs >= 1, "max_bs");
  flag(depot.x >= 0.0 && depot.x <= area_side_m && depot.y >= 0.0 &&
           depot.y <= area_side_m,
       "depot inside area");
  flag(!tasks.empty(), "tasks nonempty");
  for (const Task& t : tasks) {
    const std::string tag = "tasks[" + std::to_string(t.id) + "]";
    flag(t.payload_kg > 0.0, tag + ".payload_kg");
    flag(t.window_open_s <= t.window_close_s, tag + ".window");
    flag(t.location.x >= 0.0 && t.location.x <= area_side_m &&
             t.location.y >= 0.0 && t.location.y <= area_side_m,
         tag + " inside area");
  }
  flag(fleet.num_delivery_uavs >= 1, "fleet.num_delivery_uavs");
  flag(fleet.max_speed_mps > 0.0, "fleet.max_speed_mps");
  flag(fleet.cruise_altitude_m >= 0.0 &&
           fleet.cruise_altitude_m <= bs_altitude_max_m,
       "fleet.cruise_altitude_m in [0, bs_altitude_max_m]");
  flag(fleet.max_payload_kg > 0.0, "fleet.max_payload_kg");
  flag(fleet.battery_j > 0.0, "fleet.battery_j");
  flag(fleet.energy_coeff_j_per_m_kg > 0.0, "fleet.energy_coeff_j_per_m_kg");

  try {
    channel.validate();
  } catch (const std::invalid_argument& e) {
    flag(false, e.what());
  }

  flag(thresholds.lambda_req > 0.0, "thresholds.lambda_req");
  flag(thresholds.c_max_bps_hz > 0.0, "thresholds.c_max_bps_hz");
  flag(thresholds.gate_threshold >= 0.0 && thresholds.gate_threshold <= 1.0,
       "thresholds.gate_threshold");

  flag(std::abs(weights.omega_t + weights.omega_v + weights.omega_c - 1.0) <=
           1e-9,
       "weights.omega_t+omega_v+omega_c == 1");
  const double nonneg[] = {weights.omega_d,     weights.omega_e,
                           weights.omega_wait,  weights.omega_t,
                           weights.omega_v,     weights.omega_c,
                           weights.gamma_t,     weights.gamma_v,
                           weights.gamma_c,     weights.lambda_conn,
                           weights.lambda_cap,  weights.w_h,
                           weights.eta_coll,    weights.delta_safe_m,
                           weights.lambda_out,  weights.m_infinity};
  bool all_nonneg = true;
  for (double v : nonneg) all_nonneg = all_nonneg && v >= 0.0;
  flag(all_nonneg, "weights nonnegative");
  flag(weights.delta_safe_m > 0.0, "weights.delta_safe_m > 0");

  flag(sampling.delta_h_m > 0.0, "sampling.delta_h_m");
  flag(sampling.m_v >= 0, "sampling.m_v");
  flag(sampling.i_t >= 1, "sampling.i_t");
  flag(sampling.grid_k >= 2, "sampling.grid_k");

  if (!bad.empty()) {
    throw ConfigError("invalid scenario: " + bad);
  }
}

Scenario generate_scenario(std::uint64_t seed, double area_side_m,
                           int num_tasks, const std::string& overrides_json) {
  if (area_side_m <= 0.0) {
    throw ConfigError("generate_scenario: area_side_m must be positive");
  }
  if (num_tasks < 1) {
    throw ConfigError("generate_scenario: num_tasks must be >= 1");
  }

  Scenario s;
  s.rng_seed = seed;
  s.area_side_m = area_side_m;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, area_side_m);
  std::uniform_real_distribution<double> payload(0.5, 1.5);
  std::uniform_real_distribution<double> slack(0.0, 3600.0);

  for (int i = 0; i < num_tasks; ++i) {
    Task t;
    t.id = i;
    t.location = {coord(rng), coord(rng), 0.0};
    t.payload_kg = payload(rng);
    // Deadlines leave at least a 3x out-and-back margin so single-task
    // service is always reachable; the uniform slack differentiates urgency.
    const double direct =
        std::hypot(t.location.x - s.depot.x, t.location.y - s.depot.y);
    t.window_open_s = 0.0;
    t.window_close_s = 3.0 * direct / s.fleet.max_speed_mps + slack(rng);
    s.tasks.push_back(t);
  }

  if (overrides_json.empty()) {
    s.validate();
    return s;
  }
  json doc = scenario_to_json(s);
  json patch;
  try {
    patch = json::parse(overrides_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("overrides: invalid JSON: ") + e.what());
  }
  doc.merge_patch(patch);
  try {
    return scenario_from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

std::string serialize_scenario(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file: " + path);
  out << serialize_scenario(scenario);
}

double route_length(std::span<const Task> sequence, const Position3D& depot) {
  if (sequence.empty()) return 0.0;
  auto ground = [](const Position3D& a, const Position3D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
  };
  double total = ground(depot, sequence.front().location);
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    total += ground(sequence[i].location, sequence[i + 1].location);
  }
  total += ground(sequence.back().location, depot);
  return total;
}

double route_energy(std::span<const Task> sequence, const Position3D& depot,
                    const FleetParams& fleet) {
  double payload_sum = 0.0;
  for (const Task& t : sequence) payload_sum += t.payload_kg;
  return fleet.energy_coeff_j_per_m_kg * route_length(sequence, depot) *
         payload_sum;
}

ArrivalSchedule arrival_times(std::span<const Task> sequence,
                              const Position3D& depot,
                              const FleetParams& fleet) {
  ArrivalSchedule schedule;
  auto ground = [](const Position3D& a, const Position3D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
  };
  double clock = 0.0;
  Position3D prev = depot;
  for (const Task& t : sequence) {
    clock += ground(prev, t.location) / fleet.max_speed_mps;
    const double wait = std::max(0.0, t.window_open_s - clock);
    clock += wait;
    schedule.arrival_s.push_back(clock);
    schedule.wait_s.push_back(wait);
    prev = t.location;
  }
  return schedule;
}

}  // namespace hdnf
