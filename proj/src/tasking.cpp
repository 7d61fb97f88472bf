#include "hdnf/tasking.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hdnf/errors.hpp"

namespace hdnf {

using nlohmann::json;

std::vector<Task> urgency_sort(std::span<const Task> tasks) {
  std::vector<Task> sorted(tasks.begin(), tasks.end());
  std::sort(sorted.begin(), sorted.end(), [](const Task& a, const Task& b) {
    if (a.window_close_s != b.window_close_s) {
      return a.window_close_s < b.window_close_s;
    }
    if (a.window_open_s != b.window_open_s) {
      return a.window_open_s < b.window_open_s;
    }
    return a.id < b.id;
  });
  return sorted;
}

namespace {

bool route_feasible(std::span<const Task> route, const Scenario& scenario) {
  double payload = 0.0;
  for (const Task& t : route) payload += t.payload_kg;
  if (payload > scenario.fleet.max_payload_kg) return false;
  if (route_energy(route, scenario.depot, scenario.fleet) >
      scenario.fleet.battery_j) {
    return false;
  }
  const ArrivalSchedule schedule =
      arrival_times(route, scenario.depot, scenario.fleet);
  for (std::size_t i = 0; i < route.size(); ++i) {
    if (schedule.arrival_s[i] > route[i].window_close_s) return false;
  }
  return true;
}

}  // namespace

InsertionCost insertion_cost(std::span<const Task> uav_route, const Task& task,
                             std::size_t position, const Scenario& scenario) {
  InsertionCost cost;
  cost.delta_j = scenario.weights.m_infinity;
  if (position > uav_route.size()) return cost;

  std::vector<Task> candidate(uav_route.begin(), uav_route.end());
  candidate.insert(candidate.begin() + position, task);
  if (!route_feasible(candidate, scenario)) return cost;

  const double energy_before =
      route_energy(uav_route, scenario.depot, scenario.fleet);
  const double energy_after =
      route_energy(candidate, scenario.depot, scenario.fleet);
  const ArrivalSchedule schedule =
      arrival_times(candidate, scenario.depot, scenario.fleet);

  cost.feasible = true;
  cost.delta_energy_j = energy_after - energy_before;
  cost.delta_wait_s = schedule.wait_s[position];
  cost.delta_j = scenario.weights.omega_e * cost.delta_energy_j +
                 scenario.weights.omega_wait * cost.delta_wait_s;
  return cost;
}

AssignResult assign_tasks(const Scenario& scenario) {
  AssignResult result;
  const int num_uavs = scenario.fleet.num_delivery_uavs;
  result.plan.sequences.assign(num_uavs, {});
  result.plan.assignment.assign(
      num_uavs, std::vector<int>(scenario.tasks.size(), 0));

  const std::vector<Task> ordered = urgency_sort(scenario.tasks);
  for (const Task& task : ordered) {
    double best_cost = scenario.weights.m_infinity;
    int best_uav = -1;
    std::size_t best_pos = 0;
    for (int u = 0; u < num_uavs; ++u) {
      const auto& route = result.plan.sequences[u];
      for (std::size_t pos = 0; pos <= route.size(); ++pos) {
        ++result.stats.candidate_evals;
        result.stats.leg_evals += route.size() + 1;
        const InsertionCost cost = insertion_cost(route, task, pos, scenario);
        if (cost.delta_j < best_cost) {
          best_cost = cost.delta_j;
          best_uav = u;
          best_pos = pos;
        }
      }
    }
    if (best_cost < scenario.weights.m_infinity) {
      auto& route = result.plan.sequences[best_uav];
      route.insert(route.begin() + best_pos, task);
      result.plan.assignment[best_uav][task.id] = 1;
    } else {
      result.feasible = false;
      result.blocking_task_id = task.id;
      return result;
    }
  }

  result.feasible = true;
  result.plan.total_estimated_energy_j = 0.0;
  for (const auto& route : result.plan.sequences) {
    result.plan.total_estimated_energy_j +=
        route_energy(route, scenario.depot, scenario.fleet);
  }
  return result;
}

std::string serialize_route_plan(const RoutePlan& plan,
                                 const Scenario& scenario) {
  json j;
  j["format_version"] = 1;
  json uavs = json::array();
  for (std::size_t u = 0; u < plan.sequences.size(); ++u) {
    const auto& route = plan.sequences[u];
    const ArrivalSchedule schedule =
        arrival_times(route, scenario.depot, scenario.fleet);
    json ids = json::array();
    json waits = json::array();
    json arrivals = json::array();
    for (std::size_t i = 0; i < route.size(); ++i) {
      ids.push_back(route[i].id);
      waits.push_back(schedule.wait_s[i]);
      arrivals.push_back(schedule.arrival_s[i]);
    }
    uavs.push_back(
        json{{"uav", u},
             {"task_ids", std::move(ids)},
             {"arrival_s", std::move(arrivals)},
             {"wait_s", std::move(waits)},
             {"estimated_energy_j",
              route_energy(route, scenario.depot, scenario.fleet)}});
  }
  j["uavs"] = std::move(uavs);
  j["total_estimated_energy_j"] = plan.total_estimated_energy_j;
  return j.dump(2) + "\n";
}

RoutePlan parse_route_plan(const std::string& json_text,
                           const Scenario& scenario) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("route plan: invalid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw ConfigError("route plan: unsupported or missing format_version");
  }
  RoutePlan plan;
  plan.sequences.assign(scenario.fleet.num_delivery_uavs, {});
  plan.assignment.assign(scenario.fleet.num_delivery_uavs,
                         std::vector<int>(scenario.tasks.size(), 0));
  try {
    for (const json& entry : j.at("uavs")) {
      const std::size_t u = entry.at("uav").get<std::size_t>();
      if (u >= plan.sequences.size()) {
        throw ConfigError("route plan: uav index out of range");
      }
      for (const json& id_json : entry.at("task_ids")) {
        const int id = id_json.get<int>();
        const auto it =
            std::find_if(scenario.tasks.begin(), scenario.tasks.end(),
                         [id](const Task& t) { return t.id == id; });
        if (it == scenario.tasks.end()) {
          throw ConfigError("route plan: unknown task id " +
                            std::to_string(id));
        }
        plan.sequences[u].push_back(*it);
        plan.assignment[u][it->id] = 1;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("route plan: ") + e.what());
  }
  for (std::size_t t = 0; t < scenario.tasks.size(); ++t) {
    int column_sum = 0;
    for (const auto& row : plan.assignment) column_sum += row[t];
    if (column_sum != 1) {
      throw ConfigError("route plan: task " + std::to_string(t) +
                        " assigned " + std::to_string(column_sum) + " times");
    }
  }
  plan.total_estimated_energy_j = 0.0;
  for (const auto& route : plan.sequences) {
    plan.total_estimated_energy_j +=
        route_energy(route, scenario.depot, scenario.fleet);
  }
  return plan;
}

void save_route_plan(const RoutePlan& plan, const Scenario& scenario,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write route plan: " + path);
  out << serialize_route_plan(plan, scenario);
}

RoutePlan load_route_plan(const std::string& path, const Scenario& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open route plan: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_route_plan(ss.str(), scenario);
}

}  // namespace hdnf
