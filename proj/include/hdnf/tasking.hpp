#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdnf/scenario.hpp"

namespace hdnf {

struct RoutePlan {
  std::vector<std::vector<int>> assignment;   // U x T, column sums of 1
  std::vector<std::vector<Task>> sequences;   // per-UAV ordered tasks
  double total_estimated_energy_j = 0.0;
};

struct InsertionCost {
  double delta_j = 0.0;   // m_infinity when infeasible
  double delta_energy_j = 0.0;
  double delta_wait_s = 0.0;
  bool feasible = false;
};

struct AssignStats {
  std::uint64_t candidate_evals = 0;
  std::uint64_t leg_evals = 0;
};

struct AssignResult {
  bool feasible = false;
  RoutePlan plan;
  int blocking_task_id = -1;  // set when infeasible
  AssignStats stats;
};

// Ascending deadline, ties by window open then id.
std::vector<Task> urgency_sort(std::span<const Task> tasks);

// Marginal cost of inserting `task` at `position`; payload, battery, or
// time-window violations yield the m_infinity sentinel, not an exception.
InsertionCost insertion_cost(std::span<const Task> uav_route, const Task& task,
                             std::size_t position, const Scenario& scenario);

// Sequential insertion over tasks in urgency order; scans every UAV and
// position, ties resolved toward the lower UAV index then earlier position.
AssignResult assign_tasks(const Scenario& scenario);

std::string serialize_route_plan(const RoutePlan& plan,
                                 const Scenario& scenario);
RoutePlan parse_route_plan(const std::string& json_text,
                           const Scenario& scenario);
void save_route_plan(const RoutePlan& plan, const Scenario& scenario,
                     const std::string& path);
RoutePlan load_route_plan(const std::string& path, const Scenario& scenario);

}  // namespace hdnf
