// Acceptance gate for the toolkit: nine checks, one PASS/FAIL line each.
// Exit status 0 iff every criterion passes.
//
// Usage: hdnf_acceptance [path-to-hdnf-cli]
// The CLI path enables the real two-invocation determinism check for
// criterion 9; without it the toy matrix is compared in-process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdnf/deployment.hpp"
#include "hdnf/matd3.hpp"
#include "hdnf/pipeline.hpp"
#include "hdnf/planner.hpp"
#include "hdnf/tasking.hpp"
#include "hdnf/topology.hpp"

using namespace hdnf;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Gate {
  int failures = 0;

  template <typename Fn>
  void run(int idx, const char* title, double budget_s, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (ok && budget_s > 0.0 && elapsed >= budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ");
      detail += "over time budget";
    }
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL",
                idx, title, elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string fmt(double v) { return format_sig9(v); }

// ------------------------------------------------------------- criterion 2

BackhaulGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  BackhaulGraph g;
  for (int i = 0; i < n; ++i) {
    g.node_positions.push_back({double(i), 0.0, 0.0});
  }
  g.adjacency.assign(n, std::vector<int>(n, 0));
  g.degrees.assign(n, 0);
  for (const auto& [a, b] : edges) {
    g.adjacency[a][b] = g.adjacency[b][a] = 1;
    ++g.degrees[a];
    ++g.degrees[b];
  }
  return g;
}

// ------------------------------------------------------------- criterion 3
// Exhaustive 2-UAV assignment oracle over every split and ordering.

bool oracle_route_ok(const std::vector<Task>& route, const Scenario& s) {
  double payload = 0.0;
  for (const Task& t : route) payload += t.payload_kg;
  if (payload > s.fleet.max_payload_kg) return false;
  if (route_energy(route, s.depot, s.fleet) > s.fleet.battery_j) return false;
  const ArrivalSchedule sched = arrival_times(route, s.depot, s.fleet);
  for (std::size_t i = 0; i < route.size(); ++i) {
    if (sched.arrival_s[i] > route[i].window_close_s) return false;
  }
  return true;
}

double plan_cost(const std::vector<std::vector<Task>>& routes,
                 const Scenario& s) {
  double energy = 0.0, wait = 0.0;
  for (const auto& route : routes) {
    energy += route_energy(route, s.depot, s.fleet);
    const ArrivalSchedule sched = arrival_times(route, s.depot, s.fleet);
    wait = std::accumulate(sched.wait_s.begin(), sched.wait_s.end(), wait);
  }
  return s.weights.omega_e * energy + s.weights.omega_wait * wait;
}

struct BruteResult {
  bool feasible = false;
  double best_cost = 0.0;
};

BruteResult brute_force(const Scenario& s) {
  const std::size_t n = s.tasks.size();
  BruteResult best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<Task> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      ((mask >> i) & 1u ? a : b).push_back(s.tasks[i]);
    }
    auto for_each_order = [](std::vector<Task> set, auto&& fn) {
      std::vector<std::size_t> idx(set.size());
      std::iota(idx.begin(), idx.end(), 0);
      do {
        std::vector<Task> route;
        for (std::size_t i : idx) route.push_back(set[i]);
        fn(route);
      } while (std::next_permutation(idx.begin(), idx.end()));
    };
    for_each_order(a, [&](const std::vector<Task>& ra) {
      if (!oracle_route_ok(ra, s)) return;
      for_each_order(b, [&](const std::vector<Task>& rb) {
        if (!oracle_route_ok(rb, s)) return;
        const double cost = plan_cost({ra, rb}, s);
        if (!best.feasible || cost < best.best_cost) {
          best.feasible = true;
          best.best_cost = cost;
        }
      });
    });
  }
  return best;
}

Scenario oracle_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 13);
  const int n_tasks = 3 + static_cast<int>(rng() % 3);  // 3..5
  Scenario s = generate_scenario(
      seed, 2000.0, n_tasks,
      R"({"fleet": {"num_delivery_uavs": 2, "max_payload_kg": 6.0,
           "battery_j": 1.2e7}})");
  std::uniform_real_distribution<double> payload(1.0, 4.0);
  std::uniform_real_distribution<double> open(0.0, 400.0);
  std::uniform_real_distribution<double> span(200.0, 1500.0);
  for (Task& t : s.tasks) {
    t.payload_kg = payload(rng);
    t.window_open_s = open(rng);
    t.window_close_s = t.window_open_s + span(rng);
  }
  return s;
}

// ----------------------------------------------------------- criteria 4, 5

double psi_ref(double s, double gamma, double smax) {
  if (s < gamma) return kInf;
  if (smax <= gamma + 1e-6) return 0.0;
  return std::max(0.0, (smax - s) / (smax - gamma));
}

double dijkstra_cost(int start, int goal, const SinrField& f,
                     const Scenario& sc) {
  const LatticeSpec& lat = f.lattice;
  const double gamma = db_to_linear(sc.thresholds.gamma_ctrl_db);
  if (f.sinr_linear[start] < gamma || f.sinr_linear[goal] < gamma) return kInf;
  std::vector<double> dist(lat.node_count(), kInf);
  dist[start] = 0.0;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
  pq.emplace(0.0, start);
  while (!pq.empty()) {
    const auto [d, cur] = pq.top();
    pq.pop();
    if (d > dist[cur]) continue;
    if (cur == goal) return d;
    const int level = lat.level_of(cur);
    const int row = lat.row_of(cur);
    const int col = lat.col_of(cur);
    for (int dl = -1; dl <= 1; ++dl) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dl == 0 && dr == 0 && dc == 0) continue;
          const int nl = level + dl, nr = row + dr, nc = col + dc;
          if (nl < 0 || nl >= lat.levels || nr < 0 || nr >= lat.k || nc < 0 ||
              nc >= lat.k) {
            continue;
          }
          const int nb = lat.node_id(nl, nr, nc);
          const double psi = psi_ref(f.sinr_linear[nb], gamma, f.s_max);
          if (std::isinf(psi)) continue;
          const double step =
              sc.weights.omega_e *
                  distance_m(lat.node_center(cur), lat.node_center(nb)) +
              sc.weights.lambda_out * psi;
          if (dist[cur] + step < dist[nb]) {
            dist[nb] = dist[cur] + step;
            pq.emplace(dist[nb], nb);
          }
        }
      }
    }
  }
  return dist[goal];
}

// ------------------------------------------------------------- criterion 9

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec toy_matrix_spec() {
  ExperimentSpec spec;
  spec.schemes = {"hdnf", "grid"};
  spec.areas_m = {800.0};
  spec.seeds = {1, 2};
  spec.bs_budgets = {3};
  spec.num_tasks = 3;
  spec.scenario_overrides =
      R"({"sampling": {"grid_k": 20, "m_v": 4, "i_t": 5}})";
  spec.train.episodes = 3;
  spec.train.steps_per_episode = 10;
  spec.train.batch_size = 16;
  spec.train.warmup_transitions = 16;
  spec.train.buffer_capacity = 2048;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  Gate gate;

  gate.run(1, "channel closed forms", 1.0, [](std::string& detail) {
    ChannelParams p;  // defaults: 2.4 GHz carrier, alpha 9.61, beta 0.16
    const double fspl = fspl_db(1000.0, p);
    const double plos = los_probability(p.alpha, p);
    detail = "fspl(1 km, 2.4 GHz) = " + fmt(fspl) +
             " dB, P_LoS(alpha) = " + fmt(plos);
    return p.carrier_frequency_hz == 2.4e9 && p.alpha == 9.61 &&
           p.beta == 0.16 && std::abs(fspl - 100.05) <= 0.01 &&
           std::abs(plos - 1.0 / (1.0 + p.alpha)) <= 1e-9;
  });

  gate.run(2, "spectral connectivity oracle", 10.0, [](std::string& detail) {
    bool ok = true;
    // Disconnected: one edge, one isolated pair.
    ok &= algebraic_connectivity(make_graph(4, {{0, 1}})) == 0.0;
    // Path P3: Laplacian spectrum {0, 1, 3}.
    ok &= std::abs(algebraic_connectivity(make_graph(3, {{0, 1}, {1, 2}})) -
                   1.0) <= 1e-6;
    // Complete graphs: lambda2(K_n) = n.
    for (int n = 2; n <= 6; ++n) {
      std::vector<std::pair<int, int>> edges;
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
      }
      ok &= std::abs(algebraic_connectivity(make_graph(n, edges)) - n) <= 1e-6;
    }
    // Edge addition never lowers lambda2.
    std::mt19937_64 rng(404);
    int tested = 0;
    for (int trial = 0; tested < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 11);  // 2..12
      std::vector<std::pair<int, int>> edges, absent;
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          if (rng() % 2 == 0) {
            edges.emplace_back(a, b);
          } else {
            absent.emplace_back(a, b);
          }
        }
      }
      if (absent.empty()) continue;
      const double before = algebraic_connectivity(make_graph(n, edges));
      edges.push_back(absent[rng() % absent.size()]);
      const double after = algebraic_connectivity(make_graph(n, edges));
      ok &= after >= before - 1e-9;
      ++tested;
    }
    detail = "200 random edge additions monotone";
    return ok;
  });

  gate.run(3, "assignment vs exhaustive oracle", 60.0, [](std::string& detail) {
    bool ok = true;
    int oracle_feasible = 0, heur_feasible = 0, missed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Scenario s = oracle_instance(seed);
      const BruteResult oracle = brute_force(s);
      const AssignResult heur = assign_tasks(s);
      if (oracle.feasible) ++oracle_feasible;
      if (!heur.feasible) {
        if (oracle.feasible) ++missed;
        continue;
      }
      ++heur_feasible;
      ok &= oracle.feasible;  // a real plan implies oracle feasibility
      for (const auto& route : heur.plan.sequences) {
        ok &= oracle_route_ok(route, s);
      }
      for (std::size_t t = 0; t < s.tasks.size(); ++t) {
        int count = 0;
        for (const auto& row : heur.plan.assignment) count += row[t];
        ok &= count == 1;
      }
      ok &= plan_cost(heur.plan.sequences, s) >= oracle.best_cost - 1e-6;
    }
    ok &= oracle_feasible > 10 && heur_feasible > 10;
    detail = "heuristic " + std::to_string(heur_feasible) +
             "/100 feasible, oracle " + std::to_string(oracle_feasible) +
             "/100, misses " + std::to_string(missed) +
             " (incompleteness reported, not scored)";
    return ok;
  });

  gate.run(4, "planner matches dijkstra", 60.0, [](std::string& detail) {
    const Scenario s = generate_scenario(1, 2000.0, 2);
    LatticeSpec lat;
    lat.k = 20;
    lat.area_side_m = 2000.0;
    lat.delta_h_m = 10.0;
    lat.levels = 5;
    const double gamma = db_to_linear(s.thresholds.gamma_ctrl_db);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    int found = 0;
    for (int trial = 0; trial < 20; ++trial) {
      SinrField f;
      f.lattice = lat;
      f.sinr_linear.resize(lat.node_count());
      for (double& v : f.sinr_linear) {
        v = u(rng) < 0.2 ? gamma * u(rng) : gamma * std::pow(100.0, u(rng));
      }
      const int start = lat.node_id(0, 0, 0);
      const int goal = lat.node_id(4, 19, 19);
      f.sinr_linear[start] = gamma * 50.0;
      f.sinr_linear[goal] = gamma * 50.0;
      f.s_max = *std::max_element(f.sinr_linear.begin(), f.sinr_linear.end());

      const PathResult res = find_path(start, goal, f, s);
      const double ref = dijkstra_cost(start, goal, f, s);
      if (!res.found) {
        ok &= std::isinf(ref);
        continue;
      }
      ++found;
      ok &= std::abs(res.cost - ref) <= 1e-9 * std::max(1.0, std::abs(ref));
      for (double db : res.per_node_sinr_db) {
        ok &= db >= s.thresholds.gamma_ctrl_db - 1e-9;
      }
    }
    ok &= found >= 5;
    detail = std::to_string(found) +
             "/20 reachable, costs equal, no sub-threshold waypoints";
    return ok;
  });

  gate.run(5, "outage-penalty corridor routing", 5.0, [](std::string& detail) {
    const Scenario s = generate_scenario(1, 1500.0, 2);
    if (s.weights.lambda_out != 1000.0) return false;
    LatticeSpec lat;
    lat.k = 15;
    lat.area_side_m = 1500.0;
    lat.delta_h_m = 100.0;
    lat.levels = 1;
    const double gamma = db_to_linear(s.thresholds.gamma_ctrl_db);
    SinrField f;
    f.lattice = lat;
    f.sinr_linear.assign(lat.node_count(), gamma * 100.0);
    const int wall_col = 7, gap_row = 1;
    for (int row = 0; row < lat.k; ++row) {
      if (row != gap_row) {
        f.sinr_linear[lat.node_id(0, row, wall_col)] = gamma * 1.0001;
      }
    }
    f.s_max = gamma * 100.0;

    const int start = lat.node_id(0, 8, 2);
    const int goal = lat.node_id(0, 8, 12);
    const PathResult res = find_path(start, goal, f, s);
    if (!res.found) return false;
    double straight = 0.0;  // row-8 march straight through the weak wall
    for (int col = 3; col <= 12; ++col) {
      straight += s.weights.omega_e * lat.cell_m() +
                  s.weights.lambda_out *
                      psi_ref(f.sinr_linear[lat.node_id(0, 8, col)], gamma,
                              f.s_max);
    }
    bool avoids = true;
    for (int id : res.nodes) avoids &= f.sinr_linear[id] > gamma * 99.0;
    detail = "detour " + fmt(res.cost) + " < straight " + fmt(straight);
    return res.cost < straight && avoids;
  });

  gate.run(6, "training beats random placement", 1800.0,
           [](std::string& detail) {
    const Scenario s = generate_scenario(
        7, 1000.0, 5,
        R"({"max_bs": 4, "sampling": {"grid_k": 20, "m_v": 4, "i_t": 5}})");
    const AssignResult assign = assign_tasks(s);
    if (!assign.feasible) return false;

    TrainConfig cfg;
    cfg.episodes = 200;
    cfg.steps_per_episode = 20;
    cfg.batch_size = 32;
    cfg.warmup_transitions = 200;
    cfg.buffer_capacity = 20000;

    const SampleLayers layers = build_sample_layers(s);
    double final20 = 0.0, auc_full = 0.0, auc_noper = 0.0, baseline = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig full = cfg;
      full.seed = seed;
      const TrainResult r = train(s, assign.plan, full);
      for (int e = cfg.episodes - 20; e < cfg.episodes; ++e) {
        final20 += r.log[e].reward / (20.0 * 5.0);
      }
      for (const EpisodeLog& e : r.log) auc_full += e.reward / 5.0;

      TrainConfig noper = full;
      noper.no_per = true;
      for (const EpisodeLog& e : train(s, assign.plan, noper).log) {
        auc_noper += e.reward / 5.0;
      }
      // A static random placement holds its per-step reward all episode.
      baseline += compute_reward(random_baseline(s, 4, seed).positions, s,
                                 layers)
                      .total *
                  cfg.steps_per_episode / 5.0;
    }
    detail = "final20 " + fmt(final20) + " vs random " + fmt(baseline) +
             "; AUC full " + fmt(auc_full) + ", no-PER " + fmt(auc_noper);
    return final20 > baseline &&
           auc_noper <= auc_full + 0.05 * std::abs(auc_full);
  });

  gate.run(7, "pruning preserves coverage and connectivity", 60.0,
           [](std::string& detail) {
    Scenario s = generate_scenario(
        41, 1000.0, 1, R"({"sampling": {"grid_k": 4, "m_v": 2, "i_t": 3}})");
    s.tasks[0].location = {300.0, 200.0, 0.0};
    const SampleLayers layers = build_sample_layers(s);
    const double eps = 1e-6;

    auto cbar = [&](const Deployment& d) {
      return layer_metrics(layers, d.positions, s.channel, s.thresholds,
                           s.weights)
          .cbar_syn;
    };
    auto conn = [&](const Deployment& d) {
      return compute_reward(d.positions, s, layers).c_conn;
    };

    bool ok = true;
    // Redundant hand-built deployment: the far corner station is deadweight
    // (it even severs the backhaul) and must go.
    Deployment redundant;
    redundant.positions = {{250.0, 150.0, 150.0}, {950.0, 950.0, 40.0}};
    redundant.gate_scores = {0.9, 0.8};
    const Deployment pruned = prune_deployment(redundant, s, eps);
    ok &= pruned.size() < redundant.size();
    ok &= conn(pruned) == 1.0;
    ok &= cbar(pruned) >= cbar(redundant) - eps;

    // Every toy deployment: pruning never shrinks synthesis coverage by more
    // than epsilon, never grows the fleet, and keeps full connectivity
    // whenever the input had it.
    std::vector<Deployment> toys = {redundant, pruned,
                                    grid_baseline(s, 2, 120.0),
                                    grid_baseline(s, 4, 150.0),
                                    random_baseline(s, 3, 5)};
    int removed_total = 0;
    for (const Deployment& toy : toys) {
      const Deployment out = prune_deployment(toy, s, eps);
      removed_total += static_cast<int>(toy.size() - out.size());
      ok &= out.size() <= toy.size() && out.size() >= 1;
      ok &= cbar(out) >= cbar(toy) - eps - 1e-12;
      if (conn(toy) == 1.0) ok &= conn(out) == 1.0;
      if (out.size() < toy.size()) ok &= conn(out) == 1.0;
    }
    detail = "redundant 2 -> " + std::to_string(pruned.size()) + " BS, " +
             std::to_string(removed_total) + " stations removed across toys";
    return ok;
  });

  gate.run(8, "end-to-end strict delivery accounting", 30.0,
           [](std::string& detail) {
    Scenario s = generate_scenario(
        7, 800.0, 2,
        R"({"fleet": {"num_delivery_uavs": 2}, "max_bs": 3,
            "sampling": {"grid_k": 8, "delta_h_m": 50.0, "m_v": 2, "i_t": 3}})");
    for (Task& t : s.tasks) {
      t.payload_kg = 2.0;
      t.window_open_s = 0.0;
      t.window_close_s = 1e5;
    }
    s.tasks[0].location = {260.0, 180.0, 0.0};  // near the depot
    s.tasks[1].location = {720.0, 680.0, 0.0};  // far corner

    auto run_with = [&](const Position3D& bs) {
      DeploymentSource src;
      src.kind = DeploymentSource::Kind::fixed;
      src.fixed_deployment.positions = {bs};
      src.fixed_deployment.gate_scores = {1.0};
      return run_pipeline(s, src);
    };

    bool ok = true;
    // Hand-placed full coverage: every delivery lands, zero outage slots.
    const PipelineResult covered = run_with({400.0, 400.0, 150.0});
    ok &= covered.feasible;
    ok &= covered.metrics.task_success_rate == 1.0;
    ok &= covered.metrics.outage_slots == 0;
    ok &= covered.metrics.tasks_succeeded == 2;

    // Low station near the depot: the far task's cell drops below the
    // control threshold and its UAV's remaining tasks all fail.
    const PipelineResult degraded = run_with({260.0, 140.0, 30.0});
    ok &= degraded.feasible;
    ok &= degraded.metrics.task_success_rate < 1.0;
    int succeeded = 0, failed = 0;
    for (std::size_t u = 0; u < degraded.metrics.per_uav.size(); ++u) {
      const UavReport& r = degraded.metrics.per_uav[u];
      const std::size_t completed =
          degraded.trajectories[u].task_waypoint_index.size();
      for (std::size_t t = 0; t < r.task_success.size(); ++t) {
        // Strict policy: exactly the tasks before the failed leg succeed.
        ok &= (r.task_success[t] != 0) == (t < completed);
        (r.task_success[t] ? succeeded : failed) += 1;
      }
    }
    ok &= succeeded + failed == 2;  // failed + succeeded = T exactly
    ok &= succeeded == degraded.metrics.tasks_succeeded;
    ok &= failed >= 1;
    detail = "covered 2/2 with 0 outage slots; degraded " +
             std::to_string(succeeded) + "/2";
    return ok;
  });

  gate.run(9, "bench determinism", 0.0, [&cli](std::string& detail) {
    if (!cli.empty()) {
      const fs::path base =
          fs::temp_directory_path() /
          ("hdnf_accept_" + std::to_string(std::random_device{}()));
      const fs::path d1 = base / "b1";
      const fs::path d2 = base / "b2";
      fs::create_directories(d1);
      fs::create_directories(d2);
      bool ok = true;
      for (const fs::path& d : {d1, d2}) {
        const std::string cmd = "\"" + cli + "\" --outdir \"" + d.string() +
                                "\" bench --skip-kernels > \"" +
                                (d / "stdout.txt").string() + "\" 2>&1";
        ok &= std::system(cmd.c_str()) == 0;
      }
      int compared = 0;
      for (const char* name :
           {"results.csv", "metrics_vs_area.csv", "boxplot.csv"}) {
        const std::string a = slurp((d1 / name).string());
        const std::string b = slurp((d2 / name).string());
        ok &= !a.empty() && a == b;
        ++compared;
      }
      fs::remove_all(base);
      detail = "two CLI bench runs, " + std::to_string(compared) +
               " tables byte-identical";
      return ok;
    }
    std::ostringstream a, b;
    {
      const fs::path tmp = fs::temp_directory_path() / "hdnf_accept_mat.csv";
      write_results_csv(run_experiment_matrix(toy_matrix_spec()),
                        tmp.string());
      a << slurp(tmp.string());
      write_results_csv(run_experiment_matrix(toy_matrix_spec()),
                        tmp.string());
      b << slurp(tmp.string());
      fs::remove(tmp);
    }
    detail = "in-process toy matrix byte-identical";
    return !a.str().empty() && a.str() == b.str();
  });

  if (gate.failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", gate.failures);
  return 1;
}
