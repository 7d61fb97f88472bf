// Serial vs OpenMP comparison for the two data-parallel kernels: the C2 grid
// map (sample feasibility over K x K cells) and the lattice SINR field. The
// parallel versions must match the serial references bit for bit; the binary
// exits nonzero if they ever differ.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdnf/c2_service.hpp"
#include "hdnf/deployment.hpp"
#include "hdnf/planner.hpp"
#include "hdnf/scenario.hpp"

using namespace hdnf;

namespace {

double median_ms(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

template <class Fn>
double bench_ms(int repeats, Fn&& fn) {
  using clock = std::chrono::steady_clock;
  std::vector<double> samples;
  samples.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    samples.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return median_ms(std::move(samples));
}

}  // namespace

int main(int argc, char** argv) {
  int grid_k = 64;
  int n_bs = 12;
  int repeats = 5;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int value = std::atoi(argv[i + 1]);
    if (flag == "--grid-k") grid_k = value;
    else if (flag == "--n-bs") n_bs = value;
    else if (flag == "--repeats") repeats = value;
    else {
      std::cerr << "usage: hdnf_bench [--grid-k N] [--n-bs N] [--repeats N]\n";
      return 2;
    }
  }

  nlohmann::json overrides = {{"sampling", {{"grid_k", grid_k}}},
                              {"max_bs", n_bs}};
  const Scenario scenario =
      generate_scenario(7, 2500.0, 15, overrides.dump());
  const Deployment deployment = random_baseline(scenario, n_bs, 11);
  const SampleLayers layers = build_sample_layers(scenario);
  const LatticeSpec lattice = LatticeSpec::from_scenario(scenario);

  GridMap grid_ser, grid_par;
  const double t_grid_ser = bench_ms(repeats, [&] {
    grid_ser = build_grid_map_serial(
        layers, deployment.positions, scenario.channel,
        scenario.thresholds.gamma_ctrl_db, scenario.sampling.grid_k,
        scenario.area_side_m);
  });
  const double t_grid_par = bench_ms(repeats, [&] {
    grid_par = build_grid_map(layers, deployment.positions, scenario.channel,
                              scenario.thresholds.gamma_ctrl_db,
                              scenario.sampling.grid_k, scenario.area_side_m);
  });

  SinrField field_ser, field_par;
  const double t_field_ser = bench_ms(repeats, [&] {
    field_ser = build_sinr_field_serial(lattice, deployment.positions,
                                        scenario.channel);
  });
  const double t_field_par = bench_ms(repeats, [&] {
    field_par =
        build_sinr_field(lattice, deployment.positions, scenario.channel);
  });

  LayerMetrics metrics_ser, metrics_par;
  const double t_metrics_ser = bench_ms(repeats, [&] {
    metrics_ser = layer_metrics_serial(layers, deployment.positions,
                                       scenario.channel, scenario.thresholds,
                                       scenario.weights);
  });
  const double t_metrics_par = bench_ms(repeats, [&] {
    metrics_par = layer_metrics(layers, deployment.positions, scenario.channel,
                                scenario.thresholds, scenario.weights);
  });

  double grid_diff = 0.0;
  for (std::size_t i = 0; i < grid_ser.values.size(); ++i) {
    grid_diff =
        std::max(grid_diff, std::abs(grid_ser.values[i] - grid_par.values[i]));
  }
  double field_diff = 0.0;
  for (std::size_t i = 0; i < field_ser.sinr_linear.size(); ++i) {
    field_diff = std::max(
        field_diff,
        std::abs(field_ser.sinr_linear[i] - field_par.sinr_linear[i]));
  }
  const double metrics_diff =
      std::max({std::abs(metrics_ser.c_term - metrics_par.c_term),
                std::abs(metrics_ser.c_vert - metrics_par.c_vert),
                std::abs(metrics_ser.c_corr - metrics_par.c_corr),
                std::abs(metrics_ser.cbar_syn - metrics_par.cbar_syn)});

  auto row = [](const char* name, std::size_t points, double ser, double par,
                double diff) {
    std::cout << name << ": " << points << " points, serial " << ser
              << " ms, parallel " << par << " ms, speedup "
              << ser / std::max(par, 1e-9) << "x, max |diff| " << diff << "\n";
  };
  std::cout << "median of " << repeats << " runs\n";
  row("grid_map   ", grid_ser.values.size(), t_grid_ser, t_grid_par,
      grid_diff);
  row("sinr_field ", field_ser.sinr_linear.size(), t_field_ser, t_field_par,
      field_diff);
  row("layer_metrics", layers.terminal.size() + layers.vertical.size() +
                           layers.corridor.size(),
      t_metrics_ser, t_metrics_par, metrics_diff);

  if (grid_diff != 0.0 || field_diff != 0.0 || metrics_diff != 0.0) {
    std::cerr << "FAIL: parallel kernels disagree with the serial reference\n";
    return 1;
  }
  std::cout << "parallel kernels match the serial reference exactly\n";
  return 0;
}
