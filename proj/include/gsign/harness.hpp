#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gsign/analysis.hpp"
#include "gsign/estimators.hpp"
#include "gsign/graph.hpp"
#include "gsign/noise.hpp"
#include "gsign/spectral.hpp"

namespace gsign {

struct GraphSpec {
  std::string kind = "sensor";  // sensor | knn_coords | edge_list
  int n = 50;
  std::uint64_t seed = 1;
  int k = 8;                    // knn_coords
  std::string coords_path;
  std::string edge_list_path;
};

struct SignalSpec {
  std::string source = "synthetic";  // synthetic | files
  int t = 95;
  double amplitude = 10.0;
  std::string readings_path;
  std::string coords_path;
};

struct ExperimentConfig {
  std::string experiment;  // steady_state | step_size_sweep | time_varying | noise_dump | theory
  GraphSpec graph;
  int band_size = 20;
  int sample_size = 30;
  NoiseModel noise = NoiseModel::laplace(0.0, 1.0);
  std::vector<EstimatorConfig> estimators;
  std::vector<double> step_sizes;  // sweep only
  int n_runs = 100;
  long n_iters = 2400;
  long convergence_window = 0;  // 0 -> n_iters / 10
  std::uint64_t seed = 1;
  int threads = 1;
  std::string outdir = "out";
  int tracked_node = 0;
  double signal_scale = 1.0;
  SignalSpec signal;
  long noise_dump_count = 1000000;
  std::string basis_cache;  // optional sidecar path

  long window() const { return convergence_window > 0 ? convergence_window : std::max(1L, n_iters / 10); }
};

// Parses and validates; throws std::runtime_error listing every violation.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);
std::string config_to_json(const ExperimentConfig& cfg);

struct ExperimentContext {
  Graph graph;
  Matrix laplacian;
  SpectralBasis basis;
  BandlimitOperator band;
  SamplingSet sampling;
};

ExperimentContext build_context(const ExperimentConfig& cfg);

// Deterministic bandlimited steady-state target signal.
Vector make_steady_signal(const BandlimitOperator& band, std::uint64_t master_seed,
                          double scale);

struct TimeVaryingSignal {
  Matrix values;  // T x N
};

// Smooth bandlimited spatial pattern with a sinusoidal diurnal drift,
// rescaled so the largest magnitude equals `amplitude`.
TimeVaryingSignal synthetic_time_varying(const BandlimitOperator& band, int t,
                                         std::uint64_t seed, double amplitude);

// Readings CSV: header "timestamp,station_0,...", one row per hour; blank or
// "nan" cells are gaps (linear interior interpolation, nearest at the edges).
TimeVaryingSignal ingest_station_dataset(
    const std::string& readings_csv, const std::string& coords_csv,
    std::vector<std::array<double, 2>>& coords_out);

struct EstimatorResult {
  std::string label;
  EstimatorConfig cfg;
  Vector msd_avg;
  Vector mad_avg;
  Vector tracked_avg;   // time-varying only
  Vector maxdev_max;    // per-iteration max L-inf deviation over runs
  std::vector<char> run_diverged;
  std::vector<char> run_converged;
  std::vector<double> run_max_msd;
  ConvergenceReport convergence;  // on the averaged MSD trace
  double total_step_seconds = 0.0;
  double median_step_us = 0.0;
  double theory_msd = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResults {
  ExperimentConfig config;
  double flom_r = std::numeric_limits<double>::quiet_NaN();
  double mu_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<EstimatorResult> estimators;
  Vector tracked_truth;  // time-varying only
  double signal_dynamic_range = 0.0;
  std::vector<std::string> warnings;
};

ExperimentResults run_steady_state(const ExperimentConfig& cfg);
ExperimentResults run_step_size_sweep(const ExperimentConfig& cfg);
ExperimentResults run_time_varying(const ExperimentConfig& cfg);

// msd.csv / mad.csv / timing.csv / summary.json / config_resolved.json
// (tracked.csv and maxdev.csv for time-varying runs). Values are %.17g.
void emit_results(const ExperimentResults& results, const std::string& outdir);

void dump_noise_csv(const ExperimentConfig& cfg, const std::string& outdir);
void write_synthetic_dataset(int n, int t, std::uint64_t seed, int band_size,
                             double amplitude, const std::string& outdir);

int run_cli(int argc, char** argv);

}  // namespace gsign
