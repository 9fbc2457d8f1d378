#pragma once

#include <cstdint>
#include <string>

#include "gsign/matrix.hpp"
#include "gsign/noise.hpp"
#include "gsign/spectral.hpp"

namespace gsign {

enum class EstimatorKind { Glms, Glmp, GSign };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::GSign;
  double mu = 0.1;  // step size, > 0
  double p = 1.5;   // GLMP only, 1 < p <= 2 (p = 2 degenerates to GLMS)

  void validate() const;
};

struct EstimatorState {
  Vector x;                 // current estimate
  long iteration = 0;
  bool diverged = false;
  long diverged_at = -1;
};

// Partial noisy observation: y = D_S (x_true + w), exactly zero off S.
struct Observation {
  Vector y;
};

Observation make_observation(const Vector& x_true, const Vector& noise,
                             const SamplingSet& sampling);

// One-step updates. Pure: the input state is not modified.
EstimatorState glms_step(const EstimatorState& state, const Observation& obs,
                         const SamplingSet& sampling, const BandlimitOperator& band,
                         const EstimatorConfig& cfg);
EstimatorState gsign_step(const EstimatorState& state, const Observation& obs,
                          const SamplingSet& sampling, const BandlimitOperator& band,
                          const EstimatorConfig& cfg);
EstimatorState glmp_step(const EstimatorState& state, const Observation& obs,
                         const SamplingSet& sampling, const BandlimitOperator& band,
                         const EstimatorConfig& cfg);
EstimatorState step(const EstimatorState& state, const Observation& obs,
                    const SamplingSet& sampling, const BandlimitOperator& band,
                    const EstimatorConfig& cfg);

// True signal per iteration: either a fixed vector or one row of a T x N
// series per step (held at the last row once exhausted).
class SignalSource {
 public:
  explicit SignalSource(const Vector& fixed) : fixed_(&fixed) {}
  explicit SignalSource(const Matrix& series) : series_(&series) {}

  const double* at(long k) const;
  std::size_t size() const;
  double max_abs() const;

 private:
  const Vector* fixed_ = nullptr;
  const Matrix* series_ = nullptr;
};

struct RunOptions {
  long n_iters = 1;
  std::uint64_t stream_seed = 0;
  int tracked_node = -1;       // record this node's estimate when >= 0
  bool record_estimates = false;
  bool time_steps = false;     // collect per-iteration step durations
};

struct RunTrace {
  Vector msd;             // per iteration, vs the current true signal
  Vector mad;
  Vector tracked_estimate;  // empty unless tracked_node >= 0
  Vector max_abs_dev;       // per-iteration L-inf deviation from truth
  std::vector<Vector> estimates;  // only when record_estimates
  std::vector<double> step_ns;    // only when time_steps
  bool diverged = false;
  long diverged_at = -1;
};

// Single Monte Carlo run: per iteration draw noise, observe, step, record.
// Initial estimate is zero. Deterministic for a fixed stream seed.
RunTrace run_estimation(const EstimatorConfig& cfg, const SignalSource& signal,
                        const NoiseModel& noise, const SamplingSet& sampling,
                        const BandlimitOperator& band, const RunOptions& opts);

}  // namespace gsign
