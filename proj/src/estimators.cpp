#include "gsign/estimators.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gsign {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Glms: return "glms";
    case EstimatorKind::Glmp: return "glmp";
    case EstimatorKind::GSign: return "gsign";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  if (name == "glms") return EstimatorKind::Glms;
  if (name == "glmp") return EstimatorKind::Glmp;
  if (name == "gsign") return EstimatorKind::GSign;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (valid: glms, glmp, gsign)");
}

void EstimatorConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("estimator: step size must be > 0");
  if (kind == EstimatorKind::Glmp && !(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("estimator: GLMP needs 1 < p <= 2");
}

Observation make_observation(const Vector& x_true, const Vector& noise,
                             const SamplingSet& sampling) {
  if (x_true.size() != noise.size() ||
      x_true.size() != sampling.mask.size())
    throw std::invalid_argument("make_observation: dimension mismatch");
  Observation obs;
  obs.y.assign(x_true.size(), 0.0);
  for (int i : sampling.nodes)
    obs.y[static_cast<std::size_t>(i)] =
        x_true[static_cast<std::size_t>(i)] + noise[static_cast<std::size_t>(i)];
  return obs;
}

namespace {

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// In-place update kernels. x has length n; scratch is an n-length buffer.
void glms_update(Vector& x, const Vector& y, const SamplingSet& sampling,
                 const BandlimitOperator& band, double mu, Vector& scratch,
                 Vector& scratch2) {
  const std::size_t n = x.size();
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (int i : sampling.nodes) {
    const auto u = static_cast<std::size_t>(i);
    scratch[u] = y[u] - x[u];
  }
  kernels::active().matvec(band.b.data(), scratch.data(), scratch2.data(), n, n);
  kernels::active().axpy(x.data(), mu, scratch2.data(), n);
}

void glmp_update(Vector& x, const Vector& y, const SamplingSet& sampling,
                 const BandlimitOperator& band, double mu, double p,
                 Vector& scratch, Vector& scratch2) {
  const std::size_t n = x.size();
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (int i : sampling.nodes) {
    const auto u = static_cast<std::size_t>(i);
    const double e = y[u] - x[u];
    if (e == 0.0) continue;
    scratch[u] = std::copysign(std::pow(std::fabs(e), p - 1.0), e);
  }
  kernels::active().matvec(band.b.data(), scratch.data(), scratch2.data(), n, n);
  kernels::active().axpy(x.data(), mu, scratch2.data(), n);
}

// The ternary sign vector is supported on S, so B * Sign(...) is accumulated
// from the matching rows of B (B is symmetric); multiply-free. All signs are
// read off the incoming estimate before any row is applied, then the rows are
// added in one fused pass.
void gsign_update(Vector& x, const Vector& y, const SamplingSet& sampling,
                  const BandlimitOperator& band, double mu) {
  static thread_local std::vector<double> alphas;
  static thread_local std::vector<const double*> rows;
  alphas.clear();
  rows.clear();
  for (int i : sampling.nodes) {
    const auto u = static_cast<std::size_t>(i);
    const double e = y[u] - x[u];
    if (e == 0.0) continue;
    alphas.push_back(e > 0.0 ? mu : -mu);
    rows.push_back(band.b.row(u));
  }
  kernels::active().axpy_batch(x.data(), alphas.data(), rows.data(),
                               alphas.size(), x.size());
}

void apply_update(EstimatorKind kind, Vector& x, const Vector& y,
                  const SamplingSet& sampling, const BandlimitOperator& band,
                  const EstimatorConfig& cfg, Vector& scratch, Vector& scratch2) {
  switch (kind) {
    case EstimatorKind::Glms:
      glms_update(x, y, sampling, band, cfg.mu, scratch, scratch2);
      break;
    case EstimatorKind::Glmp:
      glmp_update(x, y, sampling, band, cfg.mu, cfg.p, scratch, scratch2);
      break;
    case EstimatorKind::GSign:
      gsign_update(x, y, sampling, band, cfg.mu);
      break;
  }
}

EstimatorState one_step(EstimatorKind expected, const EstimatorState& state,
                        const Observation& obs, const SamplingSet& sampling,
                        const BandlimitOperator& band, const EstimatorConfig& cfg) {
  cfg.validate();
  if (cfg.kind != expected)
    throw std::invalid_argument("estimator step called with mismatched config kind");
  const std::size_t n = band.b.rows();
  if (state.x.size() != n || obs.y.size() != n ||
      sampling.mask.size() != n)
    throw std::invalid_argument("estimator step: dimension mismatch");

  EstimatorState next = state;
  Vector scratch(n), scratch2(n);
  apply_update(cfg.kind, next.x, obs.y, sampling, band, cfg, scratch, scratch2);
  next.iteration = state.iteration + 1;
  if (!next.diverged && !all_finite(next.x)) {
    next.diverged = true;
    next.diverged_at = next.iteration;
  }
  return next;
}

}  // namespace

EstimatorState glms_step(const EstimatorState& state, const Observation& obs,
                         const SamplingSet& sampling, const BandlimitOperator& band,
                         const EstimatorConfig& cfg) {
  return one_step(EstimatorKind::Glms, state, obs, sampling, band, cfg);
}

EstimatorState gsign_step(const EstimatorState& state, const Observation& obs,
                          const SamplingSet& sampling, const BandlimitOperator& band,
                          const EstimatorConfig& cfg) {
  return one_step(EstimatorKind::GSign, state, obs, sampling, band, cfg);
}

EstimatorState glmp_step(const EstimatorState& state, const Observation& obs,
                         const SamplingSet& sampling, const BandlimitOperator& band,
                         const EstimatorConfig& cfg) {
  return one_step(EstimatorKind::Glmp, state, obs, sampling, band, cfg);
}

EstimatorState step(const EstimatorState& state, const Observation& obs,
                    const SamplingSet& sampling, const BandlimitOperator& band,
                    const EstimatorConfig& cfg) {
  return one_step(cfg.kind, state, obs, sampling, band, cfg);
}

const double* SignalSource::at(long k) const {
  if (fixed_) return fixed_->data();
  const long t = std::min<long>(k, static_cast<long>(series_->rows()) - 1);
  return series_->row(static_cast<std::size_t>(t));
}

std::size_t SignalSource::size() const {
  return fixed_ ? fixed_->size() : series_->cols();
}

double SignalSource::max_abs() const {
  if (fixed_) return norm_inf(*fixed_);
  return series_->max_abs();
}

RunTrace run_estimation(const EstimatorConfig& cfg, const SignalSource& signal,
                        const NoiseModel& noise, const SamplingSet& sampling,
                        const BandlimitOperator& band, const RunOptions& opts) {
  cfg.validate();
  noise.validate();
  if (opts.n_iters < 1) throw std::invalid_argument("run_estimation: n_iters >= 1");
  const std::size_t n = band.b.rows();
  if (signal.size() != n || sampling.mask.size() != n)
    throw std::invalid_argument("run_estimation: dimension mismatch");
  if (opts.tracked_node >= static_cast<int>(n))
    throw std::invalid_argument("run_estimation: tracked node out of range");

  RngStream rng(opts.stream_seed);
  Vector x(n, 0.0);
  Vector y(n, 0.0);
  Vector scratch(n), scratch2(n);
  const double divergence_threshold =
      1e12 * std::max(signal.max_abs(), 1e-300);

  RunTrace trace;
  trace.msd.resize(static_cast<std::size_t>(opts.n_iters));
  trace.mad.resize(static_cast<std::size_t>(opts.n_iters));
  trace.max_abs_dev.resize(static_cast<std::size_t>(opts.n_iters));
  if (opts.tracked_node >= 0)
    trace.tracked_estimate.resize(static_cast<std::size_t>(opts.n_iters));
  if (opts.record_estimates)
    trace.estimates.reserve(static_cast<std::size_t>(opts.n_iters));
  if (opts.time_steps)
    trace.step_ns.reserve(static_cast<std::size_t>(opts.n_iters));

  for (long k = 0; k < opts.n_iters; ++k) {
    const double* truth = signal.at(k);
    for (int i : sampling.nodes) {
      const auto u = static_cast<std::size_t>(i);
      y[u] = truth[u] + sample_one(noise, rng);
    }

    if (opts.time_steps) {
      const auto t0 = std::chrono::steady_clock::now();
      apply_update(cfg.kind, x, y, sampling, band, cfg, scratch, scratch2);
      const auto t1 = std::chrono::steady_clock::now();
      trace.step_ns.push_back(
          std::chrono::duration<double, std::nano>(t1 - t0).count());
    } else {
      apply_update(cfg.kind, x, y, sampling, band, cfg, scratch, scratch2);
    }

    const auto ki = static_cast<std::size_t>(k);
    const double nn = static_cast<double>(n);
    trace.msd[ki] = kernels::active().sum_sq_diff(x.data(), truth, n) / nn;
    trace.mad[ki] = kernels::active().sum_abs_diff(x.data(), truth, n) / nn;
    double maxdev = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      maxdev = std::max(maxdev, std::fabs(x[i] - truth[i]));
    trace.max_abs_dev[ki] = maxdev;
    if (opts.tracked_node >= 0)
      trace.tracked_estimate[ki] = x[static_cast<std::size_t>(opts.tracked_node)];
    if (opts.record_estimates) trace.estimates.push_back(x);

    if (!trace.diverged &&
        (!all_finite(x) || norm_inf(x) > divergence_threshold)) {
      trace.diverged = true;
      trace.diverged_at = k;
    }
  }
  return trace;
}

}  // namespace gsign
