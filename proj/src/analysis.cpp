#include "gsign/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsign {

double msd(const Vector& xhat, const Vector& x0) {
  if (xhat.size() != x0.size()) throw std::invalid_argument("msd: dimension mismatch");
  return kernels::active().sum_sq_diff(xhat.data(), x0.data(), xhat.size()) /
         static_cast<double>(xhat.size());
}

double mad(const Vector& xhat, const Vector& x0) {
  if (xhat.size() != x0.size()) throw std::invalid_argument("mad: dimension mismatch");
  return kernels::active().sum_abs_diff(xhat.data(), x0.data(), xhat.size()) /
         static_cast<double>(xhat.size());
}

StabilityContext StabilityContext::make(const Matrix& u_f,
                                        const SamplingSet& sampling, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("stability: r must be positive");
  StabilityContext ctx;
  ctx.r = r;
  const std::size_t nf = u_f.cols();
  ctx.gram = Matrix(nf, nf);
  for (int node : sampling.nodes) {
    const double* row = u_f.row(static_cast<std::size_t>(node));
    for (std::size_t a = 0; a < nf; ++a)
      kernels::active().axpy(ctx.gram.row(a), row[a], row, nf);
  }
  SpectralBasis eig = eigendecompose(ctx.gram);
  ctx.gram_eigs = eig.lambdas;
  return ctx;
}

double step_size_bound(const StabilityContext& ctx) {
  const double lam_max = ctx.gram_eigs.back() * ctx.r;
  const double lam_min = ctx.gram_eigs.front() * ctx.r;
  if (!(lam_min > 1e-12 * lam_max))
    throw std::runtime_error("stability: G singular; sampling set inadmissible");
  return 2.0 / lam_max;
}

double spectral_radius_phi1(const StabilityContext& ctx, double mu) {
  double rho = 0.0;
  for (double lam : ctx.gram_eigs)
    rho = std::max(rho, std::fabs(1.0 - mu * ctx.r * lam));
  return rho;
}

double theoretical_msd(const StabilityContext& ctx, double mu) {
  const double bound = step_size_bound(ctx);
  if (!(mu > 0.0 && mu < bound))
    throw std::invalid_argument("theoretical_msd: step size outside (0, bound)");
  // In the eigenbasis of G the Kronecker system is diagonal:
  // MSD = mu^2 sum_i lambda_i / (1 - (1 - mu r lambda_i)^2).
  double acc = 0.0;
  for (double lam : ctx.gram_eigs) {
    const double phi = 1.0 - mu * ctx.r * lam;
    const double denom = 1.0 - phi * phi;
    if (!(denom > 0.0))
      throw std::runtime_error("theoretical_msd: I - Q singular at this step size");
    acc += lam / denom;
  }
  return mu * mu * acc;
}

ConvergenceReport detect_convergence(const Vector& trace, long window,
                                     bool diverged) {
  const long n = static_cast<long>(trace.size());
  if (window < 1 || window >= n)
    throw std::invalid_argument("detect_convergence: need 0 < window < n_iters");

  ConvergenceReport report;
  const long start = n - window;
  double mean = 0.0;
  for (long k = start; k < n; ++k) mean += trace[static_cast<std::size_t>(k)];
  mean /= static_cast<double>(window);
  report.steady_value = mean;

  if (diverged || !std::isfinite(mean)) return report;

  // least-squares slope over the final window
  const double tc = 0.5 * static_cast<double>(window - 1);
  double num = 0.0, den = 0.0;
  for (long k = 0; k < window; ++k) {
    const double dt = static_cast<double>(k) - tc;
    num += dt * (trace[static_cast<std::size_t>(start + k)] - mean);
    den += dt * dt;
  }
  const double slope = den > 0.0 ? num / den : 0.0;
  double ss_resid = 0.0;
  for (long k = 0; k < window; ++k) {
    const double dt = static_cast<double>(k) - tc;
    const double r = trace[static_cast<std::size_t>(start + k)] - mean - slope * dt;
    ss_resid += r * r;
  }
  const double sigma =
      window > 2 ? std::sqrt(ss_resid / static_cast<double>(window - 2)) : 0.0;
  // Residuals of stochastic traces are strongly autocorrelated, which makes
  // the iid slope standard error far too optimistic. Inflate it by the usual
  // effective-sample-size factor sqrt((1 + rho) / (1 - rho)) from the lag-1
  // autocorrelation rho.
  double rho = 0.0;
  if (ss_resid > 0.0) {
    double cross = 0.0;
    double prev_r = trace[static_cast<std::size_t>(start)] - mean + slope * tc;
    for (long k = 1; k < window; ++k) {
      const double dt = static_cast<double>(k) - tc;
      const double r = trace[static_cast<std::size_t>(start + k)] - mean - slope * dt;
      cross += r * prev_r;
      prev_r = r;
    }
    rho = std::clamp(cross / ss_resid, 0.0, 0.99);
  }
  const double inflate = std::sqrt((1.0 + rho) / (1.0 - rho));
  // flat when the fitted drop over one window is within 2% of the level, or
  // indistinguishable from the trace's own noise (5 standard errors; the
  // heavy-tailed residuals make even the inflated Gaussian bound optimistic)
  const double drop = std::fabs(slope) * static_cast<double>(window);
  const double noise_floor =
      5.0 * sigma * inflate * std::sqrt(12.0 / static_cast<double>(window));
  const bool flat = drop <= std::max(0.02 * std::max(mean, 1e-300), noise_floor);
  if (!flat) return report;

  report.converged = true;
  const double level = 1.5 * mean;
  long first = 0;
  for (long k = n - 1; k >= 0; --k) {
    if (trace[static_cast<std::size_t>(k)] > level) {
      first = k + 1;
      break;
    }
  }
  report.iterations_to_converge = first;
  return report;
}

}  // namespace gsign
