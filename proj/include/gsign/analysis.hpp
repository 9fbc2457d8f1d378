#pragma once

#include "gsign/matrix.hpp"
#include "gsign/spectral.hpp"

namespace gsign {

// (1/N) ||xhat - x0||_2^2
double msd(const Vector& xhat, const Vector& x0);
// (1/N) sum |xhat_i - x0_i|
double mad(const Vector& xhat, const Vector& x0);

// Steady-state stability analysis of the sign update. The noise enters only
// through the scalar r = E|w|^(-p_s), so R = r I and the error propagation
// matrix Phi_1 = I - mu r G shares the eigenbasis of G = U_F^T D_S U_F.
struct StabilityContext {
  Matrix gram;        // G, |F| x |F|, symmetric PSD
  Vector gram_eigs;   // ascending
  double r = 1.0;

  static StabilityContext make(const Matrix& u_f, const SamplingSet& sampling,
                               double r);
};

// Admissible step sizes are (0, 2 / lambda_max(r G)).
// Throws when G is numerically singular (inadmissible sampling set).
double step_size_bound(const StabilityContext& ctx);

// max_i |1 - mu r lambda_i|; stability requires this below 1.
double spectral_radius_phi1(const StabilityContext& ctx, double mu);

// Closed-form steady-state MSD of the sign update at step size mu.
// Throws when mu is at or over the stability bound.
double theoretical_msd(const StabilityContext& ctx, double mu);

struct ConvergenceReport {
  bool converged = false;
  double steady_value = 0.0;
  long iterations_to_converge = -1;
};

// steady_value is the mean of the final window; converged when the final
// window's linear trend is flat (the fitted drop over one window is within 2%
// of the level or within the trace's own noise) and the run did not diverge.
// iterations_to_converge is the first index from which the trace stays within
// 1.5x the steady value.
ConvergenceReport detect_convergence(const Vector& trace, long window,
                                     bool diverged = false);

}  // namespace gsign
