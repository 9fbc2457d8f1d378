#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsign/analysis.hpp"
#include "gsign/graph.hpp"
#include "gsign/noise.hpp"

using namespace gsign;

namespace {

struct Fixture {
  Graph graph;
  SpectralBasis basis;
  BandlimitOperator band;
  SamplingSet sampling;

  Fixture(int n = 20, int nf = 7, int ns = 12, std::uint64_t seed = 13) {
    graph = random_sensor_graph(n, seed);
    basis = eigendecompose(build_laplacian(graph));
    band = make_lowpass(basis, nf);
    sampling = greedy_sampling(band.u_f, ns);
  }
};

}  // namespace

TEST_CASE("msd and mad on hand values") {
  const Vector a = {1.0, 2.0, 3.0, 4.0};
  const Vector b = {1.0, 0.0, 3.0, 1.0};
  CHECK(msd(a, b) == doctest::Approx((4.0 + 9.0) / 4.0));
  CHECK(mad(a, b) == doctest::Approx((2.0 + 3.0) / 4.0));
  CHECK_THROWS(msd(a, Vector{1.0}));
  CHECK_THROWS(mad(a, Vector{1.0}));
}

TEST_CASE("stability context gram matches the dense construction") {
  const Fixture f;
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, f.sampling, 2.0);
  const std::size_t nf = f.band.u_f.cols();
  REQUIRE(ctx.gram.rows() == nf);

  Matrix ds(f.band.u_f.rows(), f.band.u_f.rows());
  for (int i : f.sampling.nodes) ds(i, i) = 1.0;
  const Matrix expect = f.band.u_f.transposed() * ds * f.band.u_f;
  CHECK((ctx.gram - expect).max_abs() < 1e-12);
  CHECK(std::is_sorted(ctx.gram_eigs.begin(), ctx.gram_eigs.end()));
  CHECK(ctx.gram_eigs.front() > 0.0);  // greedy set is admissible
  CHECK(ctx.gram_eigs.back() <= 1.0 + 1e-12);  // G <= I for a projector slice
}

TEST_CASE("step size bound and spectral radius") {
  const Fixture f;
  const double r = 1.7;
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, f.sampling, r);
  const double bound = step_size_bound(ctx);
  CHECK(bound == doctest::Approx(2.0 / (r * ctx.gram_eigs.back())));

  CHECK(spectral_radius_phi1(ctx, 0.9 * bound) < 1.0);
  CHECK(spectral_radius_phi1(ctx, 1.1 * bound) >= 1.0);
  CHECK(spectral_radius_phi1(ctx, bound) >= 1.0);
  // tiny step: radius just under 1
  CHECK(spectral_radius_phi1(ctx, 1e-9) < 1.0);
}

TEST_CASE("singular sampling set is rejected") {
  const Fixture f;
  // fewer sampled nodes than frequencies cannot be admissible
  const SamplingSet thin = SamplingSet::from_nodes(f.graph.n_nodes, {0, 1});
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, thin, 1.0);
  CHECK_THROWS(step_size_bound(ctx));
  CHECK_THROWS(theoretical_msd(ctx, 0.01));
}

TEST_CASE("theoretical msd: scalar frequency closed form") {
  // |F| = 1: G is the scalar g = sum_{i in S} u_i^2 and
  // msd = mu^2 g / (1 - (1 - mu r g)^2), verifiable by hand.
  const Fixture f(12, 1, 5, 3);
  const double r = 2.5;
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, f.sampling, r);
  double g = 0.0;
  for (int i : f.sampling.nodes) {
    const double u = f.band.u_f(static_cast<std::size_t>(i), 0);
    g += u * u;
  }
  const double mu = 0.3 * step_size_bound(ctx);
  const double phi = 1.0 - mu * r * g;
  const double expect = mu * mu * g / (1.0 - phi * phi);
  CHECK(theoretical_msd(ctx, mu) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("theoretical msd matches the covariance fixed point") {
  // Independent oracle: iterate S <- Phi1 S Phi1^T + mu^2 G in the frequency
  // domain until stationary; the msd is tr(S).
  const Fixture f;
  const double r = 1.3;
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, f.sampling, r);
  const double bound = step_size_bound(ctx);

  for (double frac : {0.1, 0.5, 0.9}) {
    const double mu = frac * bound;
    const std::size_t nf = ctx.gram.rows();
    Matrix phi1 = Matrix::identity(nf);
    phi1 -= (mu * r) * ctx.gram;
    Matrix cov(nf, nf);
    Matrix drive = (mu * mu) * ctx.gram;
    double prev_trace = -1.0;
    for (int it = 0; it < 1000000; ++it) {
      cov = phi1 * cov * phi1.transposed() + drive;
      if (it % 16 == 15) {
        double tr = 0.0;
        for (std::size_t i = 0; i < nf; ++i) tr += cov(i, i);
        if (std::fabs(tr - prev_trace) <= 1e-13 * std::max(tr, 1.0)) break;
        prev_trace = tr;
      }
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < nf; ++i) tr += cov(i, i);
    CHECK(theoretical_msd(ctx, mu) == doctest::Approx(tr).epsilon(1e-6));
  }
}

TEST_CASE("theoretical msd grows with the step size") {
  const Fixture f;
  const StabilityContext ctx = StabilityContext::make(f.band.u_f, f.sampling, 1.0);
  const double bound = step_size_bound(ctx);
  double prev = 0.0;
  for (double frac : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double v = theoretical_msd(ctx, frac * bound);
    CHECK(v > prev);
    prev = v;
  }
  // rejects inadmissible steps
  CHECK_THROWS(theoretical_msd(ctx, bound));
  CHECK_THROWS(theoretical_msd(ctx, -0.1));
}

TEST_CASE("detect_convergence on synthetic traces") {
  // exponential decay onto a plateau
  Vector trace(1000);
  for (std::size_t k = 0; k < trace.size(); ++k)
    trace[k] = 0.5 + 10.0 * std::exp(-static_cast<double>(k) / 40.0);
  const ConvergenceReport rep = detect_convergence(trace, 100);
  CHECK(rep.converged);
  CHECK(rep.steady_value == doctest::Approx(0.5).epsilon(0.01));
  // the 1.5x steady crossing of the model is at k = 40 ln(10 / 0.25) ~ 148
  CHECK(rep.iterations_to_converge > 100);
  CHECK(rep.iterations_to_converge < 200);

  // still sloping: not converged
  Vector slope(1000);
  for (std::size_t k = 0; k < slope.size(); ++k)
    slope[k] = 10.0 - 0.005 * static_cast<double>(k);
  CHECK_FALSE(detect_convergence(slope, 100).converged);

  // diverged run is never converged, whatever the trace says
  CHECK_FALSE(detect_convergence(trace, 100, true).converged);

  // flat from the start: converged immediately
  Vector flat(100, 2.0);
  const ConvergenceReport frep = detect_convergence(flat, 10);
  CHECK(frep.converged);
  CHECK(frep.iterations_to_converge == 0);

  CHECK_THROWS(detect_convergence(flat, 0));
  CHECK_THROWS(detect_convergence(flat, 100));
}
