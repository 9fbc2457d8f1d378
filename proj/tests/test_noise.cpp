#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gsign/noise.hpp"

using namespace gsign;

namespace {

constexpr std::size_t kDraws = 1000000;

std::vector<double> draw(const NoiseModel& m, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = sample_one(m, rng);
  return v;
}

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

double quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

// Adaptive Simpson on [a, b].
template <typename F>
double adaptive_simpson(F f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double tol = 1e-12) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

}  // namespace

TEST_CASE("rng stream basics") {
  RngStream rng(12345);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  // normal(): standard moments
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::fabs(m1) < 0.01);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  // exponential(): mean 1
  double me = 0.0;
  for (int i = 0; i < n; ++i) me += rng.exponential();
  CHECK(me / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("streams are deterministic and run-separated") {
  RngStream a(derive_stream_seed(99, 0));
  RngStream b(derive_stream_seed(99, 0));
  RngStream c(derive_stream_seed(99, 1));
  bool all_equal_ab = true, all_equal_ac = true;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    all_equal_ab &= (va == b.next_u64());
    all_equal_ac &= (va == c.next_u64());
  }
  CHECK(all_equal_ab);
  CHECK_FALSE(all_equal_ac);

  std::vector<std::uint64_t> seeds;
  for (std::uint64_t run = 0; run < 100; ++run)
    seeds.push_back(derive_stream_seed(1, run));
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("sas alpha=2 is gaussian with variance 2 gamma") {
  const auto v = draw(NoiseModel::sas(2.0, 0.1), kDraws, 7);
  CHECK(sample_variance(v) == doctest::Approx(0.2).epsilon(0.02));
  // quick normality proxy: P(|X| < sigma) for the fitted sigma
  const double sigma = std::sqrt(0.2);
  std::size_t inside = 0;
  for (double x : v)
    if (std::fabs(x) < sigma) ++inside;
  CHECK(static_cast<double>(inside) / static_cast<double>(kDraws) ==
        doctest::Approx(0.682689).epsilon(0.01));
}

TEST_CASE("cauchy interquartile range is 2 gamma") {
  auto v = draw(NoiseModel::cauchy(0.0, 0.1), kDraws, 8);
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  CHECK(iqr == doctest::Approx(0.2).epsilon(0.02));
  CHECK(quantile(v, 0.5) == doctest::Approx(0.0).epsilon(0.002));
  // location shifts quantiles
  auto w = draw(NoiseModel::cauchy(3.0, 0.1), kDraws, 8);
  CHECK(quantile(w, 0.5) == doctest::Approx(3.0).epsilon(0.001));
}

TEST_CASE("sas alpha=1 matches cauchy closed-form quantiles") {
  auto v = draw(NoiseModel::sas(1.0, 0.1), kDraws, 9);
  for (double q : {0.25, 0.75, 0.9, 0.95}) {
    const double exact =
        0.1 * std::tan(std::numbers::pi * (q - 0.5));  // gamma tan(pi(q - 1/2))
    CHECK(quantile(v, q) == doctest::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("laplace variance is 2 b^2") {
  const double b = std::sqrt(2.0);
  const auto v = draw(NoiseModel::laplace(0.0, b), kDraws, 10);
  CHECK(sample_variance(v) == doctest::Approx(2.0 * b * b).epsilon(0.02));
  // P(|X| < b ln 2) = 1/2
  auto vv = v;
  CHECK(quantile(vv, 0.75) == doctest::Approx(b * std::log(2.0)).epsilon(0.02));
}

TEST_CASE("student t moments and cauchy limit") {
  // nu = 5: variance nu / (nu - 2)
  const auto v = draw(NoiseModel::student_t(5.0), kDraws, 11);
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0).epsilon(0.03));
  // nu = 1 is standard Cauchy: IQR 2
  auto w = draw(NoiseModel::student_t(1.0), kDraws, 12);
  CHECK(quantile(w, 0.75) - quantile(w, 0.25) == doctest::Approx(2.0).epsilon(0.02));
  // nu = 2: the experiment workhorse; check the closed-form CDF
  // F(x) = 1/2 + x / (2 sqrt(2 + x^2)); F(1) ~ 0.788675
  auto t2 = draw(NoiseModel::student_t(2.0), kDraws, 13);
  std::size_t below = 0;
  for (double x : t2)
    if (x < 1.0) ++below;
  CHECK(static_cast<double>(below) / static_cast<double>(kDraws) ==
        doctest::Approx(0.5 + 1.0 / (2.0 * std::sqrt(3.0))).epsilon(0.005));
}

TEST_CASE("all four models are symmetric about their location") {
  const NoiseModel models[] = {
      NoiseModel::sas(1.06, 0.1), NoiseModel::cauchy(0.0, 0.1),
      NoiseModel::student_t(2.0), NoiseModel::laplace(0.0, std::sqrt(2.0))};
  for (const auto& m : models) {
    const auto v = draw(m, kDraws, 21);
    long balance = 0;
    for (double x : v) balance += (x > 0.0) ? 1 : -1;
    CHECK(std::fabs(static_cast<double>(balance)) <
          4.0 * std::sqrt(static_cast<double>(kDraws)));
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS(NoiseModel::sas(0.0, 0.1));
  CHECK_THROWS(NoiseModel::sas(2.1, 0.1));
  CHECK_THROWS(NoiseModel::sas(1.0, 0.0));
  CHECK_THROWS(NoiseModel::cauchy(0.0, -1.0));
  CHECK_THROWS(NoiseModel::student_t(0.0));
  CHECK_THROWS(NoiseModel::laplace(0.0, 0.0));
  CHECK_NOTHROW(NoiseModel::sas(2.0, 1.0));
}

TEST_CASE("stability constant: closed-form density oracles") {
  // flom_inverse_moment estimates (1 - p_s) E|w|^(-p_s) -> 2 f(0)
  struct Case {
    NoiseModel m;
    double exact;
  };
  const double pi = std::numbers::pi;
  const Case cases[] = {
      {NoiseModel::laplace(0.0, std::sqrt(2.0)), 1.0 / std::sqrt(2.0)},
      {NoiseModel::cauchy(0.0, 0.1), 2.0 / (pi * 0.1)},
      {NoiseModel::student_t(2.0),
       2.0 * std::tgamma(1.5) / (std::sqrt(2.0 * pi) * std::tgamma(1.0))},
      {NoiseModel::sas(2.0, 0.1), 1.0 / std::sqrt(pi * 0.1)},
      // stable density at 0: Gamma(1 + 1/alpha) / (pi gamma^(1/alpha))
      {NoiseModel::sas(1.06, 0.1),
       2.0 * std::tgamma(1.0 + 1.0 / 1.06) / (pi * std::pow(0.1, 1.0 / 1.06))},
  };
  for (const auto& c : cases) {
    const double got = flom_inverse_moment(c.m, 0.99, kDraws, 31);
    CHECK(got == doctest::Approx(c.exact).epsilon(0.025));
  }
}

TEST_CASE("stability constant: quadrature oracle for laplace") {
  // Independent check of the normalized moment (1 - p) int |t|^(-p) f(t) dt.
  // The |t|^(-p) singularity is removed by t = u^(1/(1-p)) on [0, 1]; the
  // tail is integrated directly.
  const double p = 0.99;
  const double b = std::sqrt(2.0);
  auto f = [&](double t) { return std::exp(-t / b) / (2.0 * b); };
  const double pow_exp = 1.0 / (1.0 - p);  // 100
  auto near = [&](double u) {
    // d/du of t = u^100 gives 100 u^99; t^(-p) = u^(-99)
    return pow_exp * f(std::pow(u, pow_exp));
  };
  const double head = 2.0 * integrate(near, 0.0, 1.0);
  auto tail_f = [&](double t) { return std::pow(t, -p) * f(t); };
  const double tail = 2.0 * integrate(tail_f, 1.0, 60.0 * b);
  const double moment = head + tail;
  // sanity: the closed form is b^(-p) Gamma(1 - p)
  CHECK(moment == doctest::Approx(std::pow(b, -p) * std::tgamma(1.0 - p)).epsilon(1e-8));

  const double got = flom_inverse_moment(NoiseModel::laplace(0.0, b), p, kDraws, 77);
  CHECK(got == doctest::Approx((1.0 - p) * moment).epsilon(0.02));
}

TEST_CASE("stability constant decreases with the noise scale") {
  double prev = 1e300;
  for (double b : {0.5, 1.0, 2.0, 4.0}) {
    const double r = flom_inverse_moment(NoiseModel::laplace(0.0, b), 0.99, 200000, 5);
    CHECK(r < prev);
    prev = r;
  }
  prev = 1e300;
  for (double g : {0.05, 0.1, 0.2, 0.4}) {
    const double r = flom_inverse_moment(NoiseModel::cauchy(0.0, g), 0.99, 200000, 5);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("flom argument validation") {
  const NoiseModel m = NoiseModel::laplace(0.0, 1.0);
  CHECK_THROWS(flom_inverse_moment(m, 0.0, 10000, 1));
  CHECK_THROWS(flom_inverse_moment(m, 1.0, 10000, 1));
  CHECK_THROWS(flom_inverse_moment(m, 0.99, 10, 1));
}

TEST_CASE("sample() draws the requested count deterministically") {
  const NoiseModel m = NoiseModel::sas(1.06, 0.1);
  RngStream r1(42), r2(42);
  const Vector a = sample(m, 512, r1);
  const Vector b = sample(m, 512, r2);
  REQUIRE(a.size() == 512);
  CHECK(a == b);
  CHECK_THROWS(sample(m, 0, r1));
}
