#pragma once

#include <cstdint>
#include <string>

#include "gsign/matrix.hpp"

namespace gsign {

enum class NoiseKind { SaS, Cauchy, StudentT, Laplace };

// Zero-location impulsive noise families used throughout the experiments.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Laplace;
  double alpha = 2.0;     // SaS characteristic exponent, (0, 2]
  double gamma = 1.0;     // SaS / Cauchy scale, > 0
  double location = 0.0;  // Cauchy / Laplace location
  double nu = 2.0;        // Student's t degrees of freedom, > 0
  double scale_b = 1.0;   // Laplace scale, > 0

  static NoiseModel sas(double alpha, double gamma);
  static NoiseModel cauchy(double location, double gamma);
  static NoiseModel student_t(double nu);
  static NoiseModel laplace(double location, double b);

  void validate() const;  // throws std::invalid_argument
  std::string describe() const;
};

// Deterministic per-stream generator. Streams derived from the same master
// seed with different run indices are independent, so Monte Carlo runs can be
// distributed over any number of threads without changing the draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();      // (0, 1)
  double exponential();  // rate 1
  double normal();       // standard, Box-Muller with cached spare

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t run_index);

double sample_one(const NoiseModel& model, RngStream& rng);
Vector sample(const NoiseModel& model, std::size_t n, RngStream& rng);

// Monte Carlo estimate of the normalized fractional inverse moment
// (1 - p_s) E|w|^(-p_s) entering the stability analysis; for p_s slightly
// below 1 this equals twice the noise density at the origin, which is what
// the estimator computes (see the implementation note on why the raw moment
// is unreachable from samples). Requires 0 < p_s < 1.
double flom_inverse_moment(const NoiseModel& model, double p_s = 0.99,
                           std::size_t n_mc = 1000000,
                           std::uint64_t seed = 0x1005e5eedull);

}  // namespace gsign
