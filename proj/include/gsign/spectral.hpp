#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsign/matrix.hpp"

namespace gsign {

// Orthonormal eigenbasis of a symmetric matrix, eigenvalues ascending.
struct SpectralBasis {
  Matrix u;        // eigenvectors as columns
  Vector lambdas;  // sorted nondecreasing
};

// Cyclic Jacobi rotations; off-diagonal Frobenius tolerance 1e-12 relative,
// capped at 100 sweeps. Throws std::runtime_error on non-convergence.
SpectralBasis eigendecompose(const Matrix& l);

Vector gft(const SpectralBasis& basis, const Vector& x);   // s = U^T x
Vector igft(const SpectralBasis& basis, const Vector& s);  // x = U s

// Low-pass style projector onto the span of selected eigenvectors.
struct BandlimitOperator {
  std::vector<int> freq_set;  // sorted indices into lambdas
  Matrix u_f;                 // n x |F|
  Matrix b;                   // projector U_F U_F^T
};

BandlimitOperator make_bandlimit(const SpectralBasis& basis, std::vector<int> freqs);

// Convenience: the band_size smallest eigenvalue indices.
BandlimitOperator make_lowpass(const SpectralBasis& basis, int band_size);

struct SamplingSet {
  int n_nodes = 0;
  std::vector<int> nodes;        // sorted
  std::vector<std::uint8_t> mask;  // size n_nodes, 1 iff sampled

  static SamplingSet from_nodes(int n_nodes, std::vector<int> nodes);
  bool contains(int i) const { return mask[static_cast<std::size_t>(i)] != 0; }
};

// Greedily grow S to size m: while |S| < |F| maximize the product of nonzero
// singular values of the selected rows of U_F, afterwards maximize the
// smallest singular value. Throws when no admissible set exists.
SamplingSet greedy_sampling(const Matrix& u_f, int m);

// Smallest eigenvalue of U_F^T D_S U_F; positive iff S is admissible.
double sampling_min_eigenvalue(const Matrix& u_f, const SamplingSet& s);

// Sidecar cache keyed by a hash of L, to skip eigendecomposition across
// CLI invocations. load returns false on miss or key mismatch.
std::uint64_t laplacian_hash(const Matrix& l);
void save_basis_cache(const std::string& path, const Matrix& l, const SpectralBasis& basis);
bool load_basis_cache(const std::string& path, const Matrix& l, SpectralBasis& out);

}  // namespace gsign
