#include "gsign/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace gsign {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffTolerance = 1e-12;  // relative to ||A||_F

double off_diagonal_norm(const Matrix& a) {
  const std::size_t n = a.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

// One Jacobi rotation zeroing a(p,q); updates a (symmetric) and v columns.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::fabs(theta) > 1e150) {
    t = 1.0 / (2.0 * theta);  // avoid theta^2 overflow
  } else {
    t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);
  const std::size_t n = a.rows();

  const double app = a(p, p);
  const double aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double aip = a(i, p);
    const double aiq = a(i, q);
    a(i, p) = aip - s * (aiq + tau * aip);
    a(p, i) = a(i, p);
    a(i, q) = aiq + s * (aip - tau * aiq);
    a(q, i) = a(i, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = vip - s * (viq + tau * vip);
    v(i, q) = viq + s * (vip - tau * viq);
  }
}

// Eigen-decomposition of a symmetric matrix; returns (V, d) unsorted.
void jacobi_eigen(const Matrix& input, Matrix& v, Vector& d) {
  if (input.rows() != input.cols())
    throw std::invalid_argument("eigendecompose: matrix not square");
  const std::size_t n = input.rows();
  Matrix a = input;
  v = Matrix::identity(n);
  const double scale = std::max(a.frobenius_norm(), 1e-300);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kOffTolerance * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
  }
  if (!converged && off_diagonal_norm(a) > kOffTolerance * scale)
    throw std::runtime_error("eigendecompose: Jacobi did not converge in 100 sweeps");

  d.resize(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
}

}  // namespace

SpectralBasis eigendecompose(const Matrix& l) {
  Matrix v;
  Vector d;
  jacobi_eigen(l, v, d);

  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  SpectralBasis basis;
  basis.u = Matrix(n, n);
  basis.lambdas.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    basis.lambdas[j] = d[order[j]];
    for (std::size_t i = 0; i < n; ++i) basis.u(i, j) = v(i, order[j]);
  }
  return basis;
}

Vector gft(const SpectralBasis& basis, const Vector& x) {
  const std::size_t n = basis.u.rows();
  if (x.size() != n) throw std::invalid_argument("gft: dimension mismatch");
  Vector s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::active().axpy(s.data(), x[i], basis.u.row(i), n);
  return s;
}

Vector igft(const SpectralBasis& basis, const Vector& s) {
  if (s.size() != basis.u.rows()) throw std::invalid_argument("igft: dimension mismatch");
  return basis.u * s;
}

BandlimitOperator make_bandlimit(const SpectralBasis& basis, std::vector<int> freqs) {
  const std::size_t n = basis.u.rows();
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  if (freqs.empty()) throw std::invalid_argument("make_bandlimit: empty frequency set");
  for (int f : freqs)
    if (f < 0 || static_cast<std::size_t>(f) >= n)
      throw std::invalid_argument("make_bandlimit: frequency index out of range");

  BandlimitOperator op;
  op.freq_set = std::move(freqs);
  const std::size_t nf = op.freq_set.size();
  op.u_f = Matrix(n, nf);
  for (std::size_t j = 0; j < nf; ++j)
    for (std::size_t i = 0; i < n; ++i)
      op.u_f(i, j) = basis.u(i, static_cast<std::size_t>(op.freq_set[j]));

  op.b = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernels::active().dot(op.u_f.row(i), op.u_f.row(j), nf);
      op.b(i, j) = v;
      op.b(j, i) = v;
    }
  return op;
}

BandlimitOperator make_lowpass(const SpectralBasis& basis, int band_size) {
  if (band_size < 0 || static_cast<std::size_t>(band_size) > basis.lambdas.size())
    throw std::invalid_argument("make_lowpass: bad band size");
  std::vector<int> freqs(band_size);
  std::iota(freqs.begin(), freqs.end(), 0);
  return make_bandlimit(basis, std::move(freqs));
}

SamplingSet SamplingSet::from_nodes(int n_nodes, std::vector<int> nodes) {
  SamplingSet s;
  s.n_nodes = n_nodes;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (int v : nodes)
    if (v < 0 || v >= n_nodes) throw std::invalid_argument("sampling set: node out of range");
  s.nodes = std::move(nodes);
  s.mask.assign(static_cast<std::size_t>(n_nodes), 0);
  for (int v : s.nodes) s.mask[static_cast<std::size_t>(v)] = 1;
  return s;
}

namespace {

Matrix sampled_gram(const Matrix& u_f, const SamplingSet& s) {
  const std::size_t nf = u_f.cols();
  Matrix m(nf, nf);
  for (int node : s.nodes) {
    const double* row = u_f.row(static_cast<std::size_t>(node));
    for (std::size_t a = 0; a < nf; ++a)
      kernels::active().axpy(m.row(a), row[a], row, nf);
  }
  return m;
}

// Smallest eigenvalue of M + u u^T given the eigenpairs (d ascending, Q) of M,
// via the rank-one secular equation. Eigenvalues interlace: the answer lies in
// [d_0, d_1].
double min_eig_rank1_update(const Vector& d, const Matrix& q, const double* u,
                            std::size_t nf) {
  if (nf == 1) return d[0] + u[0] * u[0];
  Vector v(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < nf; ++i) acc += q(i, j) * u[i];
    v[j] = acc;
  }
  double lo = d[0];
  double hi = d[1];
  if (hi - lo <= 0.0) return lo;
  auto secular = [&](double lambda) {
    double acc = 1.0;
    for (std::size_t j = 0; j < nf; ++j) acc += v[j] * v[j] / (d[j] - lambda);
    return acc;
  };
  // secular is increasing on (lo, hi); root exists iff it goes negative near lo
  const double eps = (hi - lo) * 1e-14;
  if (secular(lo + eps) >= 0.0) return lo;
  if (secular(hi - eps) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (secular(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double sampling_min_eigenvalue(const Matrix& u_f, const SamplingSet& s) {
  Matrix m = sampled_gram(u_f, s);
  Matrix v;
  Vector d;
  jacobi_eigen(m, v, d);
  return *std::min_element(d.begin(), d.end());
}

SamplingSet greedy_sampling(const Matrix& u_f, int m) {
  const int n = static_cast<int>(u_f.rows());
  const int nf = static_cast<int>(u_f.cols());
  if (nf < 1) throw std::invalid_argument("greedy_sampling: empty frequency set");
  if (m < nf || m > n)
    throw std::invalid_argument("greedy_sampling: need |F| <= m <= n");

  std::vector<int> selected;
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);

  // Growth phase (|S| < |F|): maximize the product of nonzero singular values.
  // Tracked through an incremental Cholesky of W W^T; each candidate's score is
  // the squared distance of its row from the span of the selected rows.
  Matrix chol(static_cast<std::size_t>(nf), static_cast<std::size_t>(nf));
  while (static_cast<int>(selected.size()) < nf) {
    const std::size_t s = selected.size();
    int best = -1;
    double best_score = 0.0;
    Vector best_z(s);
    Vector z(s);
    for (int i = 0; i < n; ++i) {
      if (in_set[static_cast<std::size_t>(i)]) continue;
      const double* u = u_f.row(static_cast<std::size_t>(i));
      // forward substitution: chol * z = W u
      for (std::size_t r = 0; r < s; ++r) {
        double b = kernels::active().dot(
            u_f.row(static_cast<std::size_t>(selected[r])), u,
            static_cast<std::size_t>(nf));
        for (std::size_t c = 0; c < r; ++c) b -= chol(r, c) * z[c];
        z[r] = b / chol(r, r);
      }
      double score = kernels::active().dot(u, u, static_cast<std::size_t>(nf));
      for (std::size_t r = 0; r < s; ++r) score -= z[r] * z[r];
      if (score > best_score) {
        best_score = score;
        best = i;
        best_z = z;
      }
    }
    if (best < 0 || best_score <= 1e-12)
      throw std::runtime_error(
          "greedy_sampling: rows of U_F are rank deficient; signal not "
          "recoverable from any sampling set of this size");
    for (std::size_t c = 0; c < s; ++c) chol(s, c) = best_z[c];
    chol(s, s) = std::sqrt(best_score);
    selected.push_back(best);
    in_set[static_cast<std::size_t>(best)] = 1;
  }

  // Expansion phase: maximize the smallest singular value.
  Matrix gram = sampled_gram(u_f, SamplingSet::from_nodes(n, selected));
  while (static_cast<int>(selected.size()) < m) {
    Matrix q;
    Vector d;
    jacobi_eigen(gram, q, d);
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    Vector ds(d.size());
    Matrix qs(q.rows(), q.cols());
    for (std::size_t j = 0; j < d.size(); ++j) {
      ds[j] = d[order[j]];
      for (std::size_t i = 0; i < q.rows(); ++i) qs(i, j) = q(i, order[j]);
    }

    int best = -1;
    double best_min = -1.0;
    for (int i = 0; i < n; ++i) {
      if (in_set[static_cast<std::size_t>(i)]) continue;
      const double lam = min_eig_rank1_update(
          ds, qs, u_f.row(static_cast<std::size_t>(i)),
          static_cast<std::size_t>(nf));
      if (lam > best_min) {
        best_min = lam;
        best = i;
      }
    }
    const double* u = u_f.row(static_cast<std::size_t>(best));
    for (std::size_t a = 0; a < static_cast<std::size_t>(nf); ++a)
      kernels::active().axpy(gram.row(a), u[a], u, static_cast<std::size_t>(nf));
    selected.push_back(best);
    in_set[static_cast<std::size_t>(best)] = 1;
  }

  return SamplingSet::from_nodes(n, std::move(selected));
}

std::uint64_t laplacian_hash(const Matrix& l) {
  // FNV-1a over the dimensions and raw matrix bytes
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t rows = l.rows(), cols = l.cols();
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(l.data(), rows * cols * sizeof(double));
  return h;
}

void save_basis_cache(const std::string& path, const Matrix& l, const SpectralBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write basis cache: " + path);
  const char magic[4] = {'G', 'S', 'B', '1'};
  out.write(magic, 4);
  const std::uint64_t h = laplacian_hash(l);
  const std::uint64_t n = basis.u.rows();
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(basis.lambdas.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(basis.u.data()),
            static_cast<std::streamsize>(n * n * sizeof(double)));
}

bool load_basis_cache(const std::string& path, const Matrix& l, SpectralBasis& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GSB1", 4) != 0) return false;
  std::uint64_t h = 0, n = 0;
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || h != laplacian_hash(l) || n != l.rows()) return false;
  SpectralBasis basis;
  basis.lambdas.resize(n);
  basis.u = Matrix(n, n);
  in.read(reinterpret_cast<char*>(basis.lambdas.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(basis.u.data()),
          static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) return false;
  out = std::move(basis);
  return true;
}

}  // namespace gsign
