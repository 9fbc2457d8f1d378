#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gsign/kernels.hpp"

namespace gsign {

using Vector = std::vector<double>;

// Dense row-major matrix. Everything in this project is small enough
// (N up to a few hundred) that dense storage is the right call.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Vector operator*(const Vector& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(rows_);
    kernels::active().matvec(data_.data(), x.data(), y.data(), rows_, cols_);
    return y;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix r(rows_, o.cols_);
    // Accumulate over rows of o; keeps the inner loop contiguous.
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* arow = row(i);
      double* rrow = r.row(i);
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = arow[k];
        if (a == 0.0) continue;
        kernels::active().axpy(rrow, a, o.row(k), o.cols_);
      }
    }
    return r;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  double frobenius_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return std::sqrt(acc);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  bool operator==(const Matrix& o) const = default;

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double norm2(const Vector& v) {
  return std::sqrt(kernels::active().dot(v.data(), v.data(), v.size()));
}

inline double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace gsign
