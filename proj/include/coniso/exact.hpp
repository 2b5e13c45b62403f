#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>
#include <Eigen/Dense>

namespace coniso {

using Integer = mpz_class;
using Rational = mpq_class;

/// Row-major dense matrix over an exact scalar type.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  static DenseMatrix ones(std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (auto& x : m.data_) x = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  T trace() const {
    T s = 0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

  T sum() const {
    T s = 0;
    for (const auto& x : data_) s += x;
    return s;
  }

  bool is_zero() const {
    for (const auto& x : data_)
      if (x != 0) return false;
    return true;
  }

  bool symmetric() const {
    if (!square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  DenseMatrix& operator*=(const T& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  friend DenseMatrix operator*(DenseMatrix a, const T& s) { return a *= s; }
  friend DenseMatrix operator*(const T& s, DenseMatrix a) { return a *= s; }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: shape mismatch");
    DenseMatrix c(a.rows_, b.cols_);
    T tmp;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          const T& bkj = b(k, j);
          if (bkj == 0) continue;
          tmp = aik * bkj;
          c(i, j) += tmp;
        }
      }
    return c;
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same(const DenseMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = DenseMatrix<Integer>;
using RatMatrix = DenseMatrix<Rational>;

/// Entrywise (Schur) product.
template <typename T>
DenseMatrix<T> schur(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("schur product: shape mismatch");
  DenseMatrix<T> c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.data().size(); ++k) c.data()[k] = a.data()[k] * b.data()[k];
  return c;
}

/// Trace inner product tr(a^T b).
template <typename T>
T frobenius_inner(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("inner product: shape mismatch");
  T s = 0;
  for (std::size_t k = 0; k < a.data().size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

Eigen::MatrixXd to_double(const IntMatrix& m);
Eigen::MatrixXd to_double(const RatMatrix& m);
RatMatrix to_rational(const IntMatrix& m);

/// Largest bit length among the entries.
std::size_t max_bits(const IntMatrix& m);

/// Incrementally maintained row-echelon basis of integer vectors.
///
/// Reduction is fraction-free: each stored row is primitive (content 1) and
/// reduction of a candidate uses cross multiplication followed by removal of
/// the common content, so no rationals appear.
class ExactSpan {
 public:
  explicit ExactSpan(std::size_t length) : length_(length) {}

  std::size_t length() const { return length_; }
  std::size_t rank() const { return rows_.size(); }

  /// True when v is independent of the rows so far (it is then stored).
  bool insert(std::vector<Integer> v);

  /// True when v lies in the span; does not modify the basis.
  bool contains(std::vector<Integer> v) const;

 private:
  void reduce(std::vector<Integer>& v) const;

  std::size_t length_;
  std::vector<std::vector<Integer>> rows_;
  std::vector<std::size_t> pivots_;
};

std::vector<Integer> vectorize(const IntMatrix& m);

}  // namespace coniso
