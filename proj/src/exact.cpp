#include "coniso/exact.hpp"

#include <algorithm>

namespace coniso {

Eigen::MatrixXd to_double(const IntMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

Eigen::MatrixXd to_double(const RatMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

RatMatrix to_rational(const IntMatrix& m) {
  RatMatrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.data().size(); ++k) out.data()[k] = m.data()[k];
  return out;
}

std::size_t max_bits(const IntMatrix& m) {
  std::size_t bits = 0;
  for (const auto& x : m.data())
    if (x != 0) bits = std::max(bits, mpz_sizeinbase(x.get_mpz_t(), 2));
  return bits;
}

std::vector<Integer> vectorize(const IntMatrix& m) { return m.data(); }

namespace {

void make_primitive(std::vector<Integer>& v) {
  Integer g = 0;
  for (const auto& x : v) {
    if (x == 0) continue;
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g == 1) return;
  }
  if (g <= 1) return;
  for (auto& x : v)
    if (x != 0) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
}

}  // namespace

void ExactSpan::reduce(std::vector<Integer>& v) const {
  Integer a, b;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::size_t p = pivots_[r];
    if (v[p] == 0) continue;
    const auto& row = rows_[r];
    a = row[p];
    b = v[p];
    for (std::size_t k = 0; k < length_; ++k) {
      if (row[k] == 0) {
        if (v[k] != 0) v[k] *= a;
      } else {
        v[k] = a * v[k] - b * row[k];
      }
    }
    make_primitive(v);
  }
}

bool ExactSpan::insert(std::vector<Integer> v) {
  if (v.size() != length_) throw std::invalid_argument("ExactSpan: length mismatch");
  reduce(v);
  auto it = std::find_if(v.begin(), v.end(), [](const Integer& x) { return x != 0; });
  if (it == v.end()) return false;
  make_primitive(v);
  pivots_.push_back(static_cast<std::size_t>(it - v.begin()));
  rows_.push_back(std::move(v));
  return true;
}

bool ExactSpan::contains(std::vector<Integer> v) const {
  if (v.size() != length_) throw std::invalid_argument("ExactSpan: length mismatch");
  reduce(v);
  return std::all_of(v.begin(), v.end(), [](const Integer& x) { return x == 0; });
}

}  // namespace coniso
