#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace optquad {

/// Row-major square matrix, just enough for the (m-1)x(m-1) systems here.
template <class Real>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t n, const Real& zero) : n_(n), data_(n * n, zero) {}

  std::size_t size() const { return n_; }
  Real& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

 private:
  std::size_t n_ = 0;
  std::vector<Real> data_;
};

template <class Real>
struct LUFactors {
  DenseMatrix<Real> lu;
  std::vector<std::size_t> perm;
};

/// LU with partial pivoting. Returns nullopt on an exactly zero pivot.
template <class Real>
std::optional<LUFactors<Real>> lu_factor(DenseMatrix<Real> a) {
  using std::abs;
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    Real best = abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      Real v = abs(a(r, k));
      if (v > best) {
        best = std::move(v);
        p = r;
      }
    }
    if (best == Real(0)) return std::nullopt;
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(p, c));
      std::swap(perm[k], perm[p]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      a(r, k) /= a(k, k);
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= a(r, k) * a(k, c);
    }
  }
  return LUFactors<Real>{std::move(a), std::move(perm)};
}

template <class Real>
std::vector<Real> lu_solve(const LUFactors<Real>& f, const std::vector<Real>& b) {
  const std::size_t n = f.lu.size();
  std::vector<Real> x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) x.push_back(b[f.perm[i]]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

template <class Real>
Real norm_inf(const DenseMatrix<Real>& a) {
  using std::abs;
  Real best = abs(a(0, 0)) * 0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    Real row = best * 0;
    for (std::size_t c = 0; c < a.size(); ++c) row += abs(a(r, c));
    if (row > best) best = row;
  }
  return best;
}

/// ||A||_inf * ||A^-1||_inf with the inverse formed column by column.
/// Affordable because the systems here are at most a few dozen rows.
template <class Real>
Real condition_inf(const DenseMatrix<Real>& a, const LUFactors<Real>& f) {
  const std::size_t n = a.size();
  const Real zero = a(0, 0) * 0;
  DenseMatrix<Real> inv(n, zero);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Real> e(n, zero);
    e[c] = zero + 1;
    auto col = lu_solve(f, e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = std::move(col[r]);
  }
  return norm_inf(a) * norm_inf(inv);
}

}  // namespace optquad
