#include "lsip/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "lsip/error.hpp"

namespace lsip {

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InvalidInstance("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation keeps tiny aggregates from underflowing.
  double scale = norm_inf(a);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) {
    double r = v / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(const Matrix& a) { return all_finite(a.data()); }

Vector matvec(const Matrix& a, std::span<const double> x) {
  assert(a.cols() == x.size());
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  assert(a.rows() == x.size());
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix smw_inverse_update(const Matrix& g, std::span<const double> u, std::size_t col) {
  const std::size_t k = g.rows();
  assert(g.square() && u.size() == k && col < k);

  // (B + u eᵀ)⁻¹ = G − (G u)(eᵀ G) / (1 + eᵀ G u)
  const Vector gu = matvec(g, u);
  const double denom = 1.0 + gu[col];
  if (std::abs(denom) < 1e-10 * (1.0 + norm_inf(g) * norm_inf(u))) {
    throw SingularUpdate("rank-one update denominator " + std::to_string(denom));
  }
  Matrix out = g;
  auto erow = g.row(col);
  for (std::size_t i = 0; i < k; ++i) {
    const double f = gu[i] / denom;
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) out(i, j) -= f * erow[j];
  }
  return out;
}

CholeskyResult certifying_cholesky(const Matrix& x, double pivot_tol) {
  if (!x.square()) throw NonSymmetric("matrix is not square");
  const std::size_t n = x.rows();

  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(x(i, j) - x(j, i));
    asym = std::max(asym, s);
  }
  if (asym > 1e-12 * norm_inf(x)) throw NonSymmetric("matrix is not symmetric");

  Matrix a(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (x(i, j) + x(j, i));
    max_diag = std::max(max_diag, a(i, i));
  }
  const double threshold = pivot_tol * max_diag;

  Matrix l(n, n);
  double min_pivot = n == 0 ? 0.0 : a(0, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = a(k, k);
    for (std::size_t j = 0; j < k; ++j) pivot -= l(k, j) * l(k, j);

    if (!(pivot > threshold)) {
      // Leading block is L₁₁L₁₁ᵀ with the row ℓ = L(k, :k) below it. Taking
      // v = (w, 1) with L₁₁ᵀw = −ℓ cancels the eliminated part, so
      // vᵀXv equals the failing Schur pivot.
      Vector v(n, 0.0);
      v[k] = 1.0;
      for (std::size_t ii = k; ii-- > 0;) {
        double s = -l(k, ii);
        for (std::size_t j = ii + 1; j < k; ++j) s -= l(j, ii) * v[j];
        v[ii] = s / l(ii, ii);
      }
      const double len = norm2(v);
      for (double& vi : v) vi /= len;
      return NotPositiveDefinite{std::move(v), pivot / (len * len), k};
    }

    min_pivot = std::min(min_pivot, pivot);
    const double diag = std::sqrt(pivot);
    l(k, k) = diag;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = a(i, k);
      for (std::size_t j = 0; j < k; ++j) s -= l(i, j) * l(k, j);
      l(i, k) = s / diag;
    }
  }
  return CholeskyFactor{std::move(l), min_pivot};
}

LuFactorization::LuFactorization(Matrix a) : lu_(std::move(a)) {
  if (!lu_.square()) throw Singular("LU of a non-square matrix");
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  double max_entry = 0.0;
  for (double v : lu_.data()) max_entry = std::max(max_entry, std::abs(v));
  const double tiny = 1e-13 * max_entry;
  if (n > 0 && max_entry == 0.0) throw Singular("zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    if (std::abs(lu_(p, k)) < tiny) {
      throw Singular("pivot " + std::to_string(k) + " below tolerance");
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(p, j), lu_(k, j));
      std::swap(perm_[p], perm_[k]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Vector LuFactorization::solve(std::span<const double> rhs) const {
  const std::size_t n = lu_.rows();
  assert(rhs.size() == n);
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Matrix LuFactorization::inverse() const {
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector c = solve(e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = c[i];
    e[j] = 0.0;
  }
  return inv;
}

double LuFactorization::determinant() const {
  double d = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

Vector solve_with_factorization(const Matrix& b, std::span<const double> rhs) {
  if (!b.square() || b.rows() != rhs.size()) throw Singular("dimension mismatch");
  return LuFactorization(b).solve(rhs);
}

double determinant(const Matrix& a) {
  assert(a.square());
  const std::size_t n = a.rows();
  Matrix w = a;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(w(i, k)) > std::abs(w(p, k))) p = i;
    if (w(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(p, j), w(k, j));
      det = -det;
    }
    det *= w(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = w(i, k) / w(k, k);
      for (std::size_t j = k + 1; j < n; ++j) w(i, j) -= f * w(k, j);
    }
  }
  return det;
}

std::optional<Vector> null_vector(const Matrix& a, double rel_tol) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  Matrix r = a;
  double max_entry = 0.0;
  for (double v : r.data()) max_entry = std::max(max_entry, std::abs(v));
  const double tiny = rel_tol * max_entry;

  // Gauss-Jordan to reduced row echelon form.
  std::vector<std::size_t> pivot_col;
  std::size_t free_col = cols;
  std::size_t prow = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t p = prow;
    for (std::size_t i = prow; i < rows; ++i)
      if (std::abs(r(i, c)) > std::abs(r(p, c))) p = i;
    if (prow >= rows || std::abs(r(p, c)) <= tiny) {
      free_col = c;
      break;
    }
    if (p != prow)
      for (std::size_t j = 0; j < cols; ++j) std::swap(r(p, j), r(prow, j));
    const double piv = r(prow, c);
    for (std::size_t j = 0; j < cols; ++j) r(prow, j) /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == prow) continue;
      const double f = r(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) r(i, j) -= f * r(prow, j);
    }
    pivot_col.push_back(c);
    ++prow;
  }
  if (free_col == cols) return std::nullopt;

  Vector g(cols, 0.0);
  g[free_col] = 1.0;
  for (std::size_t k = 0; k < pivot_col.size(); ++k) g[pivot_col[k]] = -r(k, free_col);
  return g;
}

}  // namespace lsip
