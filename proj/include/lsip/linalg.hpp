#pragma once

// Dense real kernels used by the solver and the built-in oracles.
//
// Matrices are stored row-major. Every reduction runs in a fixed index order
// so results are bit-reproducible between runs.

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace lsip {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Build from nested rows; all rows must have equal length.
  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector column(std::size_t j) const;

  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// Induced infinity norm (largest absolute row sum).
double norm_inf(const Matrix& a);
bool all_finite(std::span<const double> a);
bool all_finite(const Matrix& a);

Vector matvec(const Matrix& a, std::span<const double> x);
/// Aᵀx without forming the transpose.
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// Inverse of B + u·e_colᵀ given G = B⁻¹ (replacing column `col` of B by
/// that column plus u). Throws SingularUpdate when |1 + e_colᵀGu| falls
/// below 1e-10·(1 + ‖G‖∞‖u‖∞).
Matrix smw_inverse_update(const Matrix& g, std::span<const double> u, std::size_t col);

inline constexpr double kPivotTolerance = 1e-12;

struct CholeskyFactor {
  Matrix lower;        ///< X = L·Lᵀ
  double min_pivot;    ///< smallest Schur pivot (before the square root)
};

/// Certificate that X is not positive definite: unit v with vᵀXv ≤ tol.
struct NotPositiveDefinite {
  Vector direction;
  double curvature;    ///< vᵀXv as evaluated from the failing pivot
  std::size_t row;     ///< index of the failing pivot
};

using CholeskyResult = std::variant<CholeskyFactor, NotPositiveDefinite>;

/// Cholesky factorization that, on failure, returns the direction built from
/// the failing row. A pivot counts as failed when it is at most
/// pivot_tol times the largest initial diagonal entry (or ≤ 0). The input is
/// symmetrized after checking ‖X − Xᵀ‖∞ ≤ 1e-12·‖X‖∞ (NonSymmetric otherwise).
CholeskyResult certifying_cholesky(const Matrix& x, double pivot_tol = kPivotTolerance);

/// LU factorization with partial pivoting.
class LuFactorization {
 public:
  /// Throws Singular when a pivot drops below 1e-13 · max initial |entry|.
  explicit LuFactorization(Matrix a);

  Vector solve(std::span<const double> rhs) const;
  Matrix inverse() const;
  double determinant() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

Vector solve_with_factorization(const Matrix& b, std::span<const double> rhs);

/// Determinant by partial-pivoted elimination; returns 0 for exactly singular
/// input instead of throwing.
double determinant(const Matrix& a);

/// A nonzero vector g with A·g ≈ 0, found by row reduction with partial
/// pivoting; columns whose pivot falls below rel_tol · max |entry| are treated
/// as dependent. Empty when A has full column rank.
std::optional<Vector> null_vector(const Matrix& a, double rel_tol = 1e-11);

}  // namespace lsip
