#pragma once

// Separation oracles for homogeneous linear semi-infinite systems
//
//     find y ∈ ℝᵐ with a_tᵀy > 0 for every index t ∈ T.
//
// An oracle, given y, either declares y strictly feasible or returns an index
// (witness) t together with its column a_t such that a_tᵀy ≤ 0. Built-in
// oracles cover finitely many columns (LP), linear matrix inequalities
// Σ y_i A_i ≻ 0 (SDP) and products of second-order cones Aᵀy ∈ int 𝒦 (SOCP).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lsip/linalg.hpp"

namespace lsip {

// ---- witnesses ------------------------------------------------------------

/// Column i of a finite system (0-based).
struct LpIndex {
  std::size_t index = 0;
  friend bool operator==(const LpIndex&, const LpIndex&) = default;
};

/// Unit vector v; the LSIP column is (vᵀA_i v)_i.
struct SdpVector {
  Vector v;
  friend bool operator==(const SdpVector&, const SdpVector&) = default;
};

/// Full-length v ∈ ℝⁿ. Every block is either zero or has leading entry 1 and
/// tail norm ≤ 1; the column is A·v.
struct SocpVector {
  Vector v;
  friend bool operator==(const SocpVector&, const SocpVector&) = default;
};

/// Index supplied by a user oracle: a real-valued label plus the column.
struct CustomWitness {
  Vector label;
  Vector column;
  friend bool operator==(const CustomWitness& a, const CustomWitness& b) {
    return a.label == b.label;
  }
};

using Witness = std::variant<LpIndex, SdpVector, SocpVector, CustomWitness>;

struct WitnessedColumn {
  Witness witness;
  Vector column;
};

/// Separation on a violated index, or std::nullopt when y is strictly feasible.
using QueryResult = std::optional<WitnessedColumn>;

inline bool is_interior(const QueryResult& r) { return !r.has_value(); }

// ---- instances ------------------------------------------------------------

/// Finitely many nonzero columns a_0..a_{n-1} ∈ ℝᵐ.
class FiniteLp {
 public:
  explicit FiniteLp(std::vector<Vector> columns);

  std::size_t dim() const { return m_; }
  std::size_t size() const { return columns_.size(); }
  const std::vector<Vector>& columns() const { return columns_; }

 private:
  std::size_t m_ = 0;
  std::vector<Vector> columns_;
};

/// Linear matrix inequality Σ y_i A_i ≻ 0 with symmetric n×n matrices.
class SdpBundle {
 public:
  /// Matrices must be symmetric to 1e-12 relative; they are stored symmetrized.
  explicit SdpBundle(std::vector<Matrix> matrices);

  std::size_t dim() const { return matrices_.size(); }
  std::size_t order() const { return n_; }
  const std::vector<Matrix>& matrices() const { return matrices_; }

  Matrix combine(std::span<const double> y) const;
  /// (vᵀA_i v)_i
  Vector column_for(std::span<const double> v) const;

 private:
  std::size_t n_ = 0;
  std::vector<Matrix> matrices_;
};

/// Aᵀy ∈ 𝒦_{n₁} × … × 𝒦_{n_p} with A of size m×n and n = Σ n_k. Rows of A
/// are the constraint vectors a_i, so the LSIP column of v is A·v.
class SocpSystem {
 public:
  SocpSystem(Matrix a, std::vector<std::size_t> blocks);

  std::size_t dim() const { return a_.rows(); }
  std::size_t width() const { return a_.cols(); }
  const Matrix& matrix() const { return a_; }
  const std::vector<std::size_t>& blocks() const { return blocks_; }
  const std::vector<std::size_t>& offsets() const { return offsets_; }

 private:
  Matrix a_;
  std::vector<std::size_t> blocks_;
  std::vector<std::size_t> offsets_;
};

/// User-supplied oracle over an arbitrary index set.
struct CustomOracle {
  using QueryFn = std::function<QueryResult(std::span<const double>)>;
  /// Maps a witness back to its column, or throws UnresolvableWitness when the
  /// label does not name an index of this system.
  using ResolveFn = std::function<Vector(const CustomWitness&)>;

  std::size_t m = 0;
  QueryFn query;
  ResolveFn resolve;  ///< optional; without it the carried column is trusted
  std::string name = "custom";
};

using ProblemInstance = std::variant<FiniteLp, SdpBundle, SocpSystem, CustomOracle>;

std::size_t dimension(const ProblemInstance& instance);
std::string kind_name(const ProblemInstance& instance);

// ---- queries --------------------------------------------------------------

/// Dispatch to the instance's oracle. Throws InvalidQuery for y of the wrong
/// length, y = 0 or non-finite y. Every returned separation satisfies
/// columnᵀy ≤ 0 up to the rounding of that dot product (checked before return,
/// OracleContractViolation otherwise).
QueryResult query(const ProblemInstance& instance, std::span<const double> y);

/// Smallest index i with a_iᵀy ≤ 0.
QueryResult lp_query(const FiniteLp& lp, std::span<const double> y);
/// Certifying Cholesky on Σ y_i A_i.
QueryResult sdp_query(const SdpBundle& sdp, std::span<const double> y);
/// First block of Aᵀy outside the open cone.
QueryResult socp_query(const SocpSystem& socp, std::span<const double> y);

/// The column a_t named by a witness on this instance.
Vector resolve_column(const ProblemInstance& instance, const Witness& witness);

/// True when both witnesses name the same index.
bool same_index(const Witness& a, const Witness& b);

}  // namespace lsip
