#pragma once

// Independent checks for the two certificate types. A strictly feasible y and
// positive weights with Σ x_t a_t = 0 cannot both exist for one system, so an
// accepted report of either kind settles feasibility.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsip/oracle.hpp"

namespace lsip {

struct CertificateWeight {
  Witness witness;
  double weight = 0.0;
};

enum class CertificateKind { D, P };

inline constexpr double kDualResidualTolerance = 1e-9;

struct VerificationReport {
  CertificateKind kind = CertificateKind::D;
  /// P: ‖Σ x_t a_t‖ / Σ x_t‖a_t‖. D: the negated normalized margin when one
  /// is available (negative for an accepted point), otherwise 0.
  double residual = 0.0;
  bool accepted = false;
  double tolerance = 0.0;
  /// D only: min_t a_tᵀy / (‖a_t‖‖y‖) for LP, the smallest cone slack
  /// (x₀ − ‖x̃‖)/‖y‖ for SOCP, the smallest Cholesky pivot (or the failing
  /// curvature) relative to ‖Σ y_i A_i‖∞ for SDP.
  std::optional<double> min_margin;
};

/// Accepted exactly when the instance oracle declares y strictly feasible.
VerificationReport verify_d_solution(const ProblemInstance& instance, std::span<const double> y);

/// Accepted when the relative residual is at most 1e-9. Throws
/// InvalidCertificate for non-positive weights or more than m+1 entries and
/// UnresolvableWitness when a witness does not belong to the instance.
VerificationReport verify_p_certificate(const ProblemInstance& instance,
                                        std::span<const CertificateWeight> weights);

// ---- planted instances ----------------------------------------------------

enum class PlantedKind { Lp, Sdp, Socp };
enum class PlantedTarget { FeasibleD, FeasibleP };

struct PlantedOptions {
  PlantedKind kind = PlantedKind::Lp;
  std::size_t m = 2;
  /// LP: number of columns. SDP: matrix order. SOCP: total cone dimension.
  std::size_t n = 4;
  std::uint64_t seed = 0;
  PlantedTarget target = PlantedTarget::FeasibleD;
  double margin = 0.1;
};

struct PlantedInstance {
  ProblemInstance instance;
  std::optional<Vector> y_star;              ///< FeasibleD
  std::vector<CertificateWeight> weights;    ///< FeasibleP
};

/// Seed-deterministic instance with a known certificate. FeasibleD instances
/// satisfy a_tᵀy* ≥ margin·‖a_t‖ (LP, SOCP columns of the cone slice) or
/// Σ y*_i A_i ⪰ margin·I (SDP) for a unit y*. FeasibleP instances carry at
/// most m+1 positive weights with Σ x_t a_t = 0.
PlantedInstance generate_planted(const PlantedOptions& options);

/// SOCP block layout used by the generator: blocks of 4, remainder last.
std::vector<std::size_t> default_socp_blocks(std::size_t n);

// ---- volume estimator -----------------------------------------------------

/// |det| of the matrix whose columns are samples[indices[k]].
double subset_determinant(std::span<const Vector> samples, std::span<const std::size_t> indices);

/// Lower bound on d*(𝓕) from points known to lie in 𝓕: the largest |det| over
/// candidate m-subsets. Samples are processed in order; each new sample j
/// contributes a greedy volume-pivoting completion and 10·m random subsets of
/// samples[0..j] that contain it, drawn from a stream seeded by (seed, j). The
/// bound is therefore non-decreasing when samples are appended.
double dstar_lower_bound(std::span<const Vector> samples, std::size_t m, std::uint64_t seed = 0);

}  // namespace lsip
