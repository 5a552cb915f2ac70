#pragma once

// Oracle-based projection and rescaling.
//
// The basic procedure runs a von Neumann-type iteration on the normalized,
// rescaled columns ã_t = Mᵀa_t/‖Mᵀa_t‖: it keeps a convex combination
// z̃ = Σ x_t ã_t over at most m+1 witnesses and moves z̃ to the closest point
// of the segment [z̃, ã_t̂] whenever the oracle separates M·z̃ by t̂. It stops
// with a strictly feasible point, an (exactly) vanishing combination, or
// once ‖z̃‖ ≤ μ/(m+1). The main algorithm then rescales by
// D = I − ½ãããᵀ along the heaviest witness and repeats, and after
// ⌈ln ε⁻¹ / ln(2/√e)⌉ rescalings declares the feasible region thin.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "lsip/certify.hpp"
#include "lsip/linalg.hpp"
#include "lsip/oracle.hpp"

namespace lsip {

// ---- rescaling ------------------------------------------------------------

enum class ScalingMode { Dense, Factored, Auto };

/// M_s = D_1 D_2 ⋯ D_s, held either densely or as its rescaling directions.
class RescalingState {
 public:
  enum class Storage { Dense, Factored };

  explicit RescalingState(std::size_t m, Storage storage = Storage::Factored);

  std::size_t dim() const { return m_; }
  std::size_t count() const { return count_; }
  Storage storage() const { return storage_; }
  const std::vector<Vector>& directions() const { return directions_; }

  /// M·z. Factored: z ← z − ½ã(ãᵀz), last direction first.
  Vector apply(std::span<const double> z) const;
  /// Mᵀ·a. Factored: first direction first.
  Vector apply_transposed(std::span<const double> a) const;
  /// M⁻¹·y using D⁻¹ = I + ããᵀ.
  Vector apply_inverse(std::span<const double> y) const;

  /// M ← M·D for the unit vector `direction`.
  void rescale(std::span<const double> direction);
  /// Switch to dense storage (no-op when already dense).
  void materialize();
  Matrix dense() const;

 private:
  std::size_t m_;
  Storage storage_;
  std::size_t count_ = 0;
  Matrix matrix_;                   // dense storage
  std::vector<Vector> directions_;  // kept in both modes (audit trail)
};

/// D = I − ½ããᵀ for a unit ã; det D = ½, D⁻¹ = I + ããᵀ.
Matrix rescale_matrix(std::span<const double> direction);

/// Smallest s ≥ 1 with (√e/2)^s ≤ ε, i.e. ⌈ln ε⁻¹ / ln(2/√e)⌉.
std::size_t rescale_budget(double epsilon);

/// Mᵀa / ‖Mᵀa‖. Throws DegenerateColumn when ‖Mᵀa‖ < 1e-300.
Vector normalize_column(std::span<const double> a, const RescalingState& scaling,
                        double* scale_out = nullptr);

struct AlphaStep {
  double alpha;
  Vector z;
};

/// Closest point to the origin on the segment [a, z]:
/// α = aᵀ(a − z)/‖a − z‖², clamped to [0, 1], z_new = αz + (1 − α)a.
/// Throws CoincidentPoints when ‖a − z‖ < 1e-14.
AlphaStep step_alpha(std::span<const double> z, std::span<const double> a);

// ---- convex combination ---------------------------------------------------

struct ActiveMember {
  WitnessedColumn source;
  Vector unit;          ///< ã_t under the scaling in force
  double weight = 0.0;  ///< x_t
  double scale = 1.0;   ///< ‖Mᵀa_t‖, maps x_t back to the raw column
};

/// Weights x_t ≥ 0 with Σ x_t = 1 over at most m+1 active witnesses, the
/// aggregate z̃ = Σ x_t ã_t and, once m+1 affinely independent members are
/// present, G = [Ã; 𝟙ᵀ]⁻¹ in member order.
class ConvexCombination {
 public:
  explicit ConvexCombination(std::size_t m) : m_(m) {}

  /// Members are taken as given (weights need not be renormalized); G is
  /// built when there are exactly m+1 of them and the system is invertible.
  static ConvexCombination from_members(std::size_t m, std::vector<ActiveMember> members);

  std::size_t dim() const { return m_; }
  const std::vector<ActiveMember>& members() const { return members_; }
  const Vector& aggregate() const { return aggregate_; }
  const std::optional<Matrix>& inverse() const { return inverse_; }
  std::size_t eliminations() const { return eliminations_; }
  std::size_t refactorizations() const { return refactorizations_; }

  /// Position of the heaviest member; ties go to the earliest position.
  std::size_t heaviest() const;

  /// ‖G·[Ã; 𝟙ᵀ] − I‖∞, or nullopt when G is absent.
  std::optional<double> inverse_residual() const;

  /// Convex step toward an incoming witness: every weight is
  /// multiplied by α, (1 − α) is added to the incoming witness (merged when
  /// it is already active), then index elimination restores |T₊| ≤ m+1.
  void absorb(ActiveMember incoming, double alpha);

  /// Add an already weighted member and eliminate (weights must sum to 1).
  void index_eliminate(ActiveMember incoming);

  /// Recompute z̃ from the weights.
  void refresh_aggregate();

 private:
  void eliminate_with_inverse();
  void eliminate_by_null_vector();
  void drop_negligible();
  bool try_build_inverse();

  std::size_t m_;
  std::vector<ActiveMember> members_;
  Vector aggregate_;
  std::optional<Matrix> inverse_;
  std::size_t eliminations_ = 0;
  std::size_t since_check_ = 0;
  std::size_t refactorizations_ = 0;
};

// ---- procedures -----------------------------------------------------------

/// Optional observers for instrumented runs.
struct SolverHooks {
  /// After the step: z̃ before, z̃ after (from the step formula), α.
  std::function<void(std::span<const double>, std::span<const double>, double)> on_step;
  /// After index elimination; the second argument is the step's z̃.
  std::function<void(const ConvexCombination&, std::span<const double>)> on_elimination;
  /// When a basic procedure returns: its iteration count.
  std::function<void(std::size_t)> on_basic_procedure;
};

struct FoundD {
  Vector y_scaled;  ///< ỹ with M·ỹ strictly feasible
  Vector y;         ///< M·ỹ
};

struct FoundP {
  std::vector<CertificateWeight> weights;  ///< on the raw columns, Σ = 1
  VerificationReport report;
};

struct SmallAggregate {
  ConvexCombination combination;
};

struct BasicProcedureResult {
  std::variant<FoundD, FoundP, SmallAggregate> outcome;
  std::size_t iterations = 0;
  std::size_t oracle_calls = 0;
};

struct BasicProcedureOptions {
  std::optional<Vector> initial_y;  ///< default: all ones
  const SolverHooks* hooks = nullptr;
};

/// ⌈(m+1)²/μ²⌉
std::size_t iteration_bound(std::size_t m, double mu);

BasicProcedureResult basic_procedure(const ProblemInstance& instance,
                                     const RescalingState& scaling, double mu,
                                     const BasicProcedureOptions& options = {});

struct SolverConfig {
  double epsilon = 1e-6;
  std::optional<double> mu;                    ///< default 1/√(3m)
  std::optional<std::size_t> max_rescalings;   ///< cap below the budget
  ScalingMode mode = ScalingMode::Auto;
  std::optional<std::size_t> factored_limit;   ///< Auto: dense once s > limit (default m)
  std::optional<Vector> initial_y;
  SolverHooks hooks;
};

struct FeasibleD {
  Vector y;
  VerificationReport report;
};

struct DualP {
  std::vector<CertificateWeight> weights;
  VerificationReport report;
};

struct EpsilonDeclared {
  double epsilon = 0.0;
  std::size_t s_star = 0;
};

struct SolveCounters {
  std::size_t bp_calls = 0;
  std::size_t bp_iterations = 0;
  std::size_t oracle_calls = 0;
  std::size_t rescalings = 0;
};

struct SolveOutcome {
  std::variant<FeasibleD, DualP, EpsilonDeclared> result;
  SolveCounters counters;
  std::size_t s_star = 0;            ///< rescaling budget in force
  std::vector<Vector> rescalings;    ///< directions ã_t̃ in order
  double wall_ms = 0.0;
};

SolveOutcome main_algorithm(const ProblemInstance& instance, const SolverConfig& config = {});

}  // namespace lsip
