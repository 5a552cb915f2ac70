#include "lsip/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "lsip/error.hpp"

namespace lsip {

namespace {

constexpr double kZeroAggregate = 1e-12;
constexpr double kWeightFloor = 1e-15;
constexpr double kInverseTolerance = 1e-8;
constexpr std::size_t kInverseCheckPeriod = 64;

// The rate at which the volume measure shrinks per rescaling.
const double kShrinkRate = std::sqrt(std::exp(1.0)) / 2.0;

// ‖Ã g − target‖ and |Σg − 1| are both needed to trust a γ computed from G.
bool gamma_consistent(const std::vector<ActiveMember>& basis, std::span<const double> gamma,
                      std::span<const double> target) {
  const std::size_t m = target.size();
  Vector recon(m, 0.0);
  double sum = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    sum += gamma[k];
    scale += std::abs(gamma[k]);
    for (std::size_t i = 0; i < m; ++i) recon[i] += gamma[k] * basis[k].unit[i];
  }
  for (std::size_t i = 0; i < m; ++i) recon[i] -= target[i];
  const double tol = 1e-10 * (1.0 + scale);
  return norm_inf(recon) <= tol && std::abs(sum - 1.0) <= tol;
}

}  // namespace

// ---- rescaling ------------------------------------------------------------

RescalingState::RescalingState(std::size_t m, Storage storage) : m_(m), storage_(storage) {
  if (m == 0) throw ConfigError("dimension must be at least 1");
  if (storage_ == Storage::Dense) matrix_ = Matrix::identity(m);
}

Vector RescalingState::apply(std::span<const double> z) const {
  if (storage_ == Storage::Dense) return matvec(matrix_, z);
  Vector out(z.begin(), z.end());
  for (std::size_t k = directions_.size(); k-- > 0;) {
    const Vector& d = directions_[k];
    const double f = 0.5 * dot(d, out);
    for (std::size_t i = 0; i < m_; ++i) out[i] -= f * d[i];
  }
  return out;
}

Vector RescalingState::apply_transposed(std::span<const double> a) const {
  if (storage_ == Storage::Dense) return matvec_transposed(matrix_, a);
  Vector out(a.begin(), a.end());
  for (const Vector& d : directions_) {
    const double f = 0.5 * dot(d, out);
    for (std::size_t i = 0; i < m_; ++i) out[i] -= f * d[i];
  }
  return out;
}

Vector RescalingState::apply_inverse(std::span<const double> y) const {
  Vector out(y.begin(), y.end());
  for (const Vector& d : directions_) {
    const double f = dot(d, out);
    for (std::size_t i = 0; i < m_; ++i) out[i] += f * d[i];
  }
  return out;
}

void RescalingState::rescale(std::span<const double> direction) {
  if (direction.size() != m_) throw ConfigError("rescaling direction has wrong length");
  if (storage_ == Storage::Dense) {
    // M·(I − ½ddᵀ) = M − ½(Md)dᵀ
    const Vector md = matvec(matrix_, direction);
    for (std::size_t i = 0; i < m_; ++i) {
      const double f = 0.5 * md[i];
      for (std::size_t j = 0; j < m_; ++j) matrix_(i, j) -= f * direction[j];
    }
  }
  directions_.emplace_back(direction.begin(), direction.end());
  ++count_;
}

Matrix RescalingState::dense() const {
  if (storage_ == Storage::Dense) return matrix_;
  Matrix mat = Matrix::identity(m_);
  for (const Vector& d : directions_) {
    const Vector md = matvec(mat, d);
    for (std::size_t i = 0; i < m_; ++i) {
      const double f = 0.5 * md[i];
      for (std::size_t j = 0; j < m_; ++j) mat(i, j) -= f * d[j];
    }
  }
  return mat;
}

void RescalingState::materialize() {
  if (storage_ == Storage::Dense) return;
  matrix_ = dense();
  storage_ = Storage::Dense;
}

Matrix rescale_matrix(std::span<const double> direction) {
  const std::size_t m = direction.size();
  Matrix d = Matrix::identity(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) d(i, j) -= 0.5 * direction[i] * direction[j];
  return d;
}

std::size_t rescale_budget(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  const double raw = std::log(1.0 / epsilon) / std::log(1.0 / kShrinkRate);
  auto s = static_cast<std::size_t>(std::max(1.0, std::ceil(raw)));
  while (std::pow(kShrinkRate, static_cast<double>(s)) > epsilon) ++s;
  while (s > 1 && std::pow(kShrinkRate, static_cast<double>(s - 1)) <= epsilon) --s;
  return s;
}

Vector normalize_column(std::span<const double> a, const RescalingState& scaling,
                        double* scale_out) {
  Vector v = scaling.apply_transposed(a);
  const double len = norm2(v);
  if (!(len >= 1e-300)) throw DegenerateColumn("rescaled column collapsed to zero");
  for (double& x : v) x /= len;
  if (scale_out) *scale_out = len;
  return v;
}

AlphaStep step_alpha(std::span<const double> z, std::span<const double> a) {
  const std::size_t m = z.size();
  Vector diff(m);
  for (std::size_t i = 0; i < m; ++i) diff[i] = a[i] - z[i];
  const double dd = dot(diff, diff);
  if (std::sqrt(dd) < 1e-14) throw CoincidentPoints("step endpoints coincide");
  const double alpha = std::clamp(dot(a, diff) / dd, 0.0, 1.0);
  Vector out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = alpha * z[i] + (1.0 - alpha) * a[i];
  return {alpha, std::move(out)};
}

// ---- convex combination ---------------------------------------------------

ConvexCombination ConvexCombination::from_members(std::size_t m,
                                                  std::vector<ActiveMember> members) {
  ConvexCombination c(m);
  c.members_ = std::move(members);
  if (c.members_.size() == m + 1) c.try_build_inverse();
  c.refresh_aggregate();
  return c;
}

std::size_t ConvexCombination::heaviest() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < members_.size(); ++k)
    if (members_[k].weight > members_[best].weight) best = k;
  return best;
}

void ConvexCombination::refresh_aggregate() {
  aggregate_.assign(m_, 0.0);
  for (const auto& mem : members_)
    for (std::size_t i = 0; i < m_; ++i) aggregate_[i] += mem.weight * mem.unit[i];
}

namespace {

Matrix affine_system(const std::vector<ActiveMember>& members, std::size_t m, std::size_t count) {
  Matrix b(m + 1, count);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < m; ++i) b(i, k) = members[k].unit[i];
    b(m, k) = 1.0;
  }
  return b;
}

double identity_defect(const Matrix& g, const Matrix& b) {
  Matrix r = matmul(g, b);
  for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) -= 1.0;
  return norm_inf(r);
}

}  // namespace

std::optional<double> ConvexCombination::inverse_residual() const {
  if (!inverse_) return std::nullopt;
  return identity_defect(*inverse_, affine_system(members_, m_, members_.size()));
}

bool ConvexCombination::try_build_inverse() {
  inverse_.reset();
  since_check_ = 0;
  if (members_.size() != m_ + 1) return false;
  const Matrix b = affine_system(members_, m_, m_ + 1);
  try {
    Matrix g = LuFactorization(b).inverse();
    if (!all_finite(g) || identity_defect(g, b) > kInverseTolerance) return false;
    inverse_ = std::move(g);
    ++refactorizations_;
    return true;
  } catch (const Singular&) {
    // Fewer than m+1 affinely independent members; retry on a later insertion.
    return false;
  }
}

void ConvexCombination::absorb(ActiveMember incoming, double alpha) {
  for (auto& mem : members_) mem.weight *= alpha;
  incoming.weight = 1.0 - alpha;
  index_eliminate(std::move(incoming));
}

void ConvexCombination::index_eliminate(ActiveMember incoming) {
  auto same = std::find_if(members_.begin(), members_.end(), [&](const ActiveMember& mem) {
    return same_index(mem.source.witness, incoming.source.witness);
  });
  if (same != members_.end()) {
    same->weight += incoming.weight;
  } else {
    members_.push_back(std::move(incoming));
  }

  while (members_.size() > m_ + 1) {
    if (inverse_ && members_.size() == m_ + 2) {
      eliminate_with_inverse();
    } else {
      eliminate_by_null_vector();
    }
    ++eliminations_;
  }
  drop_negligible();

  if (!inverse_ && members_.size() == m_ + 1) {
    try_build_inverse();
  } else if (inverse_ && ++since_check_ >= kInverseCheckPeriod) {
    since_check_ = 0;
    if (*inverse_residual() > kInverseTolerance) try_build_inverse();
  }
  refresh_aggregate();
}

void ConvexCombination::eliminate_with_inverse() {
  const std::size_t last = m_ + 1;
  ActiveMember& hat = members_[last];

  Vector rhs(hat.unit);
  rhs.push_back(1.0);
  Vector gamma = matvec(*inverse_, rhs);
  const std::vector<ActiveMember> basis(members_.begin(), members_.begin() + last);
  if (!gamma_consistent(basis, gamma, hat.unit)) {
    // G drifted; refactorize from the basis before trusting γ.
    const ActiveMember saved = hat;
    members_.pop_back();
    const bool ok = try_build_inverse();
    members_.push_back(saved);
    if (!ok) {
      eliminate_by_null_vector();
      return;
    }
    gamma = matvec(*inverse_, rhs);
  }

  // β* = min{−x_t/γ_t : γ_t < 0}
  std::size_t star = last;
  double beta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < last; ++k) {
    if (gamma[k] < 0.0) {
      const double b = -members_[k].weight / gamma[k];
      if (b < beta) {
        beta = b;
        star = k;
      }
    }
  }

  const double x_hat = members_[last].weight;
  if (beta >= x_hat) {
    for (std::size_t k = 0; k < last; ++k) members_[k].weight += x_hat * gamma[k];
    members_.pop_back();
    return;
  }

  for (std::size_t k = 0; k < last; ++k) {
    if (k != star) members_[k].weight += beta * gamma[k];
  }
  members_[last].weight = x_hat - beta;

  Vector u(m_ + 1, 0.0);
  for (std::size_t i = 0; i < m_; ++i) u[i] = members_[last].unit[i] - members_[star].unit[i];
  bool rebuild = false;
  try {
    inverse_ = smw_inverse_update(*inverse_, u, star);
  } catch (const SingularUpdate&) {
    rebuild = true;
  }
  members_[star] = std::move(members_[last]);
  members_.pop_back();
  if (rebuild) try_build_inverse();
}

void ConvexCombination::eliminate_by_null_vector() {
  const Matrix b = affine_system(members_, m_, members_.size());
  auto g = null_vector(b);
  if (!g) throw Singular("no affine dependency among more than m+1 members");
  bool any_positive = std::any_of(g->begin(), g->end(), [](double v) { return v > 0.0; });
  if (!any_positive)
    for (double& v : *g) v = -v;

  std::size_t star = 0;
  double theta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if ((*g)[k] > 0.0) {
      const double t = members_[k].weight / (*g)[k];
      if (t < theta) {
        theta = t;
        star = k;
      }
    }
  }
  for (std::size_t k = 0; k < members_.size(); ++k) members_[k].weight -= theta * (*g)[k];
  members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(star));
  inverse_.reset();
}

void ConvexCombination::drop_negligible() {
  const auto before = members_.size();
  std::erase_if(members_, [](const ActiveMember& mem) { return mem.weight < kWeightFloor; });
  if (members_.size() == before) return;
  inverse_.reset();
  double sum = 0.0;
  for (const auto& mem : members_) sum += mem.weight;
  if (sum > 0.0)
    for (auto& mem : members_) mem.weight /= sum;
}

// ---- basic procedure ------------------------------------------------------

std::size_t iteration_bound(std::size_t m, double mu) {
  const double mp1 = static_cast<double>(m + 1);
  return static_cast<std::size_t>(std::ceil(mp1 * mp1 / (mu * mu) * (1.0 - 1e-15)));
}

namespace {

struct Probe {
  Vector y;
  QueryResult result;
};

Probe ask(const ProblemInstance& instance, const RescalingState& scaling,
          std::span<const double> scaled, std::size_t& calls) {
  Probe p{scaling.apply(scaled), std::nullopt};
  p.result = query(instance, p.y);
  ++calls;
  if (p.result) {
    const double v = dot(p.result->column, p.y);
    if (!(v <= 1e-12 * norm2(p.result->column) * norm2(p.y))) {
      throw OracleContractViolation("oracle separation has a_tᵀy = " + std::to_string(v));
    }
  }
  return p;
}

ActiveMember make_member(WitnessedColumn source, const RescalingState& scaling) {
  double scale = 1.0;
  Vector unit = normalize_column(source.column, scaling, &scale);
  return ActiveMember{std::move(source), std::move(unit), 0.0, scale};
}

std::vector<CertificateWeight> raw_weights(const ConvexCombination& comb) {
  std::vector<CertificateWeight> out;
  double sum = 0.0;
  for (const auto& mem : comb.members()) {
    const double w = mem.weight / mem.scale;
    out.push_back({mem.source.witness, w});
    sum += w;
  }
  for (auto& w : out) w.weight /= sum;
  return out;
}

}  // namespace

BasicProcedureResult basic_procedure(const ProblemInstance& instance,
                                     const RescalingState& scaling, double mu,
                                     const BasicProcedureOptions& options) {
  const std::size_t m = dimension(instance);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (scaling.dim() != m) throw ConfigError("scaling dimension does not match the instance");
  const std::size_t bound = iteration_bound(m, mu);
  const double stop_norm = mu / static_cast<double>(m + 1);
  const SolverHooks* hooks = options.hooks;

  BasicProcedureResult out{SmallAggregate{ConvexCombination(m)}, 0, 0};

  const Vector start = options.initial_y.value_or(Vector(m, 1.0));
  if (start.size() != m) throw ConfigError("initial point has wrong length");
  Probe first = ask(instance, scaling, start, out.oracle_calls);
  if (!first.result) {
    out.outcome = FoundD{start, std::move(first.y)};
    return out;
  }

  ConvexCombination comb(m);
  {
    ActiveMember mem = make_member(std::move(*first.result), scaling);
    mem.weight = 1.0;
    comb.index_eliminate(std::move(mem));
  }

  for (std::size_t iter = 1;; ++iter) {
    if (iter > bound + 1) {
      throw IterationBoundViolated("basic procedure exceeded " + std::to_string(bound) +
                                   " iterations");
    }
    out.iterations = iter;
    const Vector z = comb.aggregate();
    Probe probe = ask(instance, scaling, z, out.oracle_calls);
    if (!probe.result) {
      out.outcome = FoundD{z, std::move(probe.y)};
      return out;
    }

    ActiveMember incoming = make_member(std::move(*probe.result), scaling);
    const AlphaStep step = step_alpha(z, incoming.unit);
    if (hooks && hooks->on_step) hooks->on_step(z, step.z, step.alpha);

    comb.absorb(std::move(incoming), step.alpha);
    if (hooks && hooks->on_elimination) hooks->on_elimination(comb, step.z);

    const double len = norm2(comb.aggregate());
    if (len <= kZeroAggregate) {
      auto weights = raw_weights(comb);
      VerificationReport report = verify_p_certificate(instance, weights);
      if (report.accepted) {
        out.outcome = FoundP{std::move(weights), report};
        return out;
      }
    }
    if (len <= stop_norm) {
      out.outcome = SmallAggregate{std::move(comb)};
      return out;
    }
  }
}

// ---- main algorithm -------------------------------------------------------

SolveOutcome main_algorithm(const ProblemInstance& instance, const SolverConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t m = dimension(instance);
  if (m < 1) throw ConfigError("dimension must be at least 1");
  const std::size_t s_star = rescale_budget(config.epsilon);
  const double mu = config.mu.value_or(1.0 / std::sqrt(3.0 * static_cast<double>(m)));
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  const std::size_t limit = std::min(s_star, config.max_rescalings.value_or(s_star));
  const std::size_t factored_limit = config.factored_limit.value_or(m);

  RescalingState scaling(m, config.mode == ScalingMode::Dense ? RescalingState::Storage::Dense
                                                              : RescalingState::Storage::Factored);
  SolveOutcome out;
  out.s_star = s_star;
  BasicProcedureOptions bp_options{config.initial_y, &config.hooks};

  auto finish = [&](auto result) {
    out.result = std::move(result);
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
    return std::move(out);
  };

  for (std::size_t s = 0; s < limit; ++s) {
    BasicProcedureResult bp = basic_procedure(instance, scaling, mu, bp_options);
    ++out.counters.bp_calls;
    out.counters.bp_iterations += bp.iterations;
    out.counters.oracle_calls += bp.oracle_calls;
    if (config.hooks.on_basic_procedure) config.hooks.on_basic_procedure(bp.iterations);

    if (auto* d = std::get_if<FoundD>(&bp.outcome)) {
      VerificationReport report = verify_d_solution(instance, d->y);
      ++out.counters.oracle_calls;
      if (!report.accepted) throw OracleContractViolation("feasible point failed re-verification");
      return finish(FeasibleD{std::move(d->y), report});
    }
    if (auto* p = std::get_if<FoundP>(&bp.outcome)) {
      return finish(DualP{std::move(p->weights), p->report});
    }

    const auto& comb = std::get<SmallAggregate>(bp.outcome).combination;
    const Vector direction = comb.members()[comb.heaviest()].unit;
    scaling.rescale(direction);
    out.rescalings.push_back(direction);
    ++out.counters.rescalings;
    if (config.mode == ScalingMode::Auto && scaling.count() > factored_limit) scaling.materialize();
  }

  // With fewer rescalings than the budget the certified bound is weaker.
  const double certified =
      limit == s_star ? config.epsilon : std::pow(kShrinkRate, static_cast<double>(limit));
  return finish(EpsilonDeclared{certified, s_star});
}

}  // namespace lsip
