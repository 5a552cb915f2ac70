#include <doctest.h>

#include <cmath>
#include <random>

#include "lsip/certify.hpp"
#include "lsip/error.hpp"
#include "lsip/solver.hpp"
#include "support/helpers.hpp"

using namespace lsip;

namespace {

ActiveMember member(std::size_t label, Vector unit, double weight) {
  return ActiveMember{WitnessedColumn{LpIndex{label}, unit}, unit, weight, 1.0};
}

Vector weights_of(const ConvexCombination& c) {
  Vector w;
  for (const auto& m : c.members()) w.push_back(m.weight);
  return w;
}

double weight_sum(const ConvexCombination& c) {
  double s = 0.0;
  for (const auto& m : c.members()) s += m.weight;
  return s;
}

Vector combined(const ConvexCombination& c) {
  Vector z(c.dim(), 0.0);
  for (const auto& m : c.members())
    for (std::size_t i = 0; i < c.dim(); ++i) z[i] += m.weight * m.unit[i];
  return z;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("normalize_column") {
  const RescalingState identity(2);
  CHECK(normalize_column(Vector{3, 4}, identity) == Vector{0.6, 0.8});

  RescalingState factored(2, RescalingState::Storage::Factored);
  factored.rescale(Vector{1, 0});
  const Vector u = normalize_column(Vector{1, 1}, factored);
  CHECK(u[0] == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(u[1] == doctest::Approx(2.0 / std::sqrt(5.0)));

  RescalingState dense(2, RescalingState::Storage::Dense);
  dense.rescale(Vector{1, 0});
  CHECK(dense.dense() == Matrix::from_rows({{0.5, 0}, {0, 1}}));
  CHECK(normalize_column(Vector{1, 0}, dense) == Vector{1, 0});
  CHECK_THROWS_AS(normalize_column(Vector{0, 0}, dense), DegenerateColumn);
}

TEST_CASE("step_alpha examples") {
  auto s1 = step_alpha(Vector{1, 0}, Vector{-1, 0});
  CHECK(s1.alpha == 0.5);
  CHECK(s1.z == Vector{0, 0});

  auto s2 = step_alpha(Vector{1, 0}, Vector{0, 1});
  CHECK(s2.alpha == 0.5);
  CHECK(s2.z == Vector{0.5, 0.5});
  CHECK(1.0 / dot(s2.z, s2.z) == doctest::Approx(2.0));

  auto s3 = step_alpha(Vector{0.6, 0.8}, Vector{0, -1});
  CHECK(s3.alpha == doctest::Approx(0.5));
  CHECK(s3.z[0] == doctest::Approx(0.3));
  CHECK(s3.z[1] == doctest::Approx(-0.1));
  CHECK(1.0 / dot(s3.z, s3.z) == doctest::Approx(10.0));

  CHECK_THROWS_AS(step_alpha(Vector{1, 0}, Vector{1, 0}), CoincidentPoints);
}

TEST_CASE("step_alpha reaches the closest point of the segment") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = 2 + trial % 5;
    const Vector a = testing::random_unit(rng, m);
    Vector z = testing::random_vector(rng, m);
    const double p = dot(a, z);
    if (p > 0)
      for (std::size_t i = 0; i < m; ++i) z[i] -= 2.0 * p * a[i];
    const auto s = step_alpha(z, a);
    CHECK(s.alpha >= 0.0);
    CHECK(s.alpha <= 1.0);
    // Dense sampling of the segment never beats the returned point.
    const double best = dot(s.z, s.z);
    for (int k = 0; k <= 50; ++k) {
      const double t = k / 50.0;
      double f = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = t * z[i] + (1 - t) * a[i];
        f += v * v;
      }
      CHECK(best <= f + 1e-12);
    }
    if (norm2(z) <= 1.0) CHECK(1.0 / best >= 1.0 / dot(z, z) + 1.0 - 1e-9);
  }
}

TEST_CASE("rescale_matrix") {
  CHECK(rescale_matrix(Vector{1, 0}) == Matrix::from_rows({{0.5, 0}, {0, 1}}));
  const double r = 1.0 / std::sqrt(2.0);
  const Matrix d = rescale_matrix(Vector{r, r});
  CHECK(d(0, 0) == doctest::Approx(0.75));
  CHECK(d(0, 1) == doctest::Approx(-0.25));
  CHECK(d(1, 0) == doctest::Approx(-0.25));
  CHECK(d(1, 1) == doctest::Approx(0.75));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = testing::random_unit(rng, 1 + trial % 7);
    const Matrix dm = rescale_matrix(a);
    CHECK(testing::eigen_determinant(dm) == doctest::Approx(0.5).epsilon(1e-12));
    // D·(I + aaᵀ) = I
    Matrix inv = Matrix::identity(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) inv(i, j) += a[i] * a[j];
    const Matrix prod = matmul(dm, inv);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j)
        CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("rescale_budget") {
  CHECK(rescale_budget(0.5) == 4);
  CHECK(rescale_budget(0.9) == 1);
  CHECK(rescale_budget(0.999999) == 1);
  const double rate = std::sqrt(std::exp(1.0)) / 2.0;
  for (double eps : {1e-2, 1e-3, 1e-6, 1e-9}) {
    const auto s = rescale_budget(eps);
    CHECK(std::pow(rate, static_cast<double>(s)) <= eps);
    CHECK(std::pow(rate, static_cast<double>(s - 1)) > eps);
  }
  CHECK_THROWS_AS(rescale_budget(0.0), ConfigError);
  CHECK_THROWS_AS(rescale_budget(1.0), ConfigError);
}

TEST_CASE("apply_scaling in both storage modes") {
  RescalingState none(2);
  CHECK(none.apply(Vector{2, 3}) == Vector{2, 3});
  RescalingState one(2);
  one.rescale(Vector{1, 0});
  CHECK(one.apply(Vector{2, 3}) == Vector{1, 3});

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 20;
    RescalingState dense(m, RescalingState::Storage::Dense);
    RescalingState factored(m, RescalingState::Storage::Factored);
    Matrix reference = Matrix::identity(m);
    for (std::size_t s = 0; s < m; ++s) {
      const Vector d = testing::random_unit(rng, m);
      dense.rescale(d);
      factored.rescale(d);
      reference = matmul(reference, rescale_matrix(d));
    }
    const Vector z = testing::random_vector(rng, m);
    const Vector a = dense.apply(z), b = factored.apply(z), c = matvec(reference, z);
    const Vector at = dense.apply_transposed(z), bt = factored.apply_transposed(z);
    const Vector back = factored.apply(factored.apply_inverse(z));
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      CHECK(std::abs(a[i] - c[i]) <= 1e-12);
      CHECK(std::abs(at[i] - bt[i]) <= 1e-12);
      CHECK(std::abs(back[i] - z[i]) <= 1e-12);
    }
  }
}

TEST_CASE("index elimination examples") {
  SUBCASE("m = 1, incoming column already spanned") {
    auto c = ConvexCombination::from_members(1, {member(0, {1}, 0.3), member(1, {-1}, 0.2)});
    REQUIRE(c.inverse());
    const Vector z_before{0.3 - 0.2 + 0.5};
    c.index_eliminate(member(2, {1}, 0.5));
    CHECK(c.members().size() == 2);
    CHECK(weights_of(c)[0] == doctest::Approx(0.8));
    CHECK(weights_of(c)[1] == doctest::Approx(0.2));
    CHECK(c.aggregate()[0] == doctest::Approx(z_before[0]));
  }

  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<Vector> basis{{1, 0}, {0, 1}, {-r, -r}};

  SUBCASE("m = 2, incoming witness is dropped") {
    auto c = ConvexCombination::from_members(
        2, {member(0, basis[0], 0.25), member(1, basis[1], 0.25), member(2, basis[2], 0.25)});
    c.index_eliminate(member(3, {0, -1}, 0.25));
    REQUIRE(c.members().size() == 3);
    const Vector w = weights_of(c);
    CHECK(w[0] == doctest::Approx(0.3964).epsilon(1e-4));
    CHECK(w[1] == doctest::Approx(0.1464).epsilon(1e-4));
    CHECK(w[2] == doctest::Approx(0.4571).epsilon(1e-4));
    CHECK(weight_sum(c) == doctest::Approx(1.0).epsilon(1e-14));
    // Aggregate preserved: 0.25·(basis sum) + 0.25·(0,−1)
    const Vector z{0.25 * (1 - r), 0.25 * (1 - r) - 0.25};
    CHECK(distance(c.aggregate(), z) <= 1e-12);
  }

  SUBCASE("m = 2, basis member is replaced") {
    auto c = ConvexCombination::from_members(
        2, {member(0, basis[0], 0.05), member(1, basis[1], 0.05), member(2, basis[2], 0.05)});
    c.index_eliminate(member(3, {0, -1}, 0.85));
    REQUIRE(c.members().size() == 3);
    // The second basis member left; the incoming witness takes its slot.
    CHECK(std::get<LpIndex>(c.members()[1].source.witness).index == 3);
    const Vector w = weights_of(c);
    CHECK(w[0] == doctest::Approx(0.1207).epsilon(1e-3));
    CHECK(w[2] == doctest::Approx(0.15).epsilon(1e-3));
    CHECK(w[1] == doctest::Approx(0.7293).epsilon(1e-3));
    CHECK(weight_sum(c) == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(c.inverse());
    CHECK(*c.inverse_residual() <= 1e-12);
    const Vector z{0.05 * (1 - r), 0.05 * (1 - r) - 0.85};
    CHECK(distance(c.aggregate(), z) <= 1e-12);
  }
}

TEST_CASE("index elimination keeps its invariants on random streams") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + trial % 6;
    ConvexCombination c(m);
    c.index_eliminate(member(0, testing::random_unit(rng, m), 1.0));
    for (std::size_t k = 1; k < 200; ++k) {
      const double alpha = unif(rng);
      // Occasionally revisit an earlier label to exercise merging.
      const std::size_t label = (k % 7 == 0) ? k / 2 : k;
      Vector unit = testing::random_unit(rng, m);
      for (const auto& mem : c.members())
        if (std::get<LpIndex>(mem.source.witness).index == label) unit = mem.unit;
      c.absorb(member(label, unit, 0.0), alpha);
      for (const auto& mem : c.members()) CHECK(mem.weight >= -1e-12);
      CHECK(std::abs(weight_sum(c) - 1.0) <= 1e-10);
      CHECK(distance(combined(c), c.aggregate()) <= 1e-10);
      CHECK(c.members().size() <= m + 1);
      if (c.inverse()) CHECK(*c.inverse_residual() <= 1e-8);
    }
    CHECK(c.eliminations() > 0);
  }
}

TEST_CASE("basic procedure examples") {
  const double mu2 = 1.0 / std::sqrt(6.0);
  SUBCASE("feasible at the starting point") {
    const ProblemInstance lp = FiniteLp({{1, 0}, {0, 1}});
    auto r = basic_procedure(lp, RescalingState(2), mu2);
    REQUIRE(std::holds_alternative<FoundD>(r.outcome));
    CHECK(std::get<FoundD>(r.outcome).y_scaled == Vector{1, 1});
    CHECK(r.iterations == 0);
  }
  SUBCASE("antipodal pair gives an exact dual certificate") {
    const ProblemInstance lp = FiniteLp({{1, 0}, {-1, 0}});
    auto r = basic_procedure(lp, RescalingState(2), mu2);
    REQUIRE(std::holds_alternative<FoundP>(r.outcome));
    const auto& p = std::get<FoundP>(r.outcome);
    REQUIRE(p.weights.size() == 2);
    CHECK(p.weights[0].weight == doctest::Approx(0.5));
    CHECK(p.weights[1].weight == doctest::Approx(0.5));
    CHECK(p.report.accepted);
    CHECK(r.iterations <= 2);
  }
  SUBCASE("nearly antipodal pair stays within the iteration bound") {
    const ProblemInstance lp = FiniteLp({{1, 1e-3}, {-1, 1e-3}});
    auto r = basic_procedure(lp, RescalingState(2), mu2);
    CHECK_FALSE(std::holds_alternative<FoundP>(r.outcome));
    CHECK(r.iterations <= 54);
  }
}

TEST_CASE("iteration bound") {
  CHECK(iteration_bound(2, 1.0 / std::sqrt(6.0)) == 54);
  for (std::size_t m = 1; m <= 10; ++m) {
    const double mu = 1.0 / std::sqrt(3.0 * m);
    CHECK(iteration_bound(m, mu) == 3 * m * (m + 1) * (m + 1));
  }
}

TEST_CASE("main algorithm examples") {
  SUBCASE("coordinate basis") {
    for (std::size_t m = 1; m <= 6; ++m) {
      std::vector<Vector> cols;
      for (std::size_t i = 0; i < m; ++i) {
        Vector e(m, 0.0);
        e[i] = 1.0;
        cols.push_back(e);
      }
      SolverConfig cfg;
      cfg.epsilon = 1e-3;
      auto out = main_algorithm(FiniteLp(cols), cfg);
      REQUIRE(std::holds_alternative<FeasibleD>(out.result));
      for (double v : std::get<FeasibleD>(out.result).y) CHECK(v > 0.0);
    }
  }
  SUBCASE("plus and minus coordinate vectors") {
    SolverConfig cfg;
    cfg.epsilon = 1e-3;
    const ProblemInstance lp = FiniteLp({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    auto out = main_algorithm(lp, cfg);
    REQUIRE(std::holds_alternative<DualP>(out.result));
    const auto& p = std::get<DualP>(out.result);
    const auto report = verify_p_certificate(lp, p.weights);
    CHECK(report.accepted);
    CHECK(report.residual <= 1e-9);
  }
  SUBCASE("closed semicircle declares epsilon") {
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    auto out = main_algorithm(testing::semicircle(true), cfg);
    REQUIRE(std::holds_alternative<EpsilonDeclared>(out.result));
    CHECK(out.counters.bp_calls <= rescale_budget(1e-2));
    CHECK(std::get<EpsilonDeclared>(out.result).epsilon == 1e-2);
  }
  SUBCASE("capped rescalings weaken the declared bound") {
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.max_rescalings = 3;
    auto out = main_algorithm(testing::semicircle(true), cfg);
    REQUIRE(std::holds_alternative<EpsilonDeclared>(out.result));
    CHECK(out.counters.rescalings == 3);
    CHECK(std::get<EpsilonDeclared>(out.result).epsilon ==
          doctest::Approx(std::pow(std::sqrt(std::exp(1.0)) / 2.0, 3)));
  }
  SUBCASE("invalid epsilon") {
    SolverConfig cfg;
    cfg.epsilon = 1.5;
    CHECK_THROWS_AS(main_algorithm(FiniteLp(std::vector<Vector>{Vector{1.0}}), cfg), ConfigError);
  }
}

TEST_CASE("storage modes give the same answer") {
  std::mt19937_64 rng(23);
  std::size_t total_rescalings = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t m = 3 + trial % 3;
    const ProblemInstance instance = testing::narrow_cone(rng, m, 5 * m, 0.002, 0.02).lp;
    SolveOutcome outs[3];
    const ScalingMode modes[3] = {ScalingMode::Dense, ScalingMode::Factored, ScalingMode::Auto};
    for (int k = 0; k < 3; ++k) {
      SolverConfig cfg;
      cfg.epsilon = 1e-6;
      cfg.mode = modes[k];
      cfg.factored_limit = 2;
      outs[k] = main_algorithm(instance, cfg);
      CHECK(std::holds_alternative<FeasibleD>(outs[k].result));
    }
    CHECK(outs[0].counters.rescalings == outs[1].counters.rescalings);
    CHECK(outs[0].counters.rescalings == outs[2].counters.rescalings);
    total_rescalings += outs[0].counters.rescalings;
  }
  CHECK(total_rescalings > 0);
}

TEST_CASE("rescaling directions are nearly orthogonal to scaled feasible points") {
  // For a known feasible y*, the scaled point M⁻¹y* stays feasible for the
  // scaled system, and the chosen direction satisfies 0 < ãᵀỹ ≤ μ‖ỹ‖.
  int rescales_seen = 0;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 2 + trial % 5;
    const auto cone = testing::narrow_cone(rng, m, 4 * m, 0.001, 0.01);
    const ProblemInstance instance = cone.lp;
    const double mu = 1.0 / std::sqrt(3.0 * m);
    RescalingState scaling(m);
    for (int s = 0; s < 20; ++s) {
      auto bp = basic_procedure(instance, scaling, mu);
      auto* small = std::get_if<SmallAggregate>(&bp.outcome);
      if (!small) break;
      const Vector y_tilde = scaling.apply_inverse(cone.y_star);
      const Vector dir = small->combination.members()[small->combination.heaviest()].unit;
      const double proj = dot(dir, y_tilde);
      CHECK(proj > 0.0);
      CHECK(proj <= mu * norm2(y_tilde) + 1e-12);

      // ‖D⁻¹ỹ‖ ≤ √(1 + 1/m)‖ỹ‖ for the normalized feasible point.
      Vector unit_y = y_tilde;
      const double ny = norm2(unit_y);
      for (double& v : unit_y) v /= ny;
      Vector grown = unit_y;
      const double f = dot(dir, unit_y);
      for (std::size_t i = 0; i < m; ++i) grown[i] += f * dir[i];
      CHECK(norm2(grown) <= std::sqrt(1.0 + 1.0 / m) + 1e-9);

      scaling.rescale(dir);
      ++rescales_seen;
    }
  }
  CHECK(rescales_seen > 0);
}

TEST_CASE("identical runs give identical rescaling sequences") {
  std::mt19937_64 rng(31);
  const ProblemInstance instance = testing::narrow_cone(rng, 5, 30, 0.001, 0.01).lp;
  SolverConfig cfg;
  cfg.epsilon = 1e-5;
  const auto a = main_algorithm(instance, cfg);
  const auto b = main_algorithm(instance, cfg);
  CHECK(a.rescalings == b.rescalings);
  CHECK(a.counters.oracle_calls == b.counters.oracle_calls);
}
