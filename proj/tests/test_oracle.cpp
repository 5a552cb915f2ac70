#include <doctest.h>

#include <random>

#include "lsip/error.hpp"
#include "lsip/oracle.hpp"
#include "support/helpers.hpp"

using namespace lsip;

TEST_CASE("LP oracle") {
  const ProblemInstance lp = FiniteLp({{1, 0}, {0, 1}});
  CHECK(is_interior(query(lp, Vector{1, 1})));

  auto r = query(lp, Vector{1, -1});
  REQUIRE(r);
  CHECK(std::get<LpIndex>(r->witness).index == 1);
  CHECK(r->column == Vector{0, 1});
  CHECK(dot(r->column, Vector{1, -1}) == -1.0);

  SUBCASE("boundary counts as violation and smallest index wins") {
    auto b = query(lp, Vector{0, 0.5});
    REQUIRE(b);
    CHECK(std::get<LpIndex>(b->witness).index == 0);
  }
  SUBCASE("repeated queries agree") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
      const Vector y = testing::random_vector(rng, 2);
      auto first = query(lp, y);
      auto second = query(lp, y);
      REQUIRE(first.has_value() == second.has_value());
      if (first) CHECK(same_index(first->witness, second->witness));
    }
  }
}

TEST_CASE("invalid queries and instances") {
  const ProblemInstance lp = FiniteLp({{1, 0}, {0, 1}});
  CHECK_THROWS_AS(query(lp, Vector{0, 0}), InvalidQuery);
  CHECK_THROWS_AS(query(lp, Vector{1, NAN}), InvalidQuery);
  CHECK_THROWS_AS(query(lp, Vector{1, 1, 1}), InvalidQuery);
  CHECK_THROWS_AS(FiniteLp({{1, 0}, {0, 0}}), InvalidInstance);
  CHECK_THROWS_AS(FiniteLp({{1, 0}, {0}}), InvalidInstance);
  CHECK_THROWS_AS(SdpBundle({Matrix::from_rows({{1, 1}, {0, 1}})}), InvalidInstance);
  CHECK_THROWS_AS(SocpSystem(Matrix(2, 3), {2, 2}), InvalidInstance);
}

TEST_CASE("SDP oracle examples") {
  SUBCASE("indefinite single matrix") {
    const ProblemInstance sdp = SdpBundle({Matrix::from_rows({{1, 0}, {0, -1}})});
    auto r = query(sdp, Vector{1});
    REQUIRE(r);
    CHECK(std::get<SdpVector>(r->witness).v == Vector{0, 1});
    CHECK(r->column == Vector{-1});
  }
  SUBCASE("identity") {
    const ProblemInstance sdp = SdpBundle({Matrix::identity(2)});
    CHECK(is_interior(query(sdp, Vector{1})));
    auto r = query(sdp, Vector{-1});
    REQUIRE(r);
    CHECK(r->column[0] == doctest::Approx(1.0));
    CHECK(dot(r->column, Vector{-1}) == doctest::Approx(-1.0));
  }
  SUBCASE("two diagonal matrices") {
    const ProblemInstance sdp = SdpBundle(
        {Matrix::from_rows({{1, 0}, {0, 0}}), Matrix::from_rows({{0, 0}, {0, 1}})});
    auto r = query(sdp, Vector{1, -2});
    REQUIRE(r);
    CHECK(std::get<SdpVector>(r->witness).v == Vector{0, 1});
    CHECK(r->column == Vector{0, 1});
    CHECK(dot(r->column, Vector{1, -2}) == -2.0);
  }
}

TEST_CASE("SDP oracle agrees with eigenvalues") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const std::size_t m = 1 + trial % 3;
    std::vector<Matrix> mats;
    for (std::size_t i = 0; i < m; ++i) {
      Matrix a = testing::random_symmetric(rng, n);
      if (i == 0)
        for (std::size_t d = 0; d < n; ++d) a(d, d) += 2.0;
      mats.push_back(a);
    }
    const SdpBundle bundle(mats);
    const Vector y = testing::random_vector(rng, m);
    const Matrix x = bundle.combine(y);
    const double lam = testing::min_eigenvalue(x);
    const double band = 1e-10 * norm_inf(x);
    auto r = sdp_query(bundle, y);
    if (lam > band) CHECK(is_interior(r));
    if (lam < -band) CHECK_FALSE(is_interior(r));
    if (r) {
      const Vector& v = std::get<SdpVector>(r->witness).v;
      CHECK(std::abs(norm2(v) - 1.0) <= 1e-12);
      CHECK(dot(v, matvec(x, v)) <= 1e-12 * norm_inf(x));
      CHECK(resolve_column(bundle, r->witness) == r->column);
    }
  }
}

TEST_CASE("SOCP oracle examples") {
  // A = I₃ so Aᵀy = y.
  const SocpSystem cone(Matrix::identity(3), {3});
  CHECK(is_interior(socp_query(cone, Vector{2, 1, 0})));

  auto r = socp_query(cone, Vector{1, 2, 0});
  REQUIRE(r);
  CHECK(std::get<SocpVector>(r->witness).v == Vector{1, -1, 0});
  CHECK(dot(std::get<SocpVector>(r->witness).v, Vector{1, 2, 0}) == -1.0);

  // The zero query is rejected up front, so exercise x̃ = 0 via A.
  const SocpSystem flat(Matrix::from_rows({{-1, 0, 0}}), {3});
  auto d = socp_query(flat, Vector{1});
  REQUIRE(d);
  CHECK(std::get<SocpVector>(d->witness).v == Vector{1, 0, 0});
  CHECK(d->column == Vector{-1});
}

TEST_CASE("SOCP multi-block witnesses") {
  std::mt19937_64 rng(4);
  const std::vector<std::size_t> blocks{3, 1, 4};
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = testing::random_matrix(rng, 3, 8);
    const SocpSystem sys(a, blocks);
    const Vector y = testing::random_vector(rng, 3);
    auto r = socp_query(sys, y);
    const Vector x = matvec_transposed(a, y);
    bool all_strict = true;
    for (std::size_t b = 0, off = 0; b < blocks.size(); off += blocks[b], ++b) {
      double tail = 0.0;
      for (std::size_t k = 1; k < blocks[b]; ++k) tail += x[off + k] * x[off + k];
      if (!(x[off] > std::sqrt(tail))) all_strict = false;
    }
    CHECK(is_interior(r) == all_strict);
    if (!r) continue;
    const Vector& v = std::get<SocpVector>(r->witness).v;
    // One nonzero block with leading 1 and tail norm ≤ 1; vᵀx ≤ 0 as computed.
    int nonzero = 0;
    for (std::size_t b = 0, off = 0; b < blocks.size(); off += blocks[b], ++b) {
      double tail = 0.0, mag = 0.0;
      for (std::size_t k = 0; k < blocks[b]; ++k) mag += std::abs(v[off + k]);
      for (std::size_t k = 1; k < blocks[b]; ++k) tail += v[off + k] * v[off + k];
      if (mag == 0.0) continue;
      ++nonzero;
      CHECK(v[off] == 1.0);
      CHECK(std::sqrt(tail) <= 1.0 + 1e-12);
    }
    CHECK(nonzero == 1);
    CHECK(dot(v, x) <= 1e-12 * (norm2(v) * norm2(x)));
    CHECK(resolve_column(sys, r->witness) == r->column);
  }
}

TEST_CASE("resolve_column rejects foreign witnesses") {
  const ProblemInstance lp = FiniteLp({{1, 0}, {0, 1}});
  CHECK(resolve_column(lp, LpIndex{1}) == Vector{0, 1});
  CHECK_THROWS_AS(resolve_column(lp, LpIndex{2}), UnresolvableWitness);
  CHECK_THROWS_AS(resolve_column(lp, SdpVector{{1, 0}}), UnresolvableWitness);

  const ProblemInstance sdp = SdpBundle({Matrix::identity(2)});
  CHECK_THROWS_AS(resolve_column(sdp, SdpVector{{2, 0}}), UnresolvableWitness);
  const ProblemInstance socp = SocpSystem(Matrix::identity(2), {2});
  CHECK_THROWS_AS(resolve_column(socp, SocpVector{{1, 2}}), UnresolvableWitness);
  CHECK_THROWS_AS(resolve_column(socp, SocpVector{{0.5, 0}}), UnresolvableWitness);
}

TEST_CASE("custom oracle contract") {
  CustomOracle liar;
  liar.m = 2;
  liar.query = [](std::span<const double>) -> QueryResult {
    return WitnessedColumn{CustomWitness{{0.0}, {1, 1}}, {1, 1}};
  };
  const ProblemInstance inst = liar;
  CHECK_THROWS_AS(query(inst, Vector{1, 1}), OracleContractViolation);

  const ProblemInstance semi = testing::semicircle(true);
  CHECK(kind_name(semi) == "semicircle_closed");
  auto r = query(semi, Vector{0, 1});
  REQUIRE(r);
  CHECK(std::get<CustomWitness>(r->witness).label[0] == doctest::Approx(3.141592653589793));
  CHECK(is_interior(query(ProblemInstance{testing::semicircle(false)}, Vector{0, 1})));
  CHECK_THROWS_AS(resolve_column(semi, CustomWitness{{4.0}, {}}), UnresolvableWitness);
}
