#pragma once

// Shared fixtures for the test binaries: random data, brute-force oracles
// backed by Eigen, and the semicircle systems over T = (0, π] and (0, π).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lsip/error.hpp"
#include "lsip/linalg.hpp"
#include "lsip/oracle.hpp"

namespace lsip::testing {

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline Vector random_unit(std::mt19937_64& rng, std::size_t n) {
  Vector v = random_vector(rng, n);
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = g(rng);
  return a;
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  Matrix a = random_matrix(rng, n, n);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

inline Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double eigen_determinant(const Matrix& a) { return to_eigen(a).determinant(); }

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

/// LP columns c·y* + √(1 − c²)·u with u ⟂ y* and c drawn from [lo, hi]: a
/// narrow feasible cone around the unit y* that forces rescaling.
struct NarrowCone {
  FiniteLp lp;
  Vector y_star;
};

inline NarrowCone narrow_cone(std::mt19937_64& rng, std::size_t m, std::size_t n, double lo,
                              double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  const Vector y = random_unit(rng, m);
  std::vector<Vector> cols;
  for (std::size_t t = 0; t < n; ++t) {
    Vector u = random_vector(rng, m);
    double p = 0.0;
    for (std::size_t i = 0; i < m; ++i) p += u[i] * y[i];
    double len = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      u[i] -= p * y[i];
      len += u[i] * u[i];
    }
    len = std::sqrt(len);
    const double c = unif(rng);
    const double s = std::sqrt(1.0 - c * c);
    Vector a(m);
    for (std::size_t i = 0; i < m; ++i) a[i] = c * y[i] + s * u[i] / len;
    cols.push_back(std::move(a));
  }
  return {FiniteLp(std::move(cols)), y};
}

/// a_t = (cos t, sin t) over t ∈ (0, π] (closed = true) or (0, π).
///
/// For y = r(cos φ, sin φ) the violated indices form the arc of radius π/2
/// around t₀ = φ + π. When t₀ lies in T it is returned. Otherwise the arc
/// meets T in one interval ending at π or starting at 0⁺; the oracle returns
/// π when T contains it and the interval midpoint otherwise.
inline CustomOracle semicircle(bool closed) {
  constexpr double pi = std::numbers::pi;
  auto in_domain = [closed](double t) { return t > 0.0 && (closed ? t <= pi : t < pi); };
  // Exact endpoint so the column at t = π is (−1, 0) rather than (−1, 1.2e-16).
  auto point = [](double t) -> Vector {
    if (t == pi) return {-1.0, 0.0};
    return {std::cos(t), std::sin(t)};
  };
  CustomOracle o;
  o.m = 2;
  o.name = closed ? "semicircle_closed" : "semicircle_open";
  o.query = [in_domain, closed, point](std::span<const double> y) -> QueryResult {
    const double phi = std::atan2(y[1], y[0]);  // (−π, π]
    double t0 = phi + pi;                       // (0, 2π]
    double t = t0;
    if (!in_domain(t0)) {
      if (t0 <= 1.5 * pi) {
        // Interval [φ + π/2, π] (open case: [φ + π/2, π)).
        const double lo = phi + pi / 2.0;
        t = closed ? pi : 0.5 * (lo + pi);
      } else {
        // Interval (0, φ + 3π/2 − 2π].
        const double hi = phi - pi / 2.0;
        if (!(hi > 0.0)) return std::nullopt;
        t = 0.5 * hi;
      }
    }
    if (!in_domain(t)) return std::nullopt;
    Vector col = point(t);
    if (dot(col, y) > 0.0) return std::nullopt;
    return WitnessedColumn{CustomWitness{{t}, col}, col};
  };
  o.resolve = [in_domain, point](const CustomWitness& w) -> Vector {
    if (w.label.size() != 1 || !in_domain(w.label[0])) {
      throw UnresolvableWitness("label is not an index of the semicircle");
    }
    return point(w.label[0]);
  };
  return o;
}

}  // namespace lsip::testing
