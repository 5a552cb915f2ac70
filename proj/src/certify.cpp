#include "lsip/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lsip/error.hpp"

namespace lsip {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

using Rng = std::mt19937_64;

Vector random_gaussian(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

Vector random_unit(Rng& rng, std::size_t n) {
  for (;;) {
    Vector v = random_gaussian(rng, n);
    const double len = norm2(v);
    if (len > 1e-8) {
      for (double& x : v) x /= len;
      return v;
    }
  }
}

// Unit vector orthogonal to the unit vector `axis`; requires n ≥ 2.
Vector random_unit_orthogonal(Rng& rng, const Vector& axis) {
  for (;;) {
    Vector v = random_gaussian(rng, axis.size());
    const double proj = dot(v, axis);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * axis[i];
    const double len = norm2(v);
    if (len > 1e-8) {
      for (double& x : v) x /= len;
      return v;
    }
  }
}

Matrix random_symmetric(Rng& rng, std::size_t n, double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = normal(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

Matrix random_orthogonal(Rng& rng, std::size_t n) {
  // Modified Gram-Schmidt on Gaussian columns.
  std::vector<Vector> cols;
  while (cols.size() < n) {
    Vector v = random_gaussian(rng, n);
    for (const auto& q : cols) {
      const double p = dot(v, q);
      for (std::size_t i = 0; i < n; ++i) v[i] -= p * q[i];
    }
    const double len = norm2(v);
    if (len < 1e-8) continue;
    for (double& x : v) x /= len;
    cols.push_back(std::move(v));
  }
  Matrix q(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) q(i, j) = cols[j][i];
  return q;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  return dot(a.data(), b.data());
}

std::size_t dimension_checked(const PlantedOptions& o) {
  if (o.m < 1) throw ConfigError("m must be at least 1");
  if (o.n < 1) throw ConfigError("n must be at least 1");
  if (!(o.margin > 0.0 && o.margin < 1.0)) throw ConfigError("margin must lie in (0, 1)");
  return o.m;
}

PlantedInstance planted_lp(const PlantedOptions& o, Rng& rng) {
  const std::size_t m = o.m;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  if (o.target == PlantedTarget::FeasibleD) {
    const Vector y = random_unit(rng, m);
    std::vector<Vector> cols;
    for (std::size_t t = 0; t < o.n; ++t) {
      if (m == 1) {
        cols.push_back(y);
        continue;
      }
      const double c = o.margin + (1.0 - o.margin) * unif(rng);
      const Vector u = random_unit_orthogonal(rng, y);
      const double s = std::sqrt(1.0 - c * c);
      Vector a(m);
      for (std::size_t i = 0; i < m; ++i) a[i] = c * y[i] + s * u[i];
      cols.push_back(std::move(a));
    }
    return {FiniteLp(std::move(cols)), y, {}};
  }

  if (o.n < 2) throw ConfigError("an LP with a dual certificate needs n ≥ 2");
  std::vector<Vector> cols;
  for (std::size_t t = 0; t + 1 < o.n; ++t) cols.push_back(random_unit(rng, m));
  const std::size_t support = std::min(o.n - 1, m);

  Vector sum(m, 0.0);
  std::vector<double> lambda(support);
  for (std::size_t k = 0; k < support; ++k) {
    lambda[k] = 0.5 + unif(rng);
    for (std::size_t i = 0; i < m; ++i) sum[i] += lambda[k] * cols[k][i];
  }
  const double len = norm2(sum);
  if (len < 1e-6) throw ConfigError("degenerate planted combination; try another seed");
  Vector last(m);
  for (std::size_t i = 0; i < m; ++i) last[i] = -sum[i] / len;
  cols.push_back(std::move(last));

  // Shuffle so the certificate's columns are not simply the leading ones.
  std::vector<std::size_t> order(o.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vector> shuffled(o.n);
  std::vector<std::size_t> where(o.n);
  for (std::size_t pos = 0; pos < o.n; ++pos) {
    shuffled[pos] = cols[order[pos]];
    where[order[pos]] = pos;
  }

  std::vector<CertificateWeight> weights;
  for (std::size_t k = 0; k < support; ++k) weights.push_back({LpIndex{where[k]}, lambda[k]});
  weights.push_back({LpIndex{where[o.n - 1]}, len});
  std::sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) {
    return std::get<LpIndex>(a.witness).index < std::get<LpIndex>(b.witness).index;
  });
  return {FiniteLp(std::move(shuffled)), std::nullopt, std::move(weights)};
}

PlantedInstance planted_sdp(const PlantedOptions& o, Rng& rng) {
  const std::size_t m = o.m;
  const std::size_t n = o.n;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(n * m));

  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < m; ++i) mats.push_back(random_symmetric(rng, n, sigma));

  if (o.target == PlantedTarget::FeasibleD) {
    const Vector y = random_unit(rng, m);
    const Matrix q = random_orthogonal(rng, n);
    Vector d(n);
    for (double& di : d) di = o.margin + (1.0 - o.margin) * unif(rng);
    // target = Q diag(d) Qᵀ
    Matrix target(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += q(i, k) * d[k] * q(j, k);
        target(i, j) = s;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) target(j, i) = target(i, j);

    // Shift so that Σ y_i A_i = target exactly in exact arithmetic.
    Matrix residual = target;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t e = 0; e < n * n; ++e)
        residual(e / n, e % n) -= y[k] * mats[k](e / n, e % n);
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t e = 0; e < n * n; ++e) mats[k](e / n, e % n) += y[k] * residual(e / n, e % n);
    return {SdpBundle(std::move(mats)), y, {}};
  }

  // Y = Σ λ_k v_k v_kᵀ, then project every A_i onto Y^⊥ so A_i • Y = 0.
  if (n < 2) throw ConfigError("an SDP with a dual certificate needs n ≥ 2");
  const std::size_t count = std::min(m + 1, n + 1);
  std::vector<CertificateWeight> weights;
  Matrix yy(n, n);
  for (std::size_t k = 0; k < count; ++k) {
    Vector v = random_unit(rng, n);
    const double lambda = 0.5 + unif(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) yy(i, j) += lambda * v[i] * v[j];
    weights.push_back({SdpVector{std::move(v)}, lambda});
  }
  const double yy_norm = frobenius_inner(yy, yy);
  for (auto& a : mats) {
    const double f = frobenius_inner(a, yy) / yy_norm;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * yy(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  }
  return {SdpBundle(std::move(mats)), std::nullopt, std::move(weights)};
}

PlantedInstance planted_socp(const PlantedOptions& o, Rng& rng) {
  const std::size_t m = o.m;
  const std::size_t n = o.n;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  const auto blocks = default_socp_blocks(n);
  std::vector<std::size_t> offsets;
  for (std::size_t b = 0, off = 0; b < blocks.size(); off += blocks[b], ++b) offsets.push_back(off);

  Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = normal(rng);

  if (o.target == PlantedTarget::FeasibleD) {
    const Vector y = random_unit(rng, m);
    Vector target(n, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::size_t off = offsets[b];
      double tail = 0.0;
      if (blocks[b] > 1) {
        const Vector dir = random_unit(rng, blocks[b] - 1);
        tail = unif(rng);
        for (std::size_t j = 1; j < blocks[b]; ++j) target[off + j] = tail * dir[j - 1];
      }
      target[off] = tail + o.margin + 0.5 * unif(rng);
    }
    // A ← A + y (target − Aᵀy)ᵀ gives Aᵀy = target for unit y.
    const Vector current = matvec_transposed(a, y);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) += y[i] * (target[j] - current[j]);
    return {SocpSystem(std::move(a), blocks), y, {}};
  }

  const std::size_t count = m + 1;
  std::vector<CertificateWeight> weights;
  Vector w(n, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, blocks.size() - 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t b = pick(rng);
    Vector v(n, 0.0);
    v[offsets[b]] = 1.0;
    if (blocks[b] > 1) {
      const Vector dir = random_unit(rng, blocks[b] - 1);
      const double r = unif(rng);
      for (std::size_t j = 1; j < blocks[b]; ++j) v[offsets[b] + j] = r * dir[j - 1];
    }
    const double lambda = 0.5 + unif(rng);
    for (std::size_t j = 0; j < n; ++j) w[j] += lambda * v[j];
    weights.push_back({SocpVector{std::move(v)}, lambda});
  }
  // A ← A − (A w) wᵀ / ‖w‖² gives A w = 0.
  const Vector aw = matvec(a, w);
  const double ww = dot(w, w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) -= aw[i] * w[j] / ww;
  return {SocpSystem(std::move(a), blocks), std::nullopt, std::move(weights)};
}

}  // namespace

VerificationReport verify_d_solution(const ProblemInstance& instance, std::span<const double> y) {
  VerificationReport report;
  report.kind = CertificateKind::D;
  const QueryResult q = query(instance, y);
  report.accepted = is_interior(q);
  const double ynorm = norm2(y);

  std::visit(
      Overloaded{[&](const FiniteLp& lp) {
                   double best = std::numeric_limits<double>::infinity();
                   for (const auto& c : lp.columns())
                     best = std::min(best, dot(c, y) / (norm2(c) * ynorm));
                   report.min_margin = best;
                 },
                 [&](const SocpSystem& socp) {
                   const Vector x = matvec_transposed(socp.matrix(), y);
                   double best = std::numeric_limits<double>::infinity();
                   for (std::size_t b = 0; b < socp.blocks().size(); ++b) {
                     std::span<const double> blk(x.data() + socp.offsets()[b], socp.blocks()[b]);
                     best = std::min(best, (blk[0] - norm2(blk.subspan(1))) / ynorm);
                   }
                   report.min_margin = best;
                 },
                 [&](const SdpBundle& sdp) {
                   const Matrix x = sdp.combine(y);
                   const double scale = std::max(norm_inf(x), std::numeric_limits<double>::min());
                   const auto chol = certifying_cholesky(x);
                   if (const auto* f = std::get_if<CholeskyFactor>(&chol)) {
                     report.min_margin = f->min_pivot / scale;
                   } else {
                     report.min_margin = std::get<NotPositiveDefinite>(chol).curvature / scale;
                   }
                 },
                 [&](const CustomOracle&) {
                   if (q) report.min_margin = dot(q->column, y) / (norm2(q->column) * ynorm);
                 }},
      instance);

  report.residual = report.min_margin ? -*report.min_margin : 0.0;
  return report;
}

VerificationReport verify_p_certificate(const ProblemInstance& instance,
                                        std::span<const CertificateWeight> weights) {
  const std::size_t m = dimension(instance);
  if (weights.empty()) throw InvalidCertificate("dual certificate has no weights");
  if (weights.size() > m + 1) {
    throw InvalidCertificate("dual certificate has " + std::to_string(weights.size()) +
                             " weights; at most m+1 = " + std::to_string(m + 1) + " allowed");
  }
  Vector sum(m, 0.0);
  double scale = 0.0;
  for (const auto& w : weights) {
    if (!(w.weight > 0.0) || !std::isfinite(w.weight)) {
      throw InvalidCertificate("dual certificate weights must be positive and finite");
    }
    const Vector col = resolve_column(instance, w.witness);
    for (std::size_t i = 0; i < m; ++i) sum[i] += w.weight * col[i];
    scale += w.weight * norm2(col);
  }
  VerificationReport report;
  report.kind = CertificateKind::P;
  report.tolerance = kDualResidualTolerance;
  report.residual = scale > 0.0 ? norm2(sum) / scale : std::numeric_limits<double>::infinity();
  report.accepted = report.residual <= kDualResidualTolerance;
  return report;
}

std::vector<std::size_t> default_socp_blocks(std::size_t n) {
  std::vector<std::size_t> blocks(n / 4, 4);
  if (n % 4 != 0) blocks.push_back(n % 4);
  return blocks;
}

PlantedInstance generate_planted(const PlantedOptions& options) {
  dimension_checked(options);
  Rng rng(options.seed);
  switch (options.kind) {
    case PlantedKind::Lp:
      return planted_lp(options, rng);
    case PlantedKind::Sdp:
      return planted_sdp(options, rng);
    case PlantedKind::Socp:
      return planted_socp(options, rng);
  }
  throw ConfigError("unknown planted kind");
}

double subset_determinant(std::span<const Vector> samples, std::span<const std::size_t> indices) {
  const std::size_t m = indices.size();
  Matrix y(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    const Vector& s = samples[indices[k]];
    for (std::size_t i = 0; i < m; ++i) y(i, k) = s[i];
  }
  return std::abs(determinant(y));
}

namespace {

// Volume pivoting: start at `first`, repeatedly add the sample in
// samples[0..limit] with the largest component orthogonal to the chosen span.
std::vector<std::size_t> greedy_subset(std::span<const Vector> samples, std::size_t limit,
                                       std::size_t first, std::size_t m) {
  std::vector<std::size_t> chosen{first};
  std::vector<Vector> basis;
  auto push_basis = [&](const Vector& s) {
    Vector v = s;
    for (const auto& q : basis) {
      const double p = dot(v, q);
      for (std::size_t i = 0; i < m; ++i) v[i] -= p * q[i];
    }
    const double len = norm2(v);
    if (len > 0.0)
      for (double& x : v) x /= len;
    basis.push_back(std::move(v));
  };
  push_basis(samples[first]);
  while (chosen.size() < m) {
    std::size_t best = limit + 1;
    double best_len = 0.0;
    for (std::size_t j = 0; j <= limit; ++j) {
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      Vector v = samples[j];
      for (const auto& q : basis) {
        const double p = dot(v, q);
        for (std::size_t i = 0; i < m; ++i) v[i] -= p * q[i];
      }
      const double len = norm2(v);
      if (len > best_len) {
        best_len = len;
        best = j;
      }
    }
    if (best > limit) break;
    chosen.push_back(best);
    push_basis(samples[best]);
  }
  return chosen;
}

}  // namespace

double dstar_lower_bound(std::span<const Vector> samples, std::size_t m, std::uint64_t seed) {
  if (m == 0 || samples.size() < m) return 0.0;
  for (const auto& s : samples)
    if (s.size() != m) throw InvalidInstance("sample has wrong dimension");

  double best = 0.0;
  std::vector<std::size_t> subset(m);
  for (std::size_t j = m - 1; j < samples.size(); ++j) {
    const auto greedy = greedy_subset(samples, j, j, m);
    if (greedy.size() == m) best = std::max(best, subset_determinant(samples, greedy));

    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
    std::vector<std::size_t> pool(j);
    for (std::size_t draw = 0; draw < 10 * m; ++draw) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      // Partial Fisher-Yates: m−1 distinct earlier samples plus sample j.
      for (std::size_t k = 0; k + 1 < m; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, j - 1);
        std::swap(pool[k], pool[pick(rng)]);
        subset[k] = pool[k];
      }
      subset[m - 1] = j;
      best = std::max(best, subset_determinant(samples, subset));
    }
  }
  return best;
}

}  // namespace lsip
