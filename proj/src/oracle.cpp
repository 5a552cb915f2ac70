#include "lsip/oracle.hpp"

#include <cmath>
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

void check_query_point(std::span<const double> y, std::size_t m) {
  if (y.size() != m) {
    throw InvalidQuery("query point has length " + std::to_string(y.size()) +
                       ", expected " + std::to_string(m));
  }
  if (!all_finite(y)) throw InvalidQuery("query point is not finite");
  if (norm_inf(y) == 0.0) throw InvalidQuery("query point is zero");
}

// Rounding scale of the dot product cᵀy.
double dot_scale(std::span<const double> c, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += std::abs(c[i] * y[i]);
  return s;
}

void assert_separates(const WitnessedColumn& w, std::span<const double> y, double band) {
  const double value = dot(w.column, y);
  if (!(value <= 1e-12 * (dot_scale(w.column, y) + band))) {
    throw OracleContractViolation("separation has a_tᵀy = " + std::to_string(value) + " > 0");
  }
}

bool in_unit_cone_slice(std::span<const double> block) {
  if (block.empty() || block[0] != 1.0) return false;
  return norm2(block.subspan(1)) <= 1.0 + 1e-12;
}

}  // namespace

FiniteLp::FiniteLp(std::vector<Vector> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidInstance("LP instance has no columns");
  m_ = columns_.front().size();
  if (m_ == 0) throw InvalidInstance("LP columns have zero length");
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& c = columns_[i];
    if (c.size() != m_) throw InvalidInstance("LP column " + std::to_string(i) + " has wrong length");
    if (!all_finite(c)) throw InvalidInstance("LP column " + std::to_string(i) + " is not finite");
    if (norm_inf(c) == 0.0) throw InvalidInstance("LP column " + std::to_string(i) + " is zero");
  }
}

SdpBundle::SdpBundle(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw InvalidInstance("SDP instance has no matrices");
  n_ = matrices_.front().rows();
  if (n_ == 0) throw InvalidInstance("SDP matrices are empty");
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    Matrix& a = matrices_[k];
    if (a.rows() != n_ || a.cols() != n_) {
      throw InvalidInstance("SDP matrix " + std::to_string(k) + " has wrong shape");
    }
    if (!all_finite(a)) throw InvalidInstance("SDP matrix " + std::to_string(k) + " is not finite");
    double asym = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    if (asym > 1e-12 * scale) {
      throw InvalidInstance("SDP matrix " + std::to_string(k) + " is not symmetric");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double s = 0.5 * (a(i, j) + a(j, i));
        a(i, j) = s;
        a(j, i) = s;
      }
    }
  }
}

Matrix SdpBundle::combine(std::span<const double> y) const {
  Matrix x(n_, n_);
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    const double yk = y[k];
    if (yk == 0.0) continue;
    const auto data = matrices_[k].data();
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) x(i, j) += yk * data[i * n_ + j];
  }
  return x;
}

Vector SdpBundle::column_for(std::span<const double> v) const {
  Vector c(matrices_.size());
  for (std::size_t k = 0; k < matrices_.size(); ++k) c[k] = dot(v, matvec(matrices_[k], v));
  return c;
}

SocpSystem::SocpSystem(Matrix a, std::vector<std::size_t> blocks)
    : a_(std::move(a)), blocks_(std::move(blocks)) {
  if (a_.rows() == 0) throw InvalidInstance("SOCP matrix has no rows");
  if (blocks_.empty()) throw InvalidInstance("SOCP instance has no cone blocks");
  if (!all_finite(a_)) throw InvalidInstance("SOCP matrix is not finite");
  std::size_t total = 0;
  for (std::size_t b : blocks_) {
    if (b < 1) throw InvalidInstance("SOCP block sizes must be at least 1");
    offsets_.push_back(total);
    total += b;
  }
  if (total != a_.cols()) {
    throw InvalidInstance("SOCP block sizes sum to " + std::to_string(total) + " but A has " +
                          std::to_string(a_.cols()) + " columns");
  }
}

std::size_t dimension(const ProblemInstance& instance) {
  return std::visit(Overloaded{[](const FiniteLp& p) { return p.dim(); },
                               [](const SdpBundle& p) { return p.dim(); },
                               [](const SocpSystem& p) { return p.dim(); },
                               [](const CustomOracle& p) { return p.m; }},
                    instance);
}

std::string kind_name(const ProblemInstance& instance) {
  return std::visit(Overloaded{[](const FiniteLp&) { return std::string("lp"); },
                               [](const SdpBundle&) { return std::string("sdp"); },
                               [](const SocpSystem&) { return std::string("socp"); },
                               [](const CustomOracle& c) { return c.name; }},
                    instance);
}

QueryResult lp_query(const FiniteLp& lp, std::span<const double> y) {
  check_query_point(y, lp.dim());
  const auto& cols = lp.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (dot(cols[i], y) <= 0.0) return WitnessedColumn{LpIndex{i}, cols[i]};
  }
  return std::nullopt;
}

QueryResult sdp_query(const SdpBundle& sdp, std::span<const double> y) {
  check_query_point(y, sdp.dim());
  const Matrix x = sdp.combine(y);
  auto result = certifying_cholesky(x);
  if (std::holds_alternative<CholeskyFactor>(result)) return std::nullopt;

  auto& cert = std::get<NotPositiveDefinite>(result);
  WitnessedColumn w{SdpVector{cert.direction}, sdp.column_for(cert.direction)};
  assert_separates(w, y, norm_inf(x));
  return w;
}

QueryResult socp_query(const SocpSystem& socp, std::span<const double> y) {
  check_query_point(y, socp.dim());
  const Vector x = matvec_transposed(socp.matrix(), y);
  const auto& blocks = socp.blocks();
  const auto& offsets = socp.offsets();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::span<const double> block(x.data() + offsets[b], blocks[b]);
    const double head = block[0];
    const double tail_norm = norm2(block.subspan(1));
    if (head > tail_norm) continue;

    Vector v(x.size(), 0.0);
    v[offsets[b]] = 1.0;
    if (tail_norm > 0.0) {
      for (std::size_t j = 1; j < blocks[b]; ++j) v[offsets[b] + j] = -block[j] / tail_norm;
    }
    Vector column = matvec(socp.matrix(), v);
    WitnessedColumn w{SocpVector{std::move(v)}, std::move(column)};
    assert_separates(w, y, 0.0);
    return w;
  }
  return std::nullopt;
}

QueryResult query(const ProblemInstance& instance, std::span<const double> y) {
  return std::visit(
      Overloaded{[&](const FiniteLp& p) { return lp_query(p, y); },
                 [&](const SdpBundle& p) { return sdp_query(p, y); },
                 [&](const SocpSystem& p) { return socp_query(p, y); },
                 [&](const CustomOracle& p) -> QueryResult {
                   check_query_point(y, p.m);
                   if (!p.query) throw InvalidInstance("custom oracle has no query callback");
                   QueryResult r = p.query(y);
                   if (r) {
                     if (r->column.size() != p.m || !all_finite(r->column) ||
                         norm_inf(r->column) == 0.0) {
                       throw OracleContractViolation("custom oracle returned an invalid column");
                     }
                     if (!std::holds_alternative<CustomWitness>(r->witness)) {
                       r->witness = CustomWitness{{}, r->column};
                     }
                     std::get<CustomWitness>(r->witness).column = r->column;
                     assert_separates(*r, y, 0.0);
                   }
                   return r;
                 }},
      instance);
}

Vector resolve_column(const ProblemInstance& instance, const Witness& witness) {
  return std::visit(
      Overloaded{
          [&](const FiniteLp& p, const LpIndex& w) -> Vector {
            if (w.index >= p.size()) {
              throw UnresolvableWitness("LP index " + std::to_string(w.index) + " out of range");
            }
            return p.columns()[w.index];
          },
          [&](const SdpBundle& p, const SdpVector& w) -> Vector {
            if (w.v.size() != p.order() || !all_finite(w.v) ||
                std::abs(norm2(w.v) - 1.0) > 1e-9) {
              throw UnresolvableWitness("SDP witness must be a unit vector of length " +
                                        std::to_string(p.order()));
            }
            return p.column_for(w.v);
          },
          [&](const SocpSystem& p, const SocpVector& w) -> Vector {
            if (w.v.size() != p.width() || !all_finite(w.v)) {
              throw UnresolvableWitness("SOCP witness has wrong length");
            }
            bool any = false;
            for (std::size_t b = 0; b < p.blocks().size(); ++b) {
              std::span<const double> block(w.v.data() + p.offsets()[b], p.blocks()[b]);
              if (norm_inf(block) == 0.0) continue;
              if (!in_unit_cone_slice(block)) {
                throw UnresolvableWitness("SOCP witness block " + std::to_string(b) +
                                          " is not in the cone slice");
              }
              any = true;
            }
            if (!any) throw UnresolvableWitness("SOCP witness is zero");
            return matvec(p.matrix(), w.v);
          },
          [&](const CustomOracle& p, const CustomWitness& w) -> Vector {
            Vector c = p.resolve ? p.resolve(w) : w.column;
            if (c.size() != p.m) throw UnresolvableWitness("custom witness column has wrong length");
            return c;
          },
          [](const auto&, const auto&) -> Vector {
            throw UnresolvableWitness("witness type does not match the instance");
          }},
      instance, witness);
}

bool same_index(const Witness& a, const Witness& b) { return a == b; }

}  // namespace lsip
