#include "lsip/io.hpp"

#include <fstream>
#include <sstream>

#include "lsip/error.hpp"

namespace lsip::io {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw InvalidInstance(std::string("missing field \"") + key + "\"");
  }
  return doc.at(key);
}

std::size_t size_field(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidInstance(std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

Vector vector_from(const json& v, const char* what) {
  if (!v.is_array()) throw InvalidInstance(std::string(what) + " must be an array of numbers");
  Vector out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw InvalidInstance(std::string(what) + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// Nested rows or a flat row-major array.
Matrix matrix_from(const json& v, std::size_t rows, std::size_t cols, const char* what) {
  if (!v.is_array()) throw InvalidInstance(std::string(what) + " must be an array");
  Matrix m(rows, cols);
  if (!v.empty() && v.front().is_array()) {
    if (v.size() != rows) throw InvalidInstance(std::string(what) + " has the wrong number of rows");
    for (std::size_t i = 0; i < rows; ++i) {
      const Vector r = vector_from(v[i], what);
      if (r.size() != cols) throw InvalidInstance(std::string(what) + " has a row of wrong length");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = r[j];
    }
  } else {
    const Vector flat = vector_from(v, what);
    if (flat.size() != rows * cols) {
      throw InvalidInstance(std::string(what) + " has " + std::to_string(flat.size()) +
                            " entries, expected " + std::to_string(rows * cols));
    }
    for (std::size_t e = 0; e < flat.size(); ++e) m(e / cols, e % cols) = flat[e];
  }
  return m;
}

json matrix_to(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  return rows;
}

void check_schema(const json& doc) {
  if (!doc.is_object()) throw InvalidInstance("document must be a JSON object");
  if (doc.contains("schema") && doc.at("schema") != kSchemaVersion) {
    throw InvalidInstance("unsupported schema version");
  }
}

}  // namespace

ProblemInstance problem_from_json(const json& doc) {
  check_schema(doc);
  const json& type = require(doc, "type");
  if (!type.is_string()) throw InvalidInstance("\"type\" must be a string");
  const std::string kind = type.get<std::string>();
  const std::size_t m = size_field(doc, "m");
  if (m == 0) throw InvalidInstance("m must be at least 1");

  if (kind == "lp") {
    const json& cols = require(doc, "columns");
    if (!cols.is_array() || cols.empty()) throw InvalidInstance("\"columns\" must be a non-empty array");
    std::vector<Vector> columns;
    for (const auto& c : cols) {
      columns.push_back(vector_from(c, "LP column"));
      if (columns.back().size() != m) throw InvalidInstance("LP column length differs from m");
    }
    return FiniteLp(std::move(columns));
  }
  if (kind == "sdp") {
    const std::size_t n = size_field(doc, "n");
    if (n == 0) throw InvalidInstance("n must be at least 1");
    const json& mats = require(doc, "matrices");
    if (!mats.is_array() || mats.size() != m) {
      throw InvalidInstance("\"matrices\" must hold exactly m matrices");
    }
    std::vector<Matrix> matrices;
    for (const auto& a : mats) matrices.push_back(matrix_from(a, n, n, "SDP matrix"));
    return SdpBundle(std::move(matrices));
  }
  if (kind == "socp") {
    const json& blocks_doc = require(doc, "blocks");
    if (!blocks_doc.is_array() || blocks_doc.empty()) {
      throw InvalidInstance("\"blocks\" must be a non-empty array");
    }
    std::vector<std::size_t> blocks;
    std::size_t n = 0;
    for (const auto& b : blocks_doc) {
      if (!b.is_number_integer() || b.get<long long>() < 1) {
        throw InvalidInstance("block sizes must be positive integers");
      }
      blocks.push_back(b.get<std::size_t>());
      n += blocks.back();
    }
    return SocpSystem(matrix_from(require(doc, "A"), m, n, "SOCP matrix A"), std::move(blocks));
  }
  throw InvalidInstance("unknown problem type \"" + kind + "\"");
}

json problem_to_json(const ProblemInstance& instance) {
  return std::visit(
      Overloaded{[](const FiniteLp& p) {
                   return json{{"schema", kSchemaVersion},
                               {"type", "lp"},
                               {"m", p.dim()},
                               {"columns", p.columns()}};
                 },
                 [](const SdpBundle& p) {
                   json mats = json::array();
                   for (const auto& a : p.matrices()) mats.push_back(matrix_to(a));
                   return json{{"schema", kSchemaVersion},
                               {"type", "sdp"},
                               {"m", p.dim()},
                               {"n", p.order()},
                               {"matrices", mats}};
                 },
                 [](const SocpSystem& p) {
                   return json{{"schema", kSchemaVersion},
                               {"type", "socp"},
                               {"m", p.dim()},
                               {"blocks", p.blocks()},
                               {"A", matrix_to(p.matrix())}};
                 },
                 [](const CustomOracle&) -> json {
                   throw InvalidInstance("custom oracles cannot be written to a problem file");
                 }},
      instance);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInstance("cannot open \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInstance("malformed JSON in \"" + path + "\": " + e.what());
  }
}

ProblemInstance load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

void write_json_file(const std::string& path, const json& doc, int indent) {
  std::ofstream out(path);
  if (!out) throw InvalidInstance("cannot write \"" + path + "\"");
  out << doc.dump(indent) << '\n';
}

json witness_to_json(const Witness& witness) {
  return std::visit(Overloaded{[](const LpIndex& w) { return json{{"type", "lp"}, {"index", w.index}}; },
                               [](const SdpVector& w) { return json{{"type", "sdp"}, {"v", w.v}}; },
                               [](const SocpVector& w) { return json{{"type", "socp"}, {"v", w.v}}; },
                               [](const CustomWitness& w) {
                                 return json{{"type", "custom"}, {"label", w.label}, {"column", w.column}};
                               }},
                    witness);
}

Witness witness_from_json(const json& doc) {
  const json& type = require(doc, "type");
  if (!type.is_string()) throw InvalidInstance("witness \"type\" must be a string");
  const std::string kind = type.get<std::string>();
  if (kind == "lp") return LpIndex{size_field(doc, "index")};
  if (kind == "sdp") return SdpVector{vector_from(require(doc, "v"), "SDP witness")};
  if (kind == "socp") return SocpVector{vector_from(require(doc, "v"), "SOCP witness")};
  if (kind == "custom") {
    return CustomWitness{vector_from(require(doc, "label"), "custom label"),
                         vector_from(require(doc, "column"), "custom column")};
  }
  throw InvalidInstance("unknown witness type \"" + kind + "\"");
}

json weights_to_json(const std::vector<CertificateWeight>& weights) {
  json out = json::array();
  for (const auto& w : weights) out.push_back({{"witness", witness_to_json(w.witness)}, {"x", w.weight}});
  return out;
}

std::vector<CertificateWeight> weights_from_json(const json& doc) {
  if (!doc.is_array()) throw InvalidInstance("\"weights\" must be an array");
  std::vector<CertificateWeight> out;
  for (const auto& e : doc) {
    const json& x = require(e, "x");
    if (!x.is_number()) throw InvalidInstance("weight \"x\" must be a number");
    out.push_back({witness_from_json(require(e, "witness")), x.get<double>()});
  }
  return out;
}

json certificate_to_json(const Certificate& certificate) {
  return std::visit(Overloaded{[](const Vector& y) {
                                 return json{{"schema", kSchemaVersion}, {"kind", "d"}, {"y", y}};
                               },
                               [](const std::vector<CertificateWeight>& w) {
                                 return json{{"schema", kSchemaVersion},
                                             {"kind", "p"},
                                             {"weights", weights_to_json(w)}};
                               }},
                    certificate);
}

Certificate certificate_from_json(const json& doc) {
  check_schema(doc);
  if (doc.contains("status")) {
    if (!doc.at("status").is_string()) throw InvalidInstance("\"status\" must be a string");
    const std::string status = doc.at("status").get<std::string>();
    if (status == "feasible") return vector_from(require(doc, "y"), "\"y\"");
    if (status == "dual_certificate") return weights_from_json(require(doc, "weights"));
    throw InvalidInstance("report with status \"" + status + "\" carries no certificate");
  }
  const json& kind = require(doc, "kind");
  if (kind == "d") return vector_from(require(doc, "y"), "\"y\"");
  if (kind == "p") return weights_from_json(require(doc, "weights"));
  throw InvalidInstance("certificate \"kind\" must be \"d\" or \"p\"");
}

json report_to_json(const VerificationReport& report) {
  json out{{"kind", report.kind == CertificateKind::D ? "D" : "P"},
           {"residual", report.residual},
           {"accepted", report.accepted},
           {"tolerance", report.tolerance}};
  if (report.min_margin) out["min_margin"] = *report.min_margin;
  return out;
}

json solve_report(const SolveOutcome& outcome, const ReportOptions& options) {
  json out{{"schema", kSchemaVersion}};
  std::visit(Overloaded{[&](const FeasibleD& d) {
                          out["status"] = "feasible";
                          out["y"] = d.y;
                          out["verification"] = report_to_json(d.report);
                        },
                        [&](const DualP& p) {
                          out["status"] = "dual_certificate";
                          out["weights"] = weights_to_json(p.weights);
                          out["verification"] = report_to_json(p.report);
                        },
                        [&](const EpsilonDeclared& e) {
                          out["status"] = "epsilon_declared";
                          out["certified_epsilon"] = e.epsilon;
                        }},
             outcome.result);
  out["epsilon"] = options.epsilon;
  out["s_star"] = outcome.s_star;
  out["counters"] = {{"bp_calls", outcome.counters.bp_calls},
                     {"bp_iterations", outcome.counters.bp_iterations},
                     {"oracle_calls", outcome.counters.oracle_calls},
                     {"rescalings", outcome.counters.rescalings}};
  if (options.timing) out["wall_ms"] = outcome.wall_ms;
  return out;
}

}  // namespace lsip::io
