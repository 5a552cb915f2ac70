#pragma once

// JSON problem files, certificates and solve reports (schema version 1).
//
//   lp:   {"schema":1, "type":"lp",   "m":m, "columns":[[...], ...]}
//   sdp:  {"schema":1, "type":"sdp",  "m":m, "n":n, "matrices":[n×n, ...]}
//   socp: {"schema":1, "type":"socp", "m":m, "blocks":[n1, ...], "A": m×n}
//
// Matrices are row-major, either nested rows or one flat array.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lsip/certify.hpp"
#include "lsip/oracle.hpp"
#include "lsip/solver.hpp"

namespace lsip::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Throws InvalidInstance for schema or dimension errors.
ProblemInstance problem_from_json(const json& doc);
/// Custom oracles have no file form (InvalidInstance).
json problem_to_json(const ProblemInstance& instance);

ProblemInstance load_problem(const std::string& path);
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& doc, int indent = 2);

json witness_to_json(const Witness& witness);
Witness witness_from_json(const json& doc);

json weights_to_json(const std::vector<CertificateWeight>& weights);
std::vector<CertificateWeight> weights_from_json(const json& doc);

/// A strict-feasibility point or a dual weight list.
using Certificate = std::variant<Vector, std::vector<CertificateWeight>>;

/// {"schema":1, "kind":"d", "y":[...]} or {"schema":1, "kind":"p", "weights":[...]}.
json certificate_to_json(const Certificate& certificate);
/// Accepts certificate documents and solve reports with status feasible or
/// dual_certificate.
Certificate certificate_from_json(const json& doc);

json report_to_json(const VerificationReport& report);

struct ReportOptions {
  double epsilon = 0.0;
  bool timing = false;
};

/// SolveReport document. wall_ms is included only with options.timing so that
/// identical runs produce identical bytes.
json solve_report(const SolveOutcome& outcome, const ReportOptions& options);

}  // namespace lsip::io
