#include <optional>
#include <string>
#include <tuple>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsip/certify.hpp"
#include "lsip/error.hpp"
#include "lsip/io.hpp"
#include "lsip/solver.hpp"

namespace py = pybind11;
using namespace lsip;
using io::json;

namespace {

// Problems, certificates and reports cross the boundary as JSON text; the
// Python package converts to and from dicts.

SolverConfig make_config(double epsilon, std::optional<double> mu,
                         std::optional<std::size_t> max_rescalings, const std::string& mode) {
  SolverConfig cfg;
  cfg.epsilon = epsilon;
  cfg.mu = mu;
  cfg.max_rescalings = max_rescalings;
  if (mode == "dense") {
    cfg.mode = ScalingMode::Dense;
  } else if (mode == "factored") {
    cfg.mode = ScalingMode::Factored;
  } else if (mode == "auto") {
    cfg.mode = ScalingMode::Auto;
  } else {
    throw ConfigError("mode must be dense, factored or auto");
  }
  return cfg;
}

std::string solve_json(const std::string& problem, double epsilon, std::optional<double> mu,
                       std::optional<std::size_t> max_rescalings, const std::string& mode,
                       bool timing) {
  const ProblemInstance instance = io::problem_from_json(json::parse(problem));
  const auto cfg = make_config(epsilon, mu, max_rescalings, mode);
  return io::solve_report(main_algorithm(instance, cfg), {epsilon, timing}).dump();
}

using PyQuery = std::function<std::optional<std::tuple<Vector, Vector>>(const Vector&)>;
using PyResolve = std::function<Vector(const Vector&)>;

CustomOracle wrap_oracle(std::size_t m, PyQuery query_fn, std::optional<PyResolve> resolve_fn) {
  CustomOracle o;
  o.m = m;
  o.name = "python";
  o.query = [query_fn](std::span<const double> y) -> QueryResult {
    auto r = query_fn(Vector(y.begin(), y.end()));
    if (!r) return std::nullopt;
    auto& [label, column] = *r;
    return WitnessedColumn{CustomWitness{label, column}, column};
  };
  if (resolve_fn) {
    o.resolve = [fn = *resolve_fn](const CustomWitness& w) { return fn(w.label); };
  }
  return o;
}

std::string solve_custom_json(std::size_t m, PyQuery query_fn, std::optional<PyResolve> resolve_fn,
                              double epsilon, std::optional<double> mu,
                              std::optional<std::size_t> max_rescalings, const std::string& mode,
                              bool timing) {
  const ProblemInstance instance = wrap_oracle(m, std::move(query_fn), std::move(resolve_fn));
  const auto cfg = make_config(epsilon, mu, max_rescalings, mode);
  return io::solve_report(main_algorithm(instance, cfg), {epsilon, timing}).dump();
}

std::optional<std::string> query_json(const std::string& problem, const Vector& y) {
  const ProblemInstance instance = io::problem_from_json(json::parse(problem));
  const QueryResult r = query(instance, y);
  if (!r) return std::nullopt;
  return json{{"witness", io::witness_to_json(r->witness)}, {"column", r->column}}.dump();
}

std::string verify_json(const std::string& problem, const std::string& certificate) {
  const ProblemInstance instance = io::problem_from_json(json::parse(problem));
  const io::Certificate cert = io::certificate_from_json(json::parse(certificate));
  if (const auto* y = std::get_if<Vector>(&cert)) {
    return io::report_to_json(verify_d_solution(instance, *y)).dump();
  }
  return io::report_to_json(
             verify_p_certificate(instance, std::get<std::vector<CertificateWeight>>(cert)))
      .dump();
}

std::tuple<std::string, std::string> generate_json(const std::string& kind, std::size_t m,
                                                   std::size_t n, std::uint64_t seed,
                                                   const std::string& target, double margin) {
  PlantedOptions o;
  if (kind == "lp") {
    o.kind = PlantedKind::Lp;
  } else if (kind == "sdp") {
    o.kind = PlantedKind::Sdp;
  } else if (kind == "socp") {
    o.kind = PlantedKind::Socp;
  } else {
    throw ConfigError("kind must be lp, sdp or socp");
  }
  if (target == "feasible_d") {
    o.target = PlantedTarget::FeasibleD;
  } else if (target == "feasible_p") {
    o.target = PlantedTarget::FeasibleP;
  } else {
    throw ConfigError("target must be feasible_d or feasible_p");
  }
  o.m = m;
  o.n = n;
  o.seed = seed;
  o.margin = margin;
  const PlantedInstance p = generate_planted(o);
  const io::Certificate cert =
      p.y_star ? io::Certificate{*p.y_star} : io::Certificate{p.weights};
  return {io::problem_to_json(p.instance).dump(), io::certificate_to_json(cert).dump()};
}

py::dict cholesky(const std::vector<Vector>& rows) {
  const auto r = certifying_cholesky(Matrix::from_rows(rows));
  py::dict out;
  if (const auto* f = std::get_if<CholeskyFactor>(&r)) {
    std::vector<Vector> lower;
    for (std::size_t i = 0; i < f->lower.rows(); ++i) {
      auto row = f->lower.row(i);
      lower.emplace_back(row.begin(), row.end());
    }
    out["positive_definite"] = true;
    out["lower"] = lower;
    out["min_pivot"] = f->min_pivot;
  } else {
    const auto& npd = std::get<NotPositiveDefinite>(r);
    out["positive_definite"] = false;
    out["direction"] = npd.direction;
    out["curvature"] = npd.curvature;
    out["row"] = npd.row;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of lsipfeas";

  auto base = py::register_exception<Error>(m, "LsipError", PyExc_RuntimeError);
  py::register_exception<InvalidInstance>(m, "InvalidInstance", base.ptr());
  py::register_exception<InvalidQuery>(m, "InvalidQuery", base.ptr());
  py::register_exception<InvalidCertificate>(m, "InvalidCertificate", base.ptr());
  py::register_exception<UnresolvableWitness>(m, "UnresolvableWitness", base.ptr());
  py::register_exception<OracleContractViolation>(m, "OracleContractViolation", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<LinalgError>(m, "LinalgError", base.ptr());

  m.def("solve_json", &solve_json, py::arg("problem"), py::arg("epsilon") = 1e-6,
        py::arg("mu") = std::nullopt, py::arg("max_rescalings") = std::nullopt,
        py::arg("mode") = "auto", py::arg("timing") = false);
  m.def("solve_custom_json", &solve_custom_json, py::arg("m"), py::arg("query"),
        py::arg("resolve") = std::nullopt, py::arg("epsilon") = 1e-6, py::arg("mu") = std::nullopt,
        py::arg("max_rescalings") = std::nullopt, py::arg("mode") = "auto",
        py::arg("timing") = false);
  m.def("query_json", &query_json, py::arg("problem"), py::arg("y"));
  m.def("verify_json", &verify_json, py::arg("problem"), py::arg("certificate"));
  m.def("generate_json", &generate_json, py::arg("kind"), py::arg("m"), py::arg("n"),
        py::arg("seed") = 0, py::arg("target") = "feasible_d", py::arg("margin") = 0.1);

  m.def("rescale_budget", &rescale_budget, py::arg("epsilon"),
        "Smallest s >= 1 with (sqrt(e)/2)^s <= epsilon.");
  m.def(
      "step_alpha",
      [](const Vector& z, const Vector& a) {
        if (z.size() != a.size()) throw ConfigError("z and a must have equal length");
        auto s = lsip::step_alpha(z, a);
        return std::make_tuple(s.alpha, s.z);
      },
      py::arg("z"), py::arg("a"));
  m.def("certifying_cholesky", &cholesky, py::arg("matrix"));
}
