#include "cli.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "lsip/certify.hpp"
#include "lsip/error.hpp"
#include "lsip/io.hpp"
#include "lsip/solver.hpp"

namespace lsip::cli {

namespace {

using io::json;

struct SolveFlags {
  std::string input;
  double epsilon = 1e-6;
  std::optional<double> mu;
  std::optional<std::size_t> max_rescalings;
  std::string mode = "auto";
  bool timing = false;
};

struct VerifyFlags {
  std::string input;
  std::string certificate;
};

struct GenerateFlags {
  std::string kind = "lp";
  std::size_t m = 2;
  std::size_t n = 4;
  std::uint64_t seed = 0;
  std::string target = "feasible_d";
  double margin = 0.1;
  std::string output;
  std::string certificate;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("lsip", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::from_str(level));
  return logger;
}

int emit(std::ostream& out, const json& doc, int indent) {
  out << doc.dump(indent) << '\n';
  return 0;
}

int cmd_solve(const SolveFlags& f, spdlog::logger& log, std::ostream& out, int indent) {
  if (!(f.epsilon > 0.0 && f.epsilon < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
  if (f.mu && !(*f.mu > 0.0 && std::isfinite(*f.mu))) throw UsageError("--mu-override must be positive");

  const ProblemInstance instance = io::load_problem(f.input);
  SolverConfig cfg;
  cfg.epsilon = f.epsilon;
  cfg.mu = f.mu;
  cfg.max_rescalings = f.max_rescalings;
  cfg.mode = f.mode == "dense"      ? ScalingMode::Dense
             : f.mode == "factored" ? ScalingMode::Factored
                                    : ScalingMode::Auto;
  std::size_t call = 0;
  cfg.hooks.on_basic_procedure = [&](std::size_t iterations) {
    log.debug("basic procedure {} finished after {} iterations", ++call, iterations);
  };

  log.info("solving {} instance with m = {}, epsilon = {}", kind_name(instance),
           dimension(instance), f.epsilon);
  const SolveOutcome outcome = main_algorithm(instance, cfg);
  const json report = io::solve_report(outcome, {f.epsilon, f.timing});
  log.info("status {} after {} rescalings", report["status"].get<std::string>(),
           outcome.counters.rescalings);

  emit(out, report, indent);
  switch (outcome.result.index()) {
    case 0:
      return kFeasible;
    case 1:
      return kDualCertificate;
    default:
      return kEpsilonDeclared;
  }
}

int cmd_verify(const VerifyFlags& f, spdlog::logger& log, std::ostream& out, int indent) {
  const ProblemInstance instance = io::load_problem(f.input);
  const io::Certificate cert = io::certificate_from_json(io::read_json_file(f.certificate));

  json doc;
  if (const auto* y = std::get_if<Vector>(&cert)) {
    if (y->size() != dimension(instance)) {
      doc = {{"kind", "D"}, {"accepted", false}, {"error", "y has the wrong dimension"}};
    } else {
      try {
        doc = io::report_to_json(verify_d_solution(instance, *y));
      } catch (const InvalidQuery& e) {
        doc = {{"kind", "D"}, {"accepted", false}, {"error", e.what()}};
      }
    }
  } else {
    const auto& weights = std::get<std::vector<CertificateWeight>>(cert);
    try {
      doc = io::report_to_json(verify_p_certificate(instance, weights));
    } catch (const InvalidCertificate& e) {
      doc = {{"kind", "P"}, {"accepted", false}, {"error", e.what()}};
    } catch (const UnresolvableWitness& e) {
      doc = {{"kind", "P"}, {"accepted", false}, {"error", e.what()}};
    }
  }
  doc["schema"] = io::kSchemaVersion;
  const bool accepted = doc["accepted"].get<bool>();
  log.info("certificate {}", accepted ? "accepted" : "rejected");
  emit(out, doc, indent);
  return accepted ? kFeasible : kRejected;
}

int cmd_generate(const GenerateFlags& f, spdlog::logger& log, std::ostream& out, int indent) {
  static const std::map<std::string, PlantedKind> kinds{
      {"lp", PlantedKind::Lp}, {"sdp", PlantedKind::Sdp}, {"socp", PlantedKind::Socp}};
  PlantedOptions opt;
  opt.kind = kinds.at(f.kind);
  opt.m = f.m;
  opt.n = f.n;
  opt.seed = f.seed;
  opt.target = f.target == "feasible_p" ? PlantedTarget::FeasibleP : PlantedTarget::FeasibleD;
  opt.margin = f.margin;

  const PlantedInstance planted = generate_planted(opt);
  io::write_json_file(f.output, io::problem_to_json(planted.instance), indent);
  const io::Certificate cert = planted.y_star ? io::Certificate{*planted.y_star}
                                              : io::Certificate{planted.weights};
  io::write_json_file(f.certificate, io::certificate_to_json(cert), indent);
  log.info("wrote {} and {}", f.output, f.certificate);

  return emit(out,
              {{"schema", io::kSchemaVersion},
               {"kind", f.kind},
               {"target", f.target},
               {"problem", f.output},
               {"certificate", f.certificate}},
              indent);
}

int fail(std::ostream& out, std::ostream& err, int code, const std::string& message) {
  out << json{{"error", message}}.dump() << '\n';
  err << "error: " << message << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feasibility solver for homogeneous linear semi-infinite systems", "lsip"};
  app.require_subcommand(1);

  std::string log_level = "warn";
  int indent = 2;
  const std::vector<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--log-level", log_level, "Log verbosity on stderr")
        ->check(CLI::IsMember(levels));
    sub->add_option("--json-indent", indent, "JSON indentation (negative: compact)");
  };

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "Run the projection-and-rescaling solver");
  solve->add_option("--input", sf.input, "Problem file")->required();
  solve->add_option("--epsilon", sf.epsilon, "Volume threshold in (0, 1)");
  solve->add_option("--mu-override", sf.mu, "Stopping parameter of the basic procedure");
  solve->add_option("--max-rescalings", sf.max_rescalings, "Cap on rescaling steps");
  solve->add_option("--mode", sf.mode, "Scaling storage")
      ->check(CLI::IsMember({"dense", "factored", "auto"}));
  solve->add_flag("--timing", sf.timing, "Include wall_ms in the report");
  add_common(solve);

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "Check a certificate against a problem");
  verify->add_option("--input", vf.input, "Problem file")->required();
  verify->add_option("--certificate", vf.certificate, "Certificate or solve report")->required();
  add_common(verify);

  GenerateFlags gf;
  auto* generate = app.add_subcommand("generate", "Write a planted instance and its certificate");
  generate->add_option("--kind", gf.kind)->check(CLI::IsMember({"lp", "sdp", "socp"}));
  generate->add_option("--m", gf.m)->check(CLI::PositiveNumber);
  generate->add_option("--n", gf.n)->check(CLI::PositiveNumber);
  generate->add_option("--seed", gf.seed);
  generate->add_option("--target", gf.target)->check(CLI::IsMember({"feasible_d", "feasible_p"}));
  generate->add_option("--margin", gf.margin)->check(CLI::Range(0.0, 1.0));
  generate->add_option("--output", gf.output, "Problem file to write")->required();
  generate->add_option("--certificate", gf.certificate, "Certificate file to write")->required();
  add_common(generate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      err << app.help();
      return 0;
    }
    return fail(out, err, kUsage, e.what());
  }

  const auto logger = make_logger(err, log_level);
  try {
    if (solve->parsed()) return cmd_solve(sf, *logger, out, indent);
    if (verify->parsed()) return cmd_verify(vf, *logger, out, indent);
    return cmd_generate(gf, *logger, out, indent);
  } catch (const UsageError& e) {
    return fail(out, err, kUsage, e.what());
  } catch (const ConfigError& e) {
    return fail(out, err, kUsage, e.what());
  } catch (const InvalidInstance& e) {
    return fail(out, err, kDataError, e.what());
  } catch (const LinalgError& e) {
    return fail(out, err, kDataError, e.what());
  } catch (const InvalidCertificate& e) {
    return fail(out, err, kDataError, e.what());
  } catch (const std::exception& e) {
    return fail(out, err, kInternal, e.what());
  }
}

}  // namespace lsip::cli
