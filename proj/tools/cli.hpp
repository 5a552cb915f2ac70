#pragma once

#include <ostream>

namespace lsip::cli {

enum ExitCode : int {
  kFeasible = 0,
  kDualCertificate = 1,
  kEpsilonDeclared = 2,
  kRejected = 3,
  kUsage = 64,
  kDataError = 65,
  kInternal = 70,
};

/// Entry point behind the `lsip` executable. Exactly one JSON document goes
/// to `out`; logs and human-readable diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsip::cli
