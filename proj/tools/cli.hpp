#pragma once

#include <ostream>

namespace padicgeom {

enum ExitCode : int {
  kExitOk = 0,
  kExitGateFailure = 2,
  kExitDiscardBreach = 3,
  kExitUsage = 64,
  kExitInvalidConfig = 65,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace padicgeom
