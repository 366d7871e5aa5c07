#pragma once

#include <iosfwd>

#include "pam_cli/run_config.hpp"

namespace pam::cli {

enum ExitCode : int {
  kPass = 0,
  kConfigError = 1,
  kRegimeMismatch = 2,
  kBlowUp = 3,
  kIntegrity = 4,
  kChecksFailed = 5,
};

/// limits.csv and limits_errors.csv (plus bracket files for d = 1 finite
/// measures) in cfg.out.
int cmd_limits(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// ensemble.csv and manifest.ini in cfg.out.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Report bundle in cfg.out/report, reusing cfg.out/ensemble.csv when its
/// manifest matches; otherwise simulates first.
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace pam::cli
