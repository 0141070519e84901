#pragma once

// Subcommands of the plap executable.  Each writes machine-readable output
// to the given streams and returns a process exit code.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "plap/config.hpp"
#include "plap/verify.hpp"

namespace plap::cli {

enum ExitCode : int {
  kExitOk = 0,
  /// A verification or comparison check failed.
  kExitFailed = 1,
  /// Bad command line, unknown suite, invalid configuration.
  kExitUsage = 2,
  /// Numerical failure such as a solver running out of iterations.
  kExitRuntime = 3,
};

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// Columns x1..xn, value, grad_norm, delta_p_direct, delta_p_closed_form,
/// delta_p_fd, flag.  Per-point failures set the affected columns to nan
/// and name the failure in `flag`.
int cmd_eval(const Config& cfg, std::optional<std::uint64_t> seed, std::ostream& out);

/// Columns p, n, sign_class.
int cmd_sign_map(const Config& cfg, std::ostream& out);

nlohmann::json verify_report_json(const verify::SuiteReport& report);
/// Exit 0 when every check passes, 1 otherwise.  Throws ConfigurationError for an unknown suite.
int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out);

/// Grid dump (x1..xn, kind, W, h, gap) to `grid` when given; summary JSON to `summary`.
/// Exit 1 when the summary records violations.
int cmd_compare(const Config& cfg, std::optional<std::uint64_t> seed, std::ostream* grid,
                std::ostream& summary);

/// Barenblatt: radius, b_t, defect, sign at fixed (a, t).
/// Homogeneous: t, w_t, defect, sign of the two-bump defect at the origin.
int cmd_evolution_sweep(const Config& cfg, std::ostream& out);

/// Full command line: subcommands eval | sign-map | verify | compare |
/// evolution-sweep with --config, --out, --seed, --suite.  Output goes to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plap::cli
