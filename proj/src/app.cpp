#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "plap/commands.hpp"
#include "plap/error.hpp"

namespace plap::cli {

namespace {

// Logs go to stderr so that stdout stays machine-readable.  PLAP_LOG takes
// any spdlog level name (trace, debug, info, warn, error, critical, off).
void configure_logging(std::ostream& err) {
  auto logger = spdlog::get("plap");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("plap");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("PLAP_LOG"); env != nullptr && *env != '\0') {
    const std::string name(env);
    level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      err << "plap: ignoring unknown PLAP_LOG level '" << name << "'\n";
      level = spdlog::level::warn;
    }
  }
  spdlog::set_level(level);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigurationError(path + ": cannot open output file");
  f << text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging(err);

  CLI::App app{"Numerical checks for superpositions of p-Laplace fundamental solutions", "plap"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string suite = "all";

  const auto with_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
    if (required) opt->required();
    sub->add_option("--out", out_path, "output file (default: standard output)");
  };
  const auto with_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "64-bit seed for randomized inputs");
  };

  auto* eval = app.add_subcommand("eval", "evaluate V, |grad V| and three routes to the p-Laplacian as CSV");
  with_config(eval, true);
  with_seed(eval);
  auto* sign_map = app.add_subcommand("sign-map", "sign class of the p-Laplacian over a (p, n) grid as CSV");
  with_config(sign_map, false);
  auto* verify = app.add_subcommand("verify", "run randomized invariant suites and print a JSON report");
  verify->add_option("--suite", suite, "superpose, concave, comparison, evolution or all");
  verify->add_option("--out", out_path, "output file (default: standard output)");
  verify->add_option("--seed", seed, "64-bit seed")->default_str(std::to_string(verify::kDefaultSeed));
  auto* compare = app.add_subcommand("compare", "solve for the p-harmonic comparison function on a grid");
  compare->add_option("--config", config_path, "JSON configuration file")->required();
  compare->add_option("--out", out_path, "grid CSV file (summary JSON goes to standard output)");
  with_seed(compare);
  auto* sweep = app.add_subcommand("evolution-sweep", "defect sign tables for the evolution kernels as CSV");
  with_config(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::ostringstream buf;
    int code = kExitOk;
    if (eval->parsed()) {
      code = cmd_eval(Config::load(config_path), seed, buf);
    } else if (sign_map->parsed()) {
      code = cmd_sign_map(config_path.empty() ? Config::empty() : Config::load(config_path), buf);
    } else if (verify->parsed()) {
      code = cmd_verify(suite, seed.value_or(verify::kDefaultSeed), buf);
    } else if (compare->parsed()) {
      std::ostringstream summary;
      code = cmd_compare(Config::load(config_path), seed, out_path.empty() ? nullptr : &buf, summary);
      if (!out_path.empty()) emit(buf.str(), out_path, out);
      out << summary.str();
      return code;
    } else {
      code = cmd_evolution_sweep(Config::load(config_path), buf);
    }
    emit(buf.str(), out_path, out);
    return code;
  } catch (const ConfigurationError& e) {
    err << "plap: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverFailure& e) {
    err << "plap: solver failure: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "plap: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace plap::cli
