#pragma once

// JSON experiment configuration for the command-line front end.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plap/comparison.hpp"
#include "plap/concave.hpp"
#include "plap/evolution.hpp"
#include "plap/sampling.hpp"
#include "plap/superpose.hpp"

namespace plap::cli {

/// Published schemas, embedded at build time.
const nlohmann::json& config_schema();
const nlohmann::json& verify_report_schema();
const nlohmann::json& compare_summary_schema();

struct SchemaViolation {
  std::string pointer;  ///< JSON pointer of the offending value, "" for the root
  std::string message;
};

/// Validates against the schema keywords used by the published schemas:
/// type, const, enum, properties, required, additionalProperties, items,
/// minItems, minimum, exclusiveMinimum.  Other keywords are a logic error.
std::vector<SchemaViolation> validate(const nlohmann::json& schema, const nlohmann::json& doc);

struct SignMapSpec {
  double p_min = 0.2;
  double p_max = 4.0;
  /// p runs over m / p_resolution for integer m.
  int p_resolution = 20;
  int n_min = 1;
  int n_max = 6;
};

struct SweepSpec {
  int count = 0;
  double a = 2.0;
  double t = 1.0;
  std::optional<double> radius_min;
  std::optional<double> radius_max;
  std::optional<Vector> y;
  double t_min = 0.1;
  double t_max = 10.0;
};

/// A schema-validated configuration.  Every error is a ConfigurationError
/// of the form "<source>:<line>: <pointer>: <message>".
class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::string& path);
  /// Configuration with only a schema_version, for commands whose blocks are optional.
  static Config empty();

  const nlohmann::json& json() const noexcept { return doc_; }
  bool has(const std::string& key) const { return doc_.contains(key); }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

  /// Command-line seed first, then the "seed" key, then the default.
  std::uint64_t seed(std::optional<std::uint64_t> cli_seed) const;

  Params params() const;
  /// Explicit "poles", or "random_poles" drawn from rng.
  PoleSet poles(const Params& params, Rng& rng) const;
  ConcaveTerm concave(int n) const;
  /// Explicit "points", or "random_points" drawn away from the poles.
  std::vector<Vector> points(const PoleSet& ps, Rng& rng) const;
  double fd_step() const;
  GridDomain grid(int n) const;
  ComparisonOptions comparison_options() const;
  EvolutionKernel kernel() const;
  SweepSpec sweep() const;
  SignMapSpec sign_map() const;

 private:
  Config() = default;
  void require(const std::string& key) const;
  Vector vector_at(const std::string& pointer, int n) const;
  int line_of(std::string pointer) const;

  nlohmann::json doc_;
  std::string source_;
  std::map<std::string, int> lines_;
};

}  // namespace plap::cli
