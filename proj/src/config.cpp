#include "plap/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "plap/error.hpp"
#include "plap/verify.hpp"
#include "plap/schemas_generated.hpp"

namespace plap::cli {

using nlohmann::json;

const json& config_schema() {
  static const json s = json::parse(embedded::kConfigSchema);
  return s;
}

const json& verify_report_schema() {
  static const json s = json::parse(embedded::kVerifyReportSchema);
  return s;
}

const json& compare_summary_schema() {
  static const json s = json::parse(embedded::kCompareSummarySchema);
  return s;
}

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

// ------------------------------------------------------------ schema checks

bool has_type(const std::string& type, const json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }
  throw std::logic_error("schema: unsupported type '" + type + "'");
}

void check(const json& schema, const json& v, const std::string& ptr, std::vector<SchemaViolation>& out) {
  if (auto it = schema.find("type"); it != schema.end()) {
    std::vector<std::string> types;
    if (it->is_array()) {
      for (const auto& t : *it) types.push_back(t.get<std::string>());
    } else {
      types.push_back(it->get<std::string>());
    }
    if (std::none_of(types.begin(), types.end(), [&](const std::string& t) { return has_type(t, v); })) {
      std::string want = types.front();
      for (std::size_t i = 1; i < types.size(); ++i) want += " or " + types[i];
      out.push_back({ptr, "expected " + want + ", got " + v.dump()});
      return;
    }
  }
  for (const auto& [keyword, arg] : schema.items()) {
    if (keyword == "type" || keyword == "$schema" || keyword == "$id" || keyword == "title" ||
        keyword == "description" || keyword == "properties") {
      continue;
    }
    if (keyword == "const") {
      if (v != arg) out.push_back({ptr, "must equal " + arg.dump()});
    } else if (keyword == "enum") {
      if (std::find(arg.begin(), arg.end(), v) == arg.end()) {
        out.push_back({ptr, "must be one of " + arg.dump() + ", got " + v.dump()});
      }
    } else if (keyword == "minimum") {
      if (v.is_number() && !(v.get<double>() >= arg.get<double>())) {
        out.push_back({ptr, "must be >= " + arg.dump()});
      }
    } else if (keyword == "exclusiveMinimum") {
      if (v.is_number() && !(v.get<double>() > arg.get<double>())) {
        out.push_back({ptr, "must be > " + arg.dump()});
      }
    } else if (keyword == "minItems") {
      if (v.is_array() && v.size() < arg.get<std::size_t>()) {
        out.push_back({ptr, "needs at least " + arg.dump() + " item(s)"});
      }
    } else if (keyword == "required") {
      if (!v.is_object()) continue;
      for (const auto& key : arg) {
        if (!v.contains(key.get<std::string>())) {
          out.push_back({ptr, "missing required key '" + key.get<std::string>() + "'"});
        }
      }
    } else if (keyword == "additionalProperties") {
      if (!v.is_object() || arg.get<bool>()) continue;
      const json& props = schema.contains("properties") ? schema["properties"] : json::object();
      for (const auto& [key, _] : v.items()) {
        if (!props.contains(key)) out.push_back({ptr + "/" + escape_token(key), "unknown key '" + key + "'"});
      }
    } else if (keyword == "items") {
      if (!v.is_array()) continue;
      for (std::size_t i = 0; i < v.size(); ++i) check(arg, v[i], ptr + "/" + std::to_string(i), out);
    } else {
      throw std::logic_error("schema: unsupported keyword '" + keyword + "'");
    }
  }
  if (auto it = schema.find("properties"); it != schema.end() && v.is_object()) {
    for (const auto& [key, sub] : it->items()) {
      if (v.contains(key)) check(sub, v[key], ptr + "/" + escape_token(key), out);
    }
  }
}

// ---------------------------------------------------------- source locations

// Input iterator that publishes how many bytes the parser has consumed.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator(const char* base, const char* pos, std::size_t* consumed)
      : base_(base), pos_(pos), consumed_(consumed) {}
  reference operator*() const { return *pos_; }
  CountingIterator& operator++() {
    ++pos_;
    *consumed_ = static_cast<std::size_t>(pos_ - base_);
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return pos_ == o.pos_; }
  bool operator!=(const CountingIterator& o) const { return pos_ != o.pos_; }

 private:
  const char* base_;
  const char* pos_;
  std::size_t* consumed_;
};

// Records the byte offset at which every JSON pointer first appears.
class LocationSax : public nlohmann::json_sax<json> {
 public:
  explicit LocationSax(const std::size_t* consumed) : consumed_(consumed) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    value();
    stack_.push_back({false, {}, -1});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = escape_token(k);
    mark(path());
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    value();
    stack_.push_back({true, {}, -1});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

  const std::map<std::string, std::size_t>& offsets() const { return offsets_; }

 private:
  struct Frame {
    bool array;
    std::string key;
    int index;
  };

  bool value() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
    mark(path());
    return true;
  }
  std::string path() const {
    std::string p;
    for (const auto& f : stack_) p += "/" + (f.array ? std::to_string(f.index) : f.key);
    return p;
  }
  void mark(const std::string& p) { offsets_.emplace(p, *consumed_); }

  const std::size_t* consumed_;
  std::vector<Frame> stack_;
  std::map<std::string, std::size_t> offsets_;
};

int line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::map<std::string, int> locate(std::string_view text) {
  std::size_t consumed = 0;
  LocationSax sax(&consumed);
  const char* b = text.data();
  json::sax_parse(CountingIterator(b, b, &consumed), CountingIterator(b, b + text.size(), &consumed), &sax);
  std::map<std::string, int> lines;
  for (const auto& [ptr, off] : sax.offsets()) lines[ptr] = line_at(text, off == 0 ? 0 : off - 1);
  return lines;
}

double number(const json& v) { return v.get<double>(); }

}  // namespace

std::vector<SchemaViolation> validate(const json& schema, const json& doc) {
  std::vector<SchemaViolation> out;
  check(schema, doc, "", out);
  return out;
}

// ------------------------------------------------------------------- Config

Config Config::parse(std::string_view text, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  try {
    cfg.doc_ = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    const int line = line_at(text, byte);
    const std::size_t line_start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    const std::size_t col = line_start == std::string_view::npos || byte == 0 ? byte + 1 : byte - line_start;
    std::string msg = e.what();
    if (const auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigurationError(fmt::format("{}:{}:{}: {}", cfg.source_, line, col, msg));
  }
  cfg.lines_ = locate(text);
  const auto violations = validate(config_schema(), cfg.doc_);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) {
      if (!msg.empty()) msg += '\n';
      msg += fmt::format("{}:{}: {}: {}", cfg.source_, cfg.line_of(v.pointer), v.pointer.empty() ? "/" : v.pointer,
                         v.message);
    }
    throw ConfigurationError(msg);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError(path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

Config Config::empty() { return parse(R"({"schema_version": 1})", "<defaults>"); }

int Config::line_of(std::string pointer) const {
  for (;;) {
    if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
    if (pointer.empty()) return 1;
    pointer.erase(pointer.rfind('/'));
  }
}

void Config::fail(const std::string& pointer, const std::string& message) const {
  throw ConfigurationError(
      fmt::format("{}:{}: {}: {}", source_, line_of(pointer), pointer.empty() ? "/" : pointer, message));
}

void Config::require(const std::string& key) const {
  if (!doc_.contains(key)) fail("", "missing required block '" + key + "' for this command");
}

Vector Config::vector_at(const std::string& pointer, int n) const {
  const nlohmann::json& arr = doc_.at(nlohmann::json::json_pointer(pointer));
  if (static_cast<int>(arr.size()) != n) {
    fail(pointer, fmt::format("expected {} coordinate(s), got {}", n, arr.size()));
  }
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = number(arr[static_cast<std::size_t>(i)]);
  return v;
}

std::uint64_t Config::seed(std::optional<std::uint64_t> cli_seed) const {
  if (cli_seed) return *cli_seed;
  if (doc_.contains("seed")) return doc_["seed"].get<std::uint64_t>();
  return verify::kDefaultSeed;
}

Params Config::params() const {
  require("params");
  const nlohmann::json& p = doc_["params"];
  try {
    return Params(number(p["p"]), p["n"].get<int>(), p.contains("c") ? number(p["c"]) : 1.0);
  } catch (const Error& e) {
    fail("/params", e.what());
  }
}

PoleSet Config::poles(const Params& params, Rng& rng) const {
  const bool explicit_poles = doc_.contains("poles");
  const bool random_poles = doc_.contains("random_poles");
  if (explicit_poles == random_poles) {
    fail(explicit_poles ? "/random_poles" : "", "give exactly one of 'poles' and 'random_poles'");
  }
  std::vector<Pole> poles;
  if (explicit_poles) {
    for (std::size_t i = 0; i < doc_["poles"].size(); ++i) {
      const std::string ptr = fmt::format("/poles/{}", i);
      poles.push_back({number(doc_["poles"][i]["weight"]), vector_at(ptr + "/location", params.n())});
    }
  } else {
    const nlohmann::json& r = doc_["random_poles"];
    const double wmin = r.value("weight_min", 0.2);
    const double wmax = r.value("weight_max", 2.0);
    if (wmin > wmax) fail("/random_poles/weight_min", "must not exceed weight_max");
    poles = rng.poles(r["count"].get<int>(), params.n(), r.value("box", 1.0), wmin, wmax);
  }
  try {
    return PoleSet(std::move(poles), params);
  } catch (const Error& e) {
    fail(explicit_poles ? "/poles" : "/random_poles", e.what());
  }
}

ConcaveTerm Config::concave(int n) const {
  if (!doc_.contains("concave")) return ConcaveTerm::zero();
  const nlohmann::json& c = doc_["concave"];
  const std::string type = c["type"].get<std::string>();
  const auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (c.contains(k)) fail(std::string("/concave/") + k, "key does not apply to type '" + type + "'");
    }
  };
  try {
    ConcaveTerm k;
    if (type == "zero") {
      reject({"a", "b", "c0", "pieces"});
      k = ConcaveTerm::zero();
    } else if (type == "quadratic") {
      reject({"pieces"});
      if (!c.contains("a")) fail("/concave", "missing required key 'a'");
      const nlohmann::json& a = c["a"];
      if (static_cast<int>(a.size()) != n) fail("/concave/a", fmt::format("expected {} row(s)", n));
      Matrix m(n, n);
      for (int i = 0; i < n; ++i) {
        const Vector row = vector_at(fmt::format("/concave/a/{}", i), n);
        m.row(i) = row.transpose();
      }
      const Vector b = c.contains("b") ? vector_at("/concave/b", n) : Vector::Zero(n);
      k = ConcaveTerm::quadratic(m, b, c.value("c0", 0.0));
    } else {
      reject({"a", "b", "c0"});
      if (!c.contains("pieces")) fail("/concave", "missing required key 'pieces'");
      std::vector<ConcaveTerm::AffinePiece> pieces;
      for (std::size_t i = 0; i < c["pieces"].size(); ++i) {
        pieces.push_back({vector_at(fmt::format("/concave/pieces/{}/slope", i), n),
                          number(c["pieces"][i]["offset"])});
      }
      k = ConcaveTerm::affine_min(std::move(pieces));
    }
    if (c.contains("mollify_delta")) k = ConcaveTerm::mollified(std::move(k), number(c["mollify_delta"]));
    return k;
  } catch (const ConfigurationError&) {
    throw;
  } catch (const Error& e) {
    fail("/concave", e.what());
  }
}

std::vector<Vector> Config::points(const PoleSet& ps, Rng& rng) const {
  const bool explicit_points = doc_.contains("points");
  const bool random_points = doc_.contains("random_points");
  if (explicit_points == random_points) {
    fail(explicit_points ? "/random_points" : "", "give exactly one of 'points' and 'random_points'");
  }
  std::vector<Vector> out;
  if (explicit_points) {
    for (std::size_t i = 0; i < doc_["points"].size(); ++i) {
      out.push_back(vector_at(fmt::format("/points/{}", i), ps.dim()));
    }
  } else {
    const nlohmann::json& r = doc_["random_points"];
    const int count = r["count"].get<int>();
    const double box = r.value("box", 1.5);
    const double min_dist = r.value("min_pole_distance", 0.1);
    if (min_dist >= box) fail("/random_points/min_pole_distance", "must be smaller than box");
    for (int i = 0; i < count; ++i) out.push_back(rng.away_from(ps, box, min_dist));
  }
  return out;
}

double Config::fd_step() const { return doc_.contains("fd_step") ? number(doc_["fd_step"]) : kDefaultFdStep; }

GridDomain Config::grid(int n) const {
  require("grid");
  const nlohmann::json& g = doc_["grid"];
  if (static_cast<int>(g["nodes"].size()) != n) {
    fail("/grid/nodes", fmt::format("expected {} entries", n));
  }
  std::vector<int> nodes;
  for (const auto& v : g["nodes"]) nodes.push_back(v.get<int>());
  try {
    return GridDomain(vector_at("/grid/lower", n), vector_at("/grid/upper", n), std::move(nodes));
  } catch (const ConfigurationError&) {
    throw;
  } catch (const Error& e) {
    fail("/grid", e.what());
  }
}

ComparisonOptions Config::comparison_options() const {
  ComparisonOptions opts;
  if (doc_.contains("solver")) {
    const nlohmann::json& s = doc_["solver"];
    opts.solver.reg_eps = s.value("reg_eps", opts.solver.reg_eps);
    opts.solver.tol = s.value("tol", opts.solver.tol);
    opts.solver.max_iterations = s.value("max_iterations", opts.solver.max_iterations);
  }
  opts.boundary_shift = doc_.value("boundary_shift", 0.0);
  opts.comparison_tol = doc_.value("comparison_tol", kComparisonTol);
  return opts;
}

EvolutionKernel Config::kernel() const {
  require("kernel");
  const nlohmann::json& k = doc_["kernel"];
  const KernelKind kind = k["kind"] == "barenblatt" ? KernelKind::Barenblatt : KernelKind::Homogeneous;
  try {
    return EvolutionKernel(kind, number(k["p"]), k["n"].get<int>(), k.value("C", 1.0), k.value("c", 1.0));
  } catch (const Error& e) {
    fail("/kernel", e.what());
  }
}

SweepSpec Config::sweep() const {
  require("sweep");
  const nlohmann::json& s = doc_["sweep"];
  SweepSpec out;
  out.count = s["count"].get<int>();
  out.a = s.value("a", out.a);
  out.t = s.value("t", out.t);
  if (s.contains("radius_min")) out.radius_min = number(s["radius_min"]);
  if (s.contains("radius_max")) out.radius_max = number(s["radius_max"]);
  if (s.contains("y")) {
    Vector y(static_cast<int>(s["y"].size()));
    for (int i = 0; i < y.size(); ++i) y[i] = number(s["y"][static_cast<std::size_t>(i)]);
    out.y = y;
  }
  out.t_min = s.value("t_min", out.t_min);
  out.t_max = s.value("t_max", out.t_max);
  if (out.radius_min && out.radius_max && *out.radius_min > *out.radius_max) {
    fail("/sweep/radius_min", "must not exceed radius_max");
  }
  if (out.t_min > out.t_max) fail("/sweep/t_min", "must not exceed t_max");
  return out;
}

SignMapSpec Config::sign_map() const {
  SignMapSpec out;
  if (!doc_.contains("sign_map")) return out;
  const nlohmann::json& s = doc_["sign_map"];
  out.p_min = s.value("p_min", out.p_min);
  out.p_max = s.value("p_max", out.p_max);
  out.p_resolution = s.value("p_resolution", out.p_resolution);
  out.n_min = s.value("n_min", out.n_min);
  out.n_max = s.value("n_max", out.n_max);
  if (out.p_min > out.p_max) fail("/sign_map/p_min", "must not exceed p_max");
  if (out.n_min > out.n_max) fail("/sign_map/n_min", "must not exceed n_max");
  return out;
}

}  // namespace plap::cli
