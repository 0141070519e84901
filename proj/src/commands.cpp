#include "plap/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "plap/error.hpp"

namespace plap::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// PLAP_THREADS, else the hardware concurrency.
std::size_t worker_count() {
  if (const char* env = std::getenv("PLAP_THREADS"); env != nullptr && *env != '\0') {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, count) on worker threads.  body must not throw.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min(count, worker_count());
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

std::string flag_of(const Error& e) {
  if (dynamic_cast<const PoleSingularityError*>(&e)) return "on_pole";
  if (dynamic_cast<const UndefinedOperatorError*>(&e)) return "undefined_operator";
  if (dynamic_cast<const KinkError*>(&e)) return "kink";
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
  if (dynamic_cast<const NonDifferentiablePointError*>(&e)) return "free_boundary";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "error";
}

std::string coordinate_header(int n) {
  std::string h;
  for (int i = 1; i <= n; ++i) h += fmt::format("x{},", i);
  return h;
}

std::string coordinates(const Vector& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += format_double(x[i]) + ",";
  return s;
}

Vector along(int n, double r) {
  Vector x = Vector::Zero(n);
  x[0] = r;
  return x;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

std::string sign_field(double v) { return std::isnan(v) ? "nan" : std::to_string(sign_of(v)); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

// --------------------------------------------------------------------- eval

int cmd_eval(const Config& cfg, std::optional<std::uint64_t> seed, std::ostream& out) {
  const Params params = cfg.params();
  Rng rng(cfg.seed(seed));
  const PoleSet ps = cfg.poles(params, rng);
  const ConcaveTerm k = cfg.concave(params.n());
  const std::vector<Vector> points = cfg.points(ps, rng);
  const double step = cfg.fd_step();

  struct Row {
    double value = kNaN;
    double grad = kNaN;
    double direct = kNaN;
    double closed = kNaN;
    double fd = kNaN;
    std::string flag;
  };
  std::vector<Row> rows(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    Row& r = rows[i];
    const Vector& x = points[i];
    bool low_confidence = false;
    const auto note = [&](const Error& e) {
      if (r.flag.empty()) r.flag = flag_of(e);
    };
    try {
      const EvalResult e = eval(ps, k, x);
      r.value = e.value;
      if (e.has_derivatives) {
        r.grad = e.gradient.norm();
        low_confidence = e.low_confidence;
        try {
          r.direct = delta_p_direct(e, ps);
        } catch (const Error& ex) {
          note(ex);
        }
        if (k.is_zero()) {
          try {
            r.closed = delta_p_closed_form(e, ps);
          } catch (const Error& ex) {
            note(ex);
          }
        }
      } else {
        r.flag = "on_pole";
      }
    } catch (const Error& ex) {
      note(ex);
    }
    try {
      r.fd = delta_p_fd(ps, k, x, step);
    } catch (const DomainError&) {
      if (r.flag.empty()) r.flag = "near_pole";
    } catch (const Error& ex) {
      note(ex);
    }
    if (r.flag.empty()) r.flag = low_confidence ? "low_confidence" : "ok";
  });

  out << coordinate_header(params.n()) << "value,grad_norm,delta_p_direct,delta_p_closed_form,delta_p_fd,flag\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    out << coordinates(points[i]) << format_double(r.value) << ',' << format_double(r.grad) << ','
        << format_double(r.direct) << ',' << format_double(r.closed) << ',' << format_double(r.fd) << ','
        << r.flag << '\n';
  }
  spdlog::info("eval: {} point(s), {} pole(s), p = {}, n = {}", points.size(), ps.size(), params.p(),
               params.n());
  return kExitOk;
}

// ----------------------------------------------------------------- sign-map

int cmd_sign_map(const Config& cfg, std::ostream& out) {
  const SignMapSpec spec = cfg.sign_map();
  const double res = spec.p_resolution;
  const auto m_lo = static_cast<long>(std::ceil(spec.p_min * res - 1e-9));
  const auto m_hi = static_cast<long>(std::floor(spec.p_max * res + 1e-9));
  out << "p,n,sign_class\n";
  for (long m = m_lo; m <= m_hi; ++m) {
    const double p = static_cast<double>(m) / res;
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      out << format_double(p) << ',' << n << ',' << to_string(sign_region(p, n)) << '\n';
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------- verify

json verify_report_json(const verify::SuiteReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst", std::isfinite(c.worst) ? json(c.worst) : json(nullptr)},
                      {"tol", c.tol},
                      {"samples", c.samples}});
  }
  return {{"schema_version", 1},
          {"suite", report.suite},
          {"seed", report.seed},
          {"passed", report.passed()},
          {"checks", std::move(checks)}};
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  const verify::SuiteReport report = verify::run_suite(suite, seed);
  out << verify_report_json(report).dump(2) << '\n';
  return report.passed() ? kExitOk : kExitFailed;
}

// ------------------------------------------------------------------ compare

int cmd_compare(const Config& cfg, std::optional<std::uint64_t> seed, std::ostream* grid,
                std::ostream& summary) {
  const Params params = cfg.params();
  Rng rng(cfg.seed(seed));
  const PoleSet ps = cfg.poles(params, rng);
  const ConcaveTerm k = cfg.concave(params.n());
  const GridDomain dom = cfg.grid(params.n());
  const ComparisonOptions opts = cfg.comparison_options();
  const ComparisonReport rep = comparison_check(ps, k, dom, opts);

  if (grid != nullptr) {
    const double ball = opts.excision_factor * dom.max_spacing();
    *grid << coordinate_header(dom.dim()) << "kind,W,h,gap\n";
    for (std::size_t i = 0; i < dom.size(); ++i) {
      const Vector x = dom.coordinates(i);
      std::string kind = "interior";
      if (dom.is_boundary(i)) {
        kind = "boundary";
      } else if (std::any_of(ps.poles().begin(), ps.poles().end(),
                             [&](const Pole& pole) { return (x - pole.location).norm() < ball; })) {
        kind = "excised";
      }
      const double w = rep.w.values[i];
      const double h = rep.h.solution.values[i];
      *grid << coordinates(x) << kind << ',' << format_double(w) << ',' << format_double(h) << ','
            << format_double(w - h) << '\n';
    }
  }

  const json s = {{"schema_version", 1},
                  {"p", params.p()},
                  {"n", params.n()},
                  {"poles", ps.size()},
                  {"nodes", dom.nodes()},
                  {"min_gap", rep.min_gap},
                  {"violations", rep.violations},
                  {"comparison_tol", opts.comparison_tol},
                  {"boundary_shift", opts.boundary_shift},
                  {"interior_nodes", rep.interior_nodes},
                  {"excised_nodes", rep.excised_nodes},
                  {"excision_ok", rep.excision_ok},
                  {"solver",
                   {{"iterations", rep.h.iterations},
                    {"residual", rep.h.residual},
                    {"final_energy", rep.h.energies.empty() ? 0.0 : rep.h.energies.back()}}}};
  summary << s.dump(2) << '\n';
  spdlog::info("compare: min gap {:.6e}, {} violation(s)", rep.min_gap, rep.violations);
  return rep.violations == 0 ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------- evolution-sweep

int cmd_evolution_sweep(const Config& cfg, std::ostream& out) {
  const EvolutionKernel k = cfg.kernel();
  const SweepSpec spec = cfg.sweep();
  const bool barenblatt = k.kind() == KernelKind::Barenblatt;
  const json& raw = cfg.json()["sweep"];
  const std::vector<std::string> foreign =
      barenblatt ? std::vector<std::string>{"y", "t_min", "t_max"}
                 : std::vector<std::string>{"a", "t", "radius_min", "radius_max"};
  for (const std::string& key : foreign) {
    if (raw.contains(key)) {
      cfg.fail("/sweep/" + key, fmt::format("key does not apply to a {} kernel", to_string(k.kind())));
    }
  }
  const int n = k.n();
  const auto count = static_cast<std::size_t>(spec.count);

  struct Row {
    double arg = kNaN;
    double rate = kNaN;
    double defect = kNaN;
    std::string flag = "ok";
  };
  std::vector<Row> rows(count);

  if (barenblatt) {
    const double support = k.support_radius(spec.t);
    const double lo = spec.radius_min.value_or(0.02 * support);
    const double hi = spec.radius_max.value_or(0.98 * support);
    if (lo > hi) cfg.fail("/sweep", "radius range is empty");
    spdlog::info("evolution-sweep: support radius {:.6e}, sign-change radius {:.6e}", support,
                 sign_change_radius(k, spec.t));
    parallel_for(count, [&](std::size_t i) {
      Row& r = rows[i];
      r.arg = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
      const Vector x = along(n, r.arg);
      try {
        r.rate = kernel_time_derivative(k, x, spec.t);
        r.defect = barenblatt_defect(k, spec.a, x, spec.t).value;
      } catch (const Error& e) {
        r.flag = flag_of(e);
      }
    });
    out << "radius,b_t,defect,sign,flag\n";
  } else {
    if (!spec.y) cfg.fail("/sweep", "missing required key 'y' for a homogeneous kernel");
    if (spec.y->size() != n) cfg.fail("/sweep/y", fmt::format("expected {} coordinate(s)", n));
    const Vector y = *spec.y;
    try {
      spdlog::info("evolution-sweep: two-bump sign change at t = {:.6e}", homogeneous_sign_change_time(k, y));
    } catch (const Error& e) {
      cfg.fail("/sweep/y", e.what());
    }
    const double ratio = count == 1 ? 1.0 : std::pow(spec.t_max / spec.t_min, 1.0 / static_cast<double>(count - 1));
    parallel_for(count, [&](std::size_t i) {
      Row& r = rows[i];
      r.arg = i + 1 == count && count > 1 ? spec.t_max : spec.t_min * std::pow(ratio, static_cast<double>(i));
      try {
        r.rate = kernel_time_derivative(k, y, r.arg);
        r.defect = two_bump_defect(k, y, r.arg);
      } catch (const Error& e) {
        r.flag = flag_of(e);
      }
    });
    out << "t,w_t,defect,sign,flag\n";
  }
  for (const Row& r : rows) {
    out << format_double(r.arg) << ',' << format_double(r.rate) << ',' << format_double(r.defect) << ','
        << sign_field(r.defect) << ',' << r.flag << '\n';
  }
  return kExitOk;
}

}  // namespace plap::cli
