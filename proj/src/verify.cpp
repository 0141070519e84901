#include "plap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>

#include <spdlog/spdlog.h>

#include "plap/comparison.hpp"
#include "plap/concave.hpp"
#include "plap/error.hpp"
#include "plap/evolution.hpp"
#include "plap/oracle.hpp"
#include "plap/superpose.hpp"

namespace plap::verify {

namespace {

// Worst error accumulator.  A non-finite error always fails.
class Tally {
 public:
  Tally(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void add(double err) {
    ++samples_;
    if (!std::isfinite(err)) {
      finite_ = false;
      worst_ = std::numeric_limits<double>::infinity();
      return;
    }
    worst_ = std::max(worst_, err);
  }
  void fail() { forced_ = true; }

  CheckResult result() const {
    CheckResult r;
    r.name = name_;
    r.worst = worst_;
    r.tol = tol_;
    r.samples = samples_;
    r.passed = finite_ && !forced_ && samples_ > 0 && worst_ <= tol_;
    return r;
  }

 private:
  std::string name_;
  double tol_;
  double worst_ = 0.0;
  std::size_t samples_ = 0;
  bool finite_ = true;
  bool forced_ = false;
};

const ConcaveTerm& zero_term() {
  static const ConcaveTerm z = ConcaveTerm::zero();
  return z;
}

Matrix random_nsd(Rng& rng, int n) {
  Vector d = rng.vector(n, -3.0, 0.0);
  if (n > 1 && rng.integer(0, 1) == 1) d[0] = 0.0;
  const Matrix q = rng.orthogonal(n);
  return q * d.asDiagonal() * q.transpose();
}

Matrix random_symmetric(Rng& rng, int n, double lo, double hi) {
  const Matrix q = rng.orthogonal(n);
  return q * rng.vector(n, lo, hi).asDiagonal() * q.transpose();
}

template <typename T>
T pick(Rng& rng, std::initializer_list<T> values) {
  return values.begin()[rng.integer(0, static_cast<int>(values.size()) - 1)];
}

Vector along(int n, double r) {
  Vector x = Vector::Zero(n);
  x[0] = r;
  return x;
}

Vector at_radius(Rng& rng, int n, double r) {
  Vector x = rng.vector(n, -1, 1);
  while (x.norm() < 1e-3) x = rng.vector(n, -1, 1);
  return r * x.normalized();
}

GridDomain square(int nodes) {
  Vector lo(2);
  Vector hi(2);
  lo << -1.0, -1.0;
  hi << 1.0, 1.0;
  return GridDomain(lo, hi, {nodes, nodes});
}

double interior_error(const GridDomain& dom, const std::vector<double>& u,
                      const std::function<double(const Vector&)>& exact) {
  double worst = 0.0;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (dom.is_boundary(i)) continue;
    worst = std::max(worst, std::abs(u[i] - exact(dom.coordinates(i))));
  }
  return worst;
}

// 1..3 poles inside the square plus a random concave quadratic.
std::pair<PoleSet, ConcaveTerm> pole_quadratic_config(Rng& rng, double p) {
  PoleSet ps(rng.poles(rng.integer(1, 3), 2, 0.8), Params(p, 2));
  const Matrix q = rng.orthogonal(2);
  const Vector d = rng.vector(2, -1.0, 0.0);
  ConcaveTerm k = ConcaveTerm::quadratic(q * d.asDiagonal() * q.transpose(),
                                         rng.vector(2, -0.5, 0.5), rng.uniform(-1, 1));
  return {std::move(ps), std::move(k)};
}

GridFunction smooth_data(Rng& rng, const GridDomain& dom) {
  const double a = rng.uniform(-3, 3);
  const double b = rng.uniform(1, 6);
  return sample(dom, [&](const Vector& x) { return a * std::sin(b * x[0]) * std::cos(3 * x[1]) + x[0]; });
}

}  // namespace

bool SuiteReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"superpose", "concave", "comparison", "evolution",
                                              "all"};
  return names;
}

// ---------------------------------------------------------------- superpose

CheckResult check_profile_ode() {
  Tally t("profile_ode_residual", 1e-12);
  for (int n = 1; n <= 6; ++n) {
    for (double p : {2.0, 2.5, 3.0, static_cast<double>(n), 6.0}) {
      if (p == 1.0) continue;
      const Params params(p, n);
      for (double r = 1e-3; r < 1e3; r *= 1.3) {
        const RadialProfile prof = fundamental_profile(params, r);
        const double scale = std::abs(p - 1.0) * std::abs(prof.ddv) + (n - 1.0) * std::abs(prof.dv) / r;
        const double res = std::abs(profile_ode_residual(params, prof));
        t.add(scale == 0.0 ? res : res / scale);
      }
    }
  }
  return t.result();
}

CheckResult check_radial_derivatives(Rng& rng, int samples) {
  Tally t("radial_derivatives_fd", 1e-6);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 5);
    const Params params(rng.uniform(1.5, 6.0), n);
    const Vector x = rng.vector(n, -2, 2);
    const Vector y = rng.vector(n, -2, 2);
    if ((x - y).norm() < 0.2) continue;
    const auto v = [&](const Vector& z) { return fundamental_profile(params, (z - y).norm()).v; };
    const Vector g = radial_gradient(params, x, y);
    t.add((g - oracle::fd_gradient(v, x, 1e-5)).norm() / g.norm());
    // The nested Hessian stencil is O(h^2) with a rounding floor near 1e-8;
    // compare on a 1e-4 absolute-plus-relative scale like the unit tests.
    const Matrix h = radial_hessian(params, x, y);
    const Matrix fd = oracle::fd_hessian(v, x, 1e-4);
    t.add(1e-2 * (h - fd).cwiseAbs().maxCoeff() / std::max(1.0, h.cwiseAbs().maxCoeff()));
  }
  return t.result();
}

CheckResult check_rotation_equivariance(Rng& rng, int samples) {
  Tally t("rotation_equivariance", 1e-13);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(2, 5);
    const Params params(rng.uniform(2.0, 5.0), n);
    const Matrix q = rng.orthogonal(n);
    const Vector x = rng.vector(n, -1, 1);
    const Vector y = rng.vector(n, -1, 1);
    const Vector rhs = q * radial_gradient(params, x, y);
    t.add((radial_gradient(params, q * x, q * y) - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  return t.result();
}

std::pair<CheckResult, CheckResult> check_three_way(Rng& rng, int configs) {
  Tally direct("three_way_closed_vs_direct", 1e-10);
  Tally fd("three_way_closed_vs_fd", 1e-4);
  for (int i = 0; i < configs; ++i) {
    const double p = pick(rng, {2.0, 2.5, 3.0, 4.0});
    const int n = pick(rng, {2, 3, 5});
    const PoleSet ps(rng.poles(rng.integer(1, 8), n, 1.0), Params(p, n));
    const Vector x = rng.away_from(ps, 1.5, 0.3);
    const EvalResult e = eval(ps, zero_term(), x);
    const double closed = delta_p_closed_form(e, ps);
    const double scale = oracle::operator_scale(ps, x, e.gradient);
    direct.add(oracle::relative_error(delta_p_direct(e, ps), closed, oracle::kDirectFloor * scale));
    fd.add(oracle::relative_error(delta_p_fd(ps, zero_term(), x), closed, oracle::kFdFloor * scale));
  }
  return {direct.result(), fd.result()};
}

CheckResult check_sign_soundness(Rng& rng, int configs) {
  // worst = largest excursion into the forbidden half-line.
  Tally t("sign_soundness", 1e-12);
  for (int i = 0; i < configs; ++i) {
    const double p = pick(rng, {1.5, 2.0, 2.5, 3.0, 4.0, 0.5});
    const int n = pick(rng, {1, 2, 3, 5});
    const PoleSet ps(rng.poles(rng.integer(1, 6), n, 1.0), Params(p, n));
    const Vector x = rng.away_from(ps, 1.5, 0.3);
    double closed = 0.0;
    try {
      closed = delta_p_closed_form(ps, x);
    } catch (const UndefinedOperatorError&) {
      continue;
    }
    switch (sign_region(p, n)) {
      case SignClass::NonPositive:
        t.add(std::max(0.0, closed));
        break;
      case SignClass::NonNegative:
        t.add(std::max(0.0, -closed));
        break;
      case SignClass::IdenticallyZero:
        t.add(std::abs(closed) * 1e12);  // must be exactly zero
        break;
      case SignClass::Excluded:
        t.fail();
        break;
    }
  }
  return t.result();
}

CheckResult check_isometry(Rng& rng, int configs) {
  Tally t("isometry_equivariance", 1e-12);
  for (int i = 0; i < configs; ++i) {
    const double p = pick(rng, {2.0, 2.5, 3.0, 4.0});
    const int n = pick(rng, {2, 3, 5});
    const PoleSet ps(rng.poles(rng.integer(1, 8), n, 1.0), Params(p, n));
    const Vector x = rng.away_from(ps, 1.5, 0.3);
    const EvalResult e = eval(ps, zero_term(), x);
    const double closed = delta_p_closed_form(e, ps);
    const double scale = oracle::operator_scale(ps, x, e.gradient);
    const Matrix q = rng.orthogonal(n);
    const Vector shift = rng.vector(n, -3, 3);
    std::vector<Pole> moved;
    for (const auto& pole : ps.poles()) moved.push_back({pole.weight, q * pole.location + shift});
    const double closed_moved = delta_p_closed_form(PoleSet(moved, ps.params()), q * x + shift);
    t.add(oracle::relative_error(closed_moved, closed, oracle::kDirectFloor * scale));
  }
  return t.result();
}

CheckResult check_weight_scaling(Rng& rng, int configs) {
  Tally t("weight_scaling", 1e-11);
  for (int i = 0; i < configs; ++i) {
    const double p = pick(rng, {2.0, 2.5, 3.0, 4.0});
    const int n = pick(rng, {2, 3, 5});
    const PoleSet ps(rng.poles(rng.integer(1, 8), n, 1.0), Params(p, n));
    const Vector x = rng.away_from(ps, 1.5, 0.3);
    const EvalResult e = eval(ps, zero_term(), x);
    const double closed = delta_p_closed_form(e, ps);
    const double scale = oracle::operator_scale(ps, x, e.gradient);
    const double s = rng.uniform(0.1, 10.0);
    std::vector<Pole> scaled;
    for (const auto& pole : ps.poles()) scaled.push_back({s * pole.weight, pole.location});
    const double factor = std::pow(s, p - 1.0);
    t.add(oracle::relative_error(delta_p_closed_form(PoleSet(scaled, ps.params()), x), factor * closed,
                                 oracle::kDirectFloor * factor * scale));
  }
  return t.result();
}

CheckResult check_single_pole_nullity(Rng& rng, int samples) {
  Tally t("single_pole_nullity", 0.0);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 6);
    double p = rng.uniform(0.2, 6.0);
    if (p == 1.0) p = 1.5;
    const PoleSet ps({{rng.uniform(0.1, 3.0), rng.vector(n, -1, 1)}}, Params(p, n));
    const Vector x = rng.away_from(ps, 2.0, 0.1);
    // For p < 2 the gradient can underflow (p just below 1, large n); the
    // operator is undefined there and the sample is skipped.
    try {
      t.add(std::abs(delta_p_closed_form(ps, x)));
    } catch (const UndefinedOperatorError&) {
    }
  }
  return t.result();
}

CheckResult check_sign_map() {
  Tally t("sign_map", 0.0);
  for (int m = 4; m <= 80; ++m) {
    if (m == 20) continue;  // p = 1 is excluded from the map
    const double p = m / 20.0;
    for (int n = 1; n <= 6; ++n) {
      const SignClass got = sign_region(p, n);
      SignClass want;
      if (m == 40 || n == 1 || m + 20 * n == 40) {
        want = SignClass::IdenticallyZero;
      } else {
        const double factor = -(p - 2.0) * (p + n - 2.0) / (p - 1.0);
        want = factor < 0.0 ? SignClass::NonPositive : SignClass::NonNegative;
      }
      t.add(got == want ? 0.0 : 1.0);
    }
  }
  if (sign_region(1.0, 3) != SignClass::Excluded) t.fail();
  return t.result();
}

// ------------------------------------------------------------------ concave

CheckResult check_concavity_criterion(Rng& rng, int samples) {
  // worst = largest criterion sum of a negative semidefinite matrix.
  Tally t("concavity_implies_criterion", kCriterionSlack);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 6);
    const double p = rng.uniform(2.0 + 1e-6, 10.0);
    const Matrix h = random_nsd(rng, n);
    t.add(std::max(0.0, criterion_sum(h, p)));
    if (!eigenvalue_criterion(h, p)) t.fail();
  }
  return t.result();
}

CheckResult check_criterion_sign(Rng& rng, int samples) {
  Tally t("criterion_implies_sign", 1e-12);
  int accepted = 0;
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 5);
    const double p = rng.uniform(2.1, 8.0);
    const Matrix h = random_symmetric(rng, n, -3.0, 1.5);
    if (!eigenvalue_criterion(h, p)) continue;
    ++accepted;
    const ConcaveTerm k = ConcaveTerm::quadratic(h, Vector::Zero(n));
    Vector xi = rng.vector(n, -1, 1);
    if (xi.norm() < 1e-3) continue;
    t.add(std::max(0.0, operator_term(k, p, xi, Vector::Zero(n))));
  }
  if (accepted == 0) t.fail();
  return t.result();
}

CheckResult check_concave_addition(Rng& rng, int pairs, int points_per_pair) {
  Tally t("concave_addition_direct", 1e-10);
  for (int i = 0; i < pairs; ++i) {
    const int n = rng.integer(1, 4);
    const double p = rng.uniform(2.1, 6.0);
    const PoleSet ps(rng.poles(rng.integer(1, 4), n, 1.0), Params(p, n));
    const ConcaveTerm k = ConcaveTerm::quadratic(random_nsd(rng, n), rng.vector(n, -1, 1), rng.uniform(-1, 1));
    for (int j = 0; j < points_per_pair; ++j) {
      const Vector x = rng.away_from(ps, 1.5, 0.3);
      t.add(std::max(0.0, delta_p_direct(ps, k, x)));
    }
  }
  return t.result();
}

CheckResult check_counterexample(Rng& rng, const std::vector<std::pair<double, int>>& cases,
                                 int directions) {
  Tally t("counterexample_criterion", 1e-12);
  for (const auto& [p, n] : cases) {
    const Matrix a = non_concave_counterexample(p, n);
    if (is_negative_semidefinite(a)) t.fail();
    if (!eigenvalue_criterion(a, p)) t.fail();
    t.add(std::abs(criterion_sum(a, p)));
    const ConcaveTerm k = ConcaveTerm::quadratic(a, Vector::Zero(n));
    if (k.concave()) t.fail();
    for (int i = 0; i < directions; ++i) {
      Vector xi = rng.vector(n, -1, 1);
      while (xi.norm() < 1e-6) xi = rng.vector(n, -1, 1);
      t.add(std::max(0.0, operator_term(k, p, xi, rng.vector(n, -1, 1))));
    }
  }
  return t.result();
}

CheckResult check_mollifier_convergence(Rng& rng) {
  // worst = largest ratio of consecutive sup-norm errors as delta halves.
  Tally t("mollifier_convergence", 0.75);
  std::vector<ConcaveTerm> bases;
  std::vector<ConcaveTerm::AffinePiece> pieces;
  for (int j = 0; j < 4; ++j) pieces.push_back({rng.vector(2, -2, 2), rng.uniform(-0.5, 0.5)});
  bases.push_back(ConcaveTerm::affine_min(std::move(pieces)));
  bases.push_back(ConcaveTerm::quadratic(random_nsd(rng, 2), rng.vector(2, -1, 1)));
  for (const ConcaveTerm& base : bases) {
    double prev = 0.0;
    for (double delta : {0.4, 0.2, 0.1, 0.05}) {
      const ConcaveTerm k = ConcaveTerm::mollified(base, delta);
      double sup = 0.0;
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
          Vector x(2);
          x << -1.0 + 0.1 * i, -1.0 + 0.1 * j;
          sup = std::max(sup, std::abs(concave_value(k, x) - concave_value(base, x)));
        }
      }
      if (prev > 0.0) t.add(sup / prev);
      prev = sup;
    }
  }
  return t.result();
}

CheckResult check_mollifier_nsd(Rng& rng, int samples) {
  // worst = largest eigenvalue relative to the Hessian norm.
  Tally t("mollified_hessian_nsd", 1e-12);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 3);
    const double delta = rng.uniform(0.05, 0.5);
    ConcaveTerm base;
    if (rng.integer(0, 1) == 0) {
      std::vector<ConcaveTerm::AffinePiece> pieces;
      const int count = rng.integer(2, 5);
      for (int j = 0; j < count; ++j) pieces.push_back({rng.vector(n, -2, 2), rng.uniform(-0.5, 0.5)});
      base = ConcaveTerm::affine_min(std::move(pieces));
    } else {
      base = ConcaveTerm::quadratic(random_nsd(rng, n), Vector::Zero(n));
    }
    const Matrix h = eval_concave(ConcaveTerm::mollified(base, delta), rng.vector(n, -1, 1)).hessian;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const double norm = h.norm();
    t.add(norm == 0.0 ? 0.0 : std::max(0.0, es.eigenvalues().maxCoeff()) / norm);
  }
  return t.result();
}

// --------------------------------------------------------------- comparison

CheckResult check_affine_reproduction() {
  Tally t("affine_reproduction", 1e-8);
  const GridDomain dom = square(17);
  const auto one_d = [](const Vector& x) { return 0.5 - 2.0 * x[0]; };
  const auto affine = [](const Vector& x) { return 0.3 + 1.5 * x[0] - 0.7 * x[1]; };
  for (double p : {2.0, 3.0, 4.0}) {
    t.add(interior_error(dom, solve_p_harmonic(dom, sample(dom, one_d), p).solution.values, one_d));
    t.add(interior_error(dom, solve_p_harmonic(dom, sample(dom, affine), p).solution.values, affine));
  }
  return t.result();
}

CheckResult check_harmonic_polynomial() {
  Tally t("harmonic_polynomial", 5e-3);
  const GridDomain dom = square(65);
  const auto exact = [](const Vector& x) { return x[0] * x[0] - x[1] * x[1]; };
  t.add(interior_error(dom, solve_p_harmonic(dom, sample(dom, exact), 2.0).solution.values, exact));
  return t.result();
}

CheckResult check_radial_solve() {
  Tally t("radial_profile_solve", 1e-2);
  Vector lo(2);
  Vector hi(2);
  lo << 0.5, -0.5;
  hi << 1.5, 0.5;
  const GridDomain dom(lo, hi, {33, 33});
  const auto exact = [](const Vector& x) { return -2.0 * std::sqrt(x.norm()); };
  t.add(interior_error(dom, solve_p_harmonic(dom, sample(dom, exact), 3.0).solution.values, exact));
  return t.result();
}

CheckResult check_maximum_principle(Rng& rng, int solves) {
  Tally t("discrete_maximum_principle", 1e-12);
  const GridDomain dom = square(17);
  for (int i = 0; i < solves; ++i) {
    const double p = pick(rng, {2.0, 2.5, 3.0, 4.0, 6.0});
    const GridFunction data = smooth_data(rng, dom);
    const SolveResult r = solve_p_harmonic(dom, data, p);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < dom.size(); ++j) {
      if (!dom.is_boundary(j)) continue;
      lo = std::min(lo, data.values[j]);
      hi = std::max(hi, data.values[j]);
    }
    double excess = 0.0;
    for (double v : r.solution.values) excess = std::max({excess, lo - v, v - hi});
    t.add(excess);
  }
  return t.result();
}

CheckResult check_energy_monotonicity(Rng& rng, int solves) {
  // worst = largest energy rise per accepted step, relative to the start.
  Tally t("energy_monotonicity", 64.0 * std::numeric_limits<double>::epsilon());
  const GridDomain dom = square(17);
  for (int i = 0; i < solves; ++i) {
    const double p = pick(rng, {2.0, 2.5, 3.0, 4.0, 6.0});
    const SolveResult r = solve_p_harmonic(dom, smooth_data(rng, dom), p);
    double rise = 0.0;
    for (std::size_t k = 1; k < r.energies.size(); ++k) {
      rise = std::max(rise, r.energies[k] - r.energies[k - 1]);
    }
    t.add(rise / r.energies.front());
  }
  return t.result();
}

CheckResult check_comparison(Rng& rng, const std::vector<double>& ps, int configs_per_p, int nodes) {
  // worst = max(0, -min(W - h)).
  Tally t("comparison_principle", kComparisonTol);
  const GridDomain dom = square(nodes);
  for (double p : ps) {
    for (int i = 0; i < configs_per_p; ++i) {
      const auto [poles, k] = pole_quadratic_config(rng, p);
      const ComparisonReport rep = comparison_check(poles, k, dom);
      t.add(std::max(0.0, -rep.min_gap));
      if (rep.violations != 0) t.fail();
    }
  }
  return t.result();
}

CheckResult check_shifted_comparison(Rng& rng, const std::vector<double>& ps, int configs_per_p,
                                     int nodes) {
  // worst = max(0, 1 - min(W - h)).
  Tally t("shifted_comparison", kComparisonTol);
  const GridDomain dom = square(nodes);
  ComparisonOptions opts;
  opts.boundary_shift = 1.0;
  for (double p : ps) {
    for (int i = 0; i < configs_per_p; ++i) {
      const auto [poles, k] = pole_quadratic_config(rng, p);
      t.add(std::max(0.0, 1.0 - comparison_check(poles, k, dom, opts).min_gap));
    }
  }
  return t.result();
}

CheckResult check_refinement() {
  // worst = largest ratio of successive |min gap| under halving; must be < 1.
  Tally t("grid_refinement", 0.75);
  Vector a(2);
  Vector b(2);
  a << 1.7, 0.4;
  b << -1.5, -1.2;
  for (double p : {2.5, 3.0, 4.0}) {
    const PoleSet ps({{1.0, a}, {0.5, b}}, Params(p, 2));
    double prev = 0.0;
    for (int nodes : {17, 33, 65}) {
      const double gap = std::abs(comparison_check(ps, zero_term(), square(nodes)).min_gap);
      if (prev > 0.0) t.add(gap / prev);
      prev = gap;
    }
  }
  return t.result();
}

// ---------------------------------------------------------------- evolution

CheckResult check_time_derivative(Rng& rng, int samples) {
  Tally t("time_derivative_fd", 1e-6);
  for (int i = 0; i < samples; ++i) {
    const double p = rng.uniform(2.2, 6.0);
    const int n = rng.integer(1, 4);
    const double time = rng.uniform(0.2, 5.0);
    const bool barenblatt = rng.integer(0, 1) == 0;
    const EvolutionKernel k(barenblatt ? KernelKind::Barenblatt : KernelKind::Homogeneous, p, n,
                            rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
    const double r = barenblatt ? rng.uniform(0.05, 0.9) * k.support_radius(time) : rng.uniform(0.05, 3.0);
    const Vector x = at_radius(rng, n, r);
    const double fd = oracle::central_difference([&](double s) { return kernel_value(k, x, s); }, time,
                                                 1e-6 * time);
    const double exact = kernel_time_derivative(k, x, time);
    // Floor near the sign change of the derivative.
    const double floor = 1e-3 * kernel_value(k, x, time) / time;
    t.add(std::abs(fd - exact) / std::max(std::abs(exact), floor));
  }
  return t.result();
}

CheckResult check_defect_identity(Rng& rng, const std::vector<double>& scales, int points) {
  Tally t("defect_identity", 1e-3);
  const EvolutionKernel k(KernelKind::Barenblatt, 3.0, 2);
  for (int i = 0; i < points; ++i) {
    const double a = scales[static_cast<std::size_t>(i) % scales.size()];
    const double time = rng.uniform(0.5, 3.0);
    const double radius = k.support_radius(time);
    const Vector x = at_radius(rng, 2, rng.uniform(0.15, 0.85) * radius);
    const double h = 1e-4 * (1.0 + x.norm());
    const auto ab = [&](const Vector& z) { return a * kernel_value(k, z, time); };
    const double lhs = oracle::fd_p_laplacian(ab, x, k.p(), h) -
                       oracle::central_difference([&](double s) { return a * kernel_value(k, x, s); },
                                                  time, 1e-6 * time);
    const DefectResult d = barenblatt_defect(k, a, x, time);
    const double bt = std::abs(kernel_time_derivative(k, x, time));
    const double floor = 1e-2 * (std::pow(a, k.p() - 1.0) + a) * bt;
    t.add(std::abs(lhs - d.value) / std::max(std::abs(d.value), floor));
  }
  return t.result();
}

CheckResult check_sign_change_radius(const std::vector<std::array<double, 4>>& cases) {
  Tally t("sign_change_bisection", 1e-2);
  for (const auto& [p, nd, c, time] : cases) {
    const int n = static_cast<int>(nd);
    const EvolutionKernel k(KernelKind::Barenblatt, p, n, c);
    const double r = sign_change_radius(k, time);
    const double support = k.support_radius(time);
    if (!(r < support)) {
      t.fail();
      continue;
    }
    const auto fd_bt = [&](double s) {
      return oracle::central_difference([&](double tt) { return kernel_value(k, along(n, s), tt); }, time,
                                        1e-6 * time);
    };
    const auto root = oracle::bisect_sign_change(fd_bt, 0.05 * r, 0.5 * (r + support), 1e-10);
    if (!root) {
      t.fail();
      continue;
    }
    t.add(std::abs(*root - r) / r);
  }
  return t.result();
}

CheckResult check_two_bump_symmetry(Rng& rng, int samples) {
  Tally t("two_bump_gradient_symmetry", 1e-14);
  for (int i = 0; i < samples; ++i) {
    const int n = rng.integer(1, 4);
    const EvolutionKernel k(KernelKind::Homogeneous, rng.uniform(2.1, 6.0), n, 1.0, rng.uniform(0.5, 2.0));
    Vector y = rng.vector(n, -2, 2);
    t.add(two_bump_gradient(k, y, Vector::Zero(n), rng.uniform(0.1, 10.0)).norm());
  }
  return t.result();
}

CheckResult check_two_bump_sign_change() {
  // worst = relative distance of the bisected sign change from the analytic time.
  Tally t("two_bump_sign_change", 1e-8);
  for (double p : {2.5, 3.0, 4.0}) {
    for (int n = 1; n <= 3; ++n) {
      const EvolutionKernel k(KernelKind::Homogeneous, p, n);
      const Vector y = along(n, 1.3);
      const double ts = homogeneous_sign_change_time(k, y);
      if (!(two_bump_defect(k, y, 0.5 * ts) > 0.0 && two_bump_defect(k, y, 2.0 * ts) < 0.0)) t.fail();
      const auto root = oracle::bisect_sign_change([&](double s) { return two_bump_defect(k, y, s); },
                                                   0.1 * ts, 10.0 * ts);
      if (!root) {
        t.fail();
        continue;
      }
      t.add(std::abs(*root - ts) / ts);
    }
  }
  return t.result();
}

CheckResult check_two_bump_fd() {
  Tally t("two_bump_fd_limit", 1e-3);
  for (double p : {2.5, 3.0, 4.0}) {
    for (int n = 1; n <= 3; ++n) {
      const EvolutionKernel k(KernelKind::Homogeneous, p, n);
      const Vector y = along(n, 0.9);
      for (double time : {0.3, 0.7, 2.0}) {
        const auto v = [&](const Vector& x, double s) { return kernel_value(k, x + y, s) + kernel_value(k, x - y, s); };
        // The FD operator at |x| = s with step s/4 behaves like L + A s^{p-2};
        // two radii eliminate A.
        const auto assembled = [&](double s) {
          Vector x = Vector::Zero(n);
          x[n - 1] = s;
          const double time_part = oracle::central_difference(
              [&](double tt) {
                const double vv = v(x, tt);
                return std::pow(std::abs(vv), p - 2.0) * vv;
              },
              time, 1e-6 * time);
          return time_part - oracle::fd_p_laplacian([&](const Vector& z) { return v(z, time); }, x, p, 0.25 * s);
        };
        const double s = 4e-3;
        const double ratio = std::pow(4.0, p - 2.0);
        const double limit = (ratio * assembled(s / 4.0) - assembled(s)) / (ratio - 1.0);
        const double expect = two_bump_defect(k, y, time);
        t.add(std::abs(limit - expect) / std::abs(expect));
      }
    }
  }
  return t.result();
}

CheckResult check_support_radius() {
  // worst = |bisected edge - formula| in units of the spatial FD step.
  Tally t("support_radius", 1.0);
  for (double p : {2.5, 3.0, 4.5}) {
    for (int n = 1; n <= 3; ++n) {
      for (double c : {0.5, 1.3}) {
        const EvolutionKernel k(KernelKind::Barenblatt, p, n, c);
        const double time = 1.7;
        const double r = k.support_radius(time);
        const double h = 1e-4 * (1.0 + r);
        double lo = 0.0;
        double hi = 2.0 * r;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          (kernel_value(k, along(n, mid), time) > 0.0 ? lo : hi) = mid;
        }
        t.add(std::abs(hi - r) / h);
      }
    }
  }
  return t.result();
}

// -------------------------------------------------------------------- suites

SuiteReport run_suite(const std::string& suite, std::uint64_t seed) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
    throw ConfigurationError("unknown suite '" + suite + "'");
  }
  SuiteReport report;
  report.suite = suite;
  report.seed = seed;
  const bool all = suite == "all";
  auto& out = report.checks;
  const auto record = [&](CheckResult r) {
    spdlog::info("{}: {} (worst {:.3e}, tol {:.1e}, {} samples)", r.name, r.passed ? "pass" : "FAIL",
                 r.worst, r.tol, r.samples);
    out.push_back(std::move(r));
  };
  // A check that throws is reported as failed instead of aborting the suite.
  const auto guarded = [&](const std::string& name, const std::function<CheckResult()>& check) {
    try {
      record(check());
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", name, e.what());
      CheckResult r;
      r.name = name;
      r.worst = std::numeric_limits<double>::infinity();
      record(std::move(r));
    }
  };

  if (all || suite == "superpose") {
    Rng rng(seed);
    guarded("profile_ode_residual", [&] { return check_profile_ode(); });
    guarded("radial_derivatives_fd", [&] { return check_radial_derivatives(rng, 50); });
    guarded("rotation_equivariance", [&] { return check_rotation_equivariance(rng, 50); });
    try {
      auto [direct, fd] = check_three_way(rng, 200);
      record(std::move(direct));
      record(std::move(fd));
    } catch (const std::exception& e) {
      spdlog::error("three_way: {}", e.what());
      for (const char* name : {"three_way_closed_vs_direct", "three_way_closed_vs_fd"}) {
        CheckResult r;
        r.name = name;
        r.worst = std::numeric_limits<double>::infinity();
        record(std::move(r));
      }
    }
    guarded("sign_soundness", [&] { return check_sign_soundness(rng, 200); });
    guarded("isometry_equivariance", [&] { return check_isometry(rng, 100); });
    guarded("weight_scaling", [&] { return check_weight_scaling(rng, 100); });
    guarded("single_pole_nullity", [&] { return check_single_pole_nullity(rng, 100); });
    guarded("sign_map", [&] { return check_sign_map(); });
  }
  if (all || suite == "concave") {
    Rng rng(seed + 1);
    guarded("concavity_implies_criterion", [&] { return check_concavity_criterion(rng, 500); });
    guarded("criterion_implies_sign", [&] { return check_criterion_sign(rng, 2000); });
    guarded("concave_addition_direct", [&] { return check_concave_addition(rng, 100, 5); });
    guarded("counterexample_criterion",
            [&] { return check_counterexample(rng, {{3.0, 2}, {3.0, 3}, {4.0, 5}}, 1000); });
    guarded("mollifier_convergence", [&] { return check_mollifier_convergence(rng); });
    guarded("mollified_hessian_nsd", [&] { return check_mollifier_nsd(rng, 200); });
  }
  if (all || suite == "comparison") {
    Rng rng(seed + 2);
    guarded("affine_reproduction", [&] { return check_affine_reproduction(); });
    guarded("harmonic_polynomial", [&] { return check_harmonic_polynomial(); });
    guarded("radial_profile_solve", [&] { return check_radial_solve(); });
    guarded("discrete_maximum_principle", [&] { return check_maximum_principle(rng, 10); });
    guarded("energy_monotonicity", [&] { return check_energy_monotonicity(rng, 10); });
    guarded("comparison_principle", [&] { return check_comparison(rng, {2.5, 3.0, 4.0}, 3, 33); });
    guarded("shifted_comparison", [&] { return check_shifted_comparison(rng, {2.5, 3.0}, 2, 33); });
    guarded("grid_refinement", [&] { return check_refinement(); });
  }
  if (all || suite == "evolution") {
    Rng rng(seed + 3);
    guarded("time_derivative_fd", [&] { return check_time_derivative(rng, 200); });
    guarded("defect_identity", [&] { return check_defect_identity(rng, {0.5, 2.0}, 60); });
    guarded("sign_change_bisection", [&] {
      return check_sign_change_radius(
          {{{3.0, 2.0, 1.0, 1.0}}, {{4.0, 3.0, 2.0, 0.5}}, {{2.5, 1.0, 0.5, 3.0}}, {{6.0, 3.0, 1.0, 2.0}}});
    });
    guarded("two_bump_gradient_symmetry", [&] { return check_two_bump_symmetry(rng, 200); });
    guarded("two_bump_sign_change", [&] { return check_two_bump_sign_change(); });
    guarded("two_bump_fd_limit", [&] { return check_two_bump_fd(); });
    guarded("support_radius", [&] { return check_support_radius(); });
  }
  return report;
}

}  // namespace plap::verify
