#pragma once

// Finite-difference and bracketing oracles.  Everything here works from
// function values alone, so it stays independent of the analytic
// derivative code it is used to check.

#include <cmath>
#include <functional>
#include <optional>

#include "plap/core.hpp"
#include "plap/superpose.hpp"

namespace plap::oracle {

using ScalarField = std::function<double(const Vector&)>;

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector a = x;
    Vector b = x;
    a[k] += h;
    b[k] -= h;
    g[k] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Nested central differences of values.
inline Matrix fd_hessian(const ScalarField& f, const Vector& x, double h) {
  const auto n = x.size();
  Matrix hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Vector pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

/// div(|grad f|^{p-2} grad f) with the gradient itself taken by central
/// differences of values: a pure-value divergence-of-flux stencil.
inline double fd_p_laplacian(const ScalarField& f, const Vector& x, double p, double h) {
  auto flux = [&](const Vector& z, Eigen::Index axis) {
    const Vector g = fd_gradient(f, z, h);
    const double gn = g.norm();
    if (gn == 0.0) return 0.0;
    return std::pow(gn, p - 2.0) * g[axis];
  };
  double div = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector a = x;
    Vector b = x;
    a[k] += h;
    b[k] -= h;
    div += (flux(a, k) - flux(b, k)) / (2.0 * h);
  }
  return div;
}

/// Bisection for a sign change of f on [lo, hi]; nullopt when f(lo), f(hi)
/// do not have opposite signs.
inline std::optional<double> bisect_sign_change(const std::function<double(double)>& f, double lo,
                                                double hi, double rel_tol = 1e-12) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo * fhi < 0.0)) return std::nullopt;
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::abs(hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Natural magnitude of the terms combined by Delta_p of a pure
/// superposition at x: |grad V|^{p-2} (|p-2|+1) sum_i a_i (|v_i''| + (n-1)|v_i'|/r_i).
/// Used as the rounding floor of relative comparisons.
inline double operator_scale(const PoleSet& ps, const Vector& x, const Vector& gradient) {
  const Params& params = ps.params();
  double sum = 0.0;
  for (const auto& pole : ps.poles()) {
    const RadialProfile prof = fundamental_profile(params, (x - pole.location).norm());
    sum += pole.weight * (std::abs(prof.ddv) + (params.n() - 1.0) * std::abs(prof.dv) / prof.r);
  }
  const double p = params.p();
  const double g = gradient.norm();
  const double gp = p == 2.0 ? 1.0 : std::pow(g, p - 2.0);
  return gp * (std::abs(p - 2.0) + 1.0) * sum;
}

/// Rounding floor of the direct-vs-closed comparison, as a fraction of operator_scale.
inline constexpr double kDirectFloor = 1e-4;
/// Truncation floor of the fd-vs-closed comparison, as a fraction of operator_scale.
/// Central differences leave an O(h^2) residue of ~1e-7 * scale where the
/// closed form vanishes identically (p = 2, one pole).
inline constexpr double kFdFloor = 1e-2;

/// |a - b| / max(|b|, floor).
inline double relative_error(double a, double b, double floor) {
  const double denom = std::max(std::abs(b), floor);
  if (denom == 0.0) return a == b ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(a - b) / denom;
}

}  // namespace plap::oracle
