#include "plap/superpose.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "plap/error.hpp"

namespace plap {

PoleSet::PoleSet(std::vector<Pole> poles, Params params) : params_(params) {
  std::map<std::vector<double>, std::size_t> seen;
  for (auto& pole : poles) {
    if (pole.location.size() != params_.n()) {
      throw DomainError("PoleSet: pole location has dimension " +
                        std::to_string(pole.location.size()) + ", expected " +
                        std::to_string(params_.n()));
    }
    if (!std::isfinite(pole.weight) || pole.weight < 0.0) {
      throw DomainError("PoleSet: weights must be finite and non-negative");
    }
    if (!pole.location.allFinite()) {
      throw DomainError("PoleSet: pole locations must be finite");
    }
    if (pole.weight == 0.0) continue;
    std::vector<double> key(pole.location.data(), pole.location.data() + pole.location.size());
    auto [it, inserted] = seen.emplace(std::move(key), poles_.size());
    if (inserted) {
      poles_.push_back(std::move(pole));
    } else {
      poles_[it->second].weight += pole.weight;
    }
  }
  if (poles_.empty()) {
    throw DomainError("PoleSet: at least one pole must carry positive weight");
  }
}

PoleSet PoleSet::empty(Params params) { return PoleSet(params); }

double PoleSet::weight_scale() const noexcept {
  if (poles_.empty()) return params_.c();
  double total = 0.0;
  for (const auto& pole : poles_) total += pole.weight;
  return params_.c() * total;
}

double PoleSet::gradient_epsilon() const noexcept {
  return kGradientEpsilon * weight_scale();
}

const char* to_string(SignClass s) noexcept {
  switch (s) {
    case SignClass::NonPositive:
      return "NonPositive";
    case SignClass::IdenticallyZero:
      return "IdenticallyZero";
    case SignClass::NonNegative:
      return "NonNegative";
    case SignClass::Excluded:
      return "Excluded";
  }
  return "?";
}

namespace {

void check_point(const PoleSet& ps, const Vector& x) {
  if (x.size() != ps.dim()) {
    throw DomainError("evaluation point has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(ps.dim()));
  }
}

// Kernel is unbounded at its pole exactly when 1 < p < n.
bool infinite_at_pole_with_marker(const Params& params) {
  return params.p() > 1.0 && params.p() < params.n();
}

double gradient_power(double g, double p) {
  // |xi|^{p-2}; callers guarantee g > 0 or p >= 2.
  if (p == 2.0) return 1.0;
  return std::pow(g, p - 2.0);
}

}  // namespace

double superposition_value(const PoleSet& ps, const ConcaveTerm& k, const Vector& x) {
  check_point(ps, x);
  const Params& params = ps.params();
  double value = 0.0;
  bool infinite = false;
  for (const auto& pole : ps.poles()) {
    const double r = (x - pole.location).norm();
    if (r == 0.0) {
      if (params.logarithmic() || params.value_exponent() < 0.0) {
        infinite = true;
      }
      // A positive exponent leaves a zero contribution at the pole.
      continue;
    }
    value += pole.weight * fundamental_profile(params, r).v;
  }
  if (infinite) return std::numeric_limits<double>::infinity();
  return value + concave_value(k, x);
}

Vector superposition_gradient(const PoleSet& ps, const ConcaveTerm& k, const Vector& x) {
  check_point(ps, x);
  Vector g = Vector::Zero(ps.dim());
  for (const auto& pole : ps.poles()) {
    g += pole.weight * radial_gradient(ps.params(), x, pole.location);
  }
  if (!k.is_zero()) g += eval_concave(k, x).gradient;
  return g;
}

EvalResult eval(const PoleSet& ps, const ConcaveTerm& k, const Vector& x) {
  check_point(ps, x);
  const Params& params = ps.params();
  const int n = ps.dim();
  EvalResult out;
  out.distances.reserve(ps.size());
  for (const auto& pole : ps.poles()) {
    out.distances.push_back((x - pole.location).norm());
  }
  for (double r : out.distances) {
    if (r == 0.0) {
      if (infinite_at_pole_with_marker(params)) {
        out.value = std::numeric_limits<double>::infinity();
        out.has_derivatives = false;
        return out;
      }
      throw PoleSingularityError("eval: evaluation point coincides with a pole and p >= n");
    }
  }

  out.value = 0.0;
  out.gradient = Vector::Zero(n);
  out.hessian = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& pole = ps.poles()[i];
    const double r = out.distances[i];
    const RadialProfile prof = fundamental_profile(params, r);
    const Vector u = (x - pole.location) / r;
    const double tangential = prof.dv / r;
    out.value += pole.weight * prof.v;
    out.gradient += (pole.weight * prof.dv) * u;
    out.hessian += (pole.weight * (prof.ddv - tangential)) * (u * u.transpose());
    out.hessian.diagonal().array() += pole.weight * tangential;
  }
  if (!k.is_zero()) {
    const ConcaveEval ke = eval_concave(k, x);
    out.value += ke.value;
    out.gradient += ke.gradient;
    out.hessian += ke.hessian;
  }

  const double g = out.gradient.norm();
  out.low_confidence = params.p() < 2.0 && g < kLowConfidenceGradient;
  out.angles.assign(ps.size(), 0.0);
  out.sin2.assign(ps.size(), 0.0);
  if (g < ps.gradient_epsilon() || g == 0.0) return out;

  const Vector dir = out.gradient / g;
  // With one pole and no concave term the gradient is parallel to x - y by
  // construction; report the exact angle instead of a rounding residue.
  const bool parallel_by_construction = ps.size() == 1 && k.is_zero();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vector d = x - ps.poles()[i].location;
    const double proj = d.dot(dir);
    if (parallel_by_construction) {
      out.angles[i] = proj < 0.0 ? M_PI : 0.0;
      continue;
    }
    const Vector rej = d - proj * dir;
    const double rn = rej.norm();
    out.angles[i] = std::atan2(rn, proj);
    out.sin2[i] = (rn * rn) / d.squaredNorm();
  }
  return out;
}

double delta_p_direct(const EvalResult& e, const PoleSet& ps) {
  if (!e.has_derivatives) {
    throw PoleSingularityError("delta_p_direct: derivatives unavailable at a pole");
  }
  const double p = ps.params().p();
  const double g = e.gradient.norm();
  const double lap = e.hessian.trace();
  if (g < ps.gradient_epsilon() || g == 0.0) {
    if (p > 2.0) return 0.0;
    if (p == 2.0) return lap;
    throw UndefinedOperatorError("delta_p_direct: vanishing gradient with p < 2");
  }
  const double ray = e.gradient.dot(e.hessian * e.gradient) / (g * g);
  return gradient_power(g, p) * ((p - 2.0) * ray + lap);
}

double delta_p_direct(const PoleSet& ps, const ConcaveTerm& k, const Vector& x) {
  return delta_p_direct(eval(ps, k, x), ps);
}

double delta_p_closed_form(const EvalResult& e, const PoleSet& ps) {
  if (!e.has_derivatives) {
    throw PoleSingularityError("delta_p_closed_form: derivatives unavailable at a pole");
  }
  const Params& params = ps.params();
  const double p = params.p();
  if (p == 2.0) return 0.0;
  const double g = e.gradient.norm();
  if (g < ps.gradient_epsilon() || g == 0.0) {
    if (p > 2.0) return 0.0;
    throw UndefinedOperatorError("delta_p_closed_form: vanishing gradient with p < 2");
  }
  const double decay = (p + params.n() - 2.0) / (p - 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (e.sin2[i] == 0.0) continue;
    sum += ps.poles()[i].weight * e.sin2[i] / std::pow(e.distances[i], decay);
  }
  if (sum == 0.0) return 0.0;
  return -params.big_c() * gradient_power(g, p) * sum;
}

double delta_p_closed_form(const PoleSet& ps, const Vector& x) {
  return delta_p_closed_form(eval(ps, ConcaveTerm::zero(), x), ps);
}

double delta_p_closed_form(const PoleSet& ps, const ConcaveTerm& k, const Vector& x) {
  if (!k.is_zero()) {
    throw UnsupportedConfigurationError(
        "delta_p_closed_form: the closed form covers pure superpositions only");
  }
  return delta_p_closed_form(ps, x);
}

double delta_p_fd(const PoleSet& ps, const ConcaveTerm& k, const Vector& x, double step) {
  check_point(ps, x);
  if (!(step > 0.0)) {
    throw DomainError("delta_p_fd: step must be positive");
  }
  const double h = step * (1.0 + x.norm());
  for (const auto& pole : ps.poles()) {
    if ((x - pole.location).norm() <= 10.0 * h) {
      throw DomainError("delta_p_fd: stencil too close to a pole");
    }
  }
  const double p = ps.params().p();
  const double eps = ps.gradient_epsilon();
  auto flux = [&](const Vector& z, Eigen::Index axis) {
    const Vector g = superposition_gradient(ps, k, z);
    const double gn = g.norm();
    if (gn < eps && p < 2.0) {
      throw UndefinedOperatorError("delta_p_fd: gradient vanishes inside the stencil with p < 2");
    }
    if (gn == 0.0) return 0.0;
    return gradient_power(gn, p) * g[axis];
  };
  double div = 0.0;
  for (Eigen::Index axis = 0; axis < x.size(); ++axis) {
    Vector fwd = x;
    Vector bwd = x;
    fwd[axis] += h;
    bwd[axis] -= h;
    div += (flux(fwd, axis) - flux(bwd, axis)) / (fwd[axis] - bwd[axis]);
  }
  return div;
}

SignClass sign_region(double p, int n) {
  if (n < 1) throw DomainError("sign_region: dimension must be >= 1");
  if (p == 1.0) return SignClass::Excluded;
  if (p == 2.0 || n == 1 || p + n == 2.0) return SignClass::IdenticallyZero;
  const double factor = -(p - 2.0) * (p + n - 2.0) / (p - 1.0);
  return factor < 0.0 ? SignClass::NonPositive : SignClass::NonNegative;
}

PoleSet riemann_pole_set(const SampledDensity& density, const Params& params) {
  const int n = params.n();
  if (density.lower.size() != n || density.cell_size.size() != n ||
      static_cast<int>(density.cells.size()) != n) {
    throw DomainError("riemann_pole_set: grid description does not match the dimension");
  }
  std::size_t total = 1;
  double volume = 1.0;
  for (int k = 0; k < n; ++k) {
    if (density.cells[k] < 1) throw DomainError("riemann_pole_set: empty grid axis");
    if (!(density.cell_size[k] > 0.0)) {
      throw DomainError("riemann_pole_set: cells must have positive volume");
    }
    total *= static_cast<std::size_t>(density.cells[k]);
    volume *= density.cell_size[k];
  }
  if (density.values.size() != total) {
    throw DomainError("riemann_pole_set: expected " + std::to_string(total) +
                      " density samples, got " + std::to_string(density.values.size()));
  }
  std::vector<Pole> poles;
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const double rho = density.values[flat];
    if (!(rho >= 0.0) || !std::isfinite(rho)) {
      throw DomainError("riemann_pole_set: density must be finite and non-negative");
    }
    if (rho > 0.0) {
      Vector centre(n);
      for (int k = 0; k < n; ++k) {
        centre[k] = density.lower[k] + (idx[k] + 0.5) * density.cell_size[k];
      }
      poles.push_back({rho * volume, std::move(centre)});
    }
    for (int k = 0; k < n && ++idx[k] == density.cells[k]; ++k) idx[k] = 0;
  }
  return PoleSet(std::move(poles), params);
}

}  // namespace plap
