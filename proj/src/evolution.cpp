#include "plap/evolution.hpp"

#include <cmath>
#include <string>

#include "plap/error.hpp"

namespace plap {

namespace {

constexpr double kTimeStepRel = 1e-6;

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("evolution kernel: time must be positive");
  }
}

void check_point(const EvolutionKernel& k, const Vector& x) {
  if (x.size() != k.n()) {
    throw DomainError("evolution kernel: point dimension does not match n");
  }
}

// ((p-2)/p) beta^{1/(p-1)}
double barenblatt_coefficient(const EvolutionKernel& k) {
  const double p = k.p();
  return (p - 2.0) / p * std::pow(k.beta(), 1.0 / (p - 1.0));
}

// ((p-1)/p) (1/p)^{1/(p-1)}
double homogeneous_coefficient(const EvolutionKernel& k) {
  const double p = k.p();
  return (p - 1.0) / p * std::pow(1.0 / p, 1.0 / (p - 1.0));
}

}  // namespace

const char* to_string(KernelKind kind) noexcept {
  return kind == KernelKind::Barenblatt ? "barenblatt" : "homogeneous";
}

EvolutionKernel::EvolutionKernel(KernelKind kind, double p, int n, double big_c, double small_c)
    : kind_(kind), p_(p), n_(n), big_c_(big_c), small_c_(small_c) {
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw DomainError("EvolutionKernel: requires p > 2");
  }
  if (n < 1) throw DomainError("EvolutionKernel: dimension must be >= 1");
  if (!(big_c > 0.0) || !(small_c > 0.0)) {
    throw DomainError("EvolutionKernel: constants C and c must be positive");
  }
  beta_ = 1.0 / (n * (p - 2.0) + p);
}

double EvolutionKernel::support_radius(double t) const {
  check_time(t);
  const double coef = barenblatt_coefficient(*this);
  return std::pow(t, beta_) * std::pow(big_c_ / coef, (p_ - 1.0) / p_);
}

double kernel_value(const EvolutionKernel& k, const Vector& x, double t) {
  check_time(t);
  check_point(k, x);
  const double p = k.p();
  const double n = k.n();
  const double s = x.norm();
  const double q = p / (p - 1.0);
  if (k.kind() == KernelKind::Barenblatt) {
    const double beta = k.beta();
    const double g = k.big_c() - barenblatt_coefficient(k) * std::pow(s / std::pow(t, beta), q);
    if (g <= 0.0) return 0.0;
    return std::pow(t, -n * beta) * std::pow(g, (p - 1.0) / (p - 2.0));
  }
  const double zeta = s / std::pow(t, 1.0 / p);
  return k.small_c() * std::pow(t, -n / (p * (p - 1.0))) *
         std::exp(-homogeneous_coefficient(k) * std::pow(zeta, q));
}

Vector kernel_gradient(const EvolutionKernel& k, const Vector& x, double t) {
  check_time(t);
  check_point(k, x);
  const double p = k.p();
  const double n = k.n();
  const double s = x.norm();
  const double q = p / (p - 1.0);
  if (s == 0.0) return Vector::Zero(x.size());
  double ds;
  if (k.kind() == KernelKind::Barenblatt) {
    const double beta = k.beta();
    const double coef = barenblatt_coefficient(k);
    const double tb = std::pow(t, beta);
    const double xi = s / tb;
    const double g = k.big_c() - coef * std::pow(xi, q);
    if (g <= 0.0) return Vector::Zero(x.size());
    const double gamma = (p - 1.0) / (p - 2.0);
    ds = std::pow(t, -n * beta) * gamma * std::pow(g, gamma - 1.0) *
         (-coef * q * std::pow(xi, q - 1.0) / tb);
  } else {
    const double tp = std::pow(t, 1.0 / p);
    const double zeta = s / tp;
    const double kappa = homogeneous_coefficient(k);
    ds = kernel_value(k, x, t) * (-kappa * q * std::pow(zeta, q - 1.0) / tp);
  }
  return (ds / s) * x;
}

double kernel_time_derivative(const EvolutionKernel& k, const Vector& x, double t) {
  check_time(t);
  check_point(k, x);
  const double p = k.p();
  const double n = k.n();
  const double s = x.norm();
  const double q = p / (p - 1.0);
  if (k.kind() == KernelKind::Barenblatt) {
    const double lo = k.support_radius(t * (1.0 - kTimeStepRel));
    const double hi = k.support_radius(t * (1.0 + kTimeStepRel));
    if (s >= lo && s <= hi) {
      throw NonDifferentiablePointError(
          "kernel_time_derivative: point lies on the Barenblatt free boundary");
    }
    const double beta = k.beta();
    const double coef = barenblatt_coefficient(k);
    const double e = coef * std::pow(s / std::pow(t, beta), q);
    const double g = k.big_c() - e;
    if (g <= 0.0) return 0.0;
    // B_t = beta t^{-n beta - 1} G^{1/(p-2)} (-n G + p/(p-2) coef xi^q)
    return beta * std::pow(t, -n * beta - 1.0) * std::pow(g, 1.0 / (p - 2.0)) *
           (-n * g + p / (p - 2.0) * e);
  }
  const double e = homogeneous_coefficient(k) * std::pow(s / std::pow(t, 1.0 / p), q);
  const double mu = n / (p * (p - 1.0));
  return kernel_value(k, x, t) / t * (e / (p - 1.0) - mu);
}

DefectResult barenblatt_defect(const EvolutionKernel& k, double a, const Vector& x, double t) {
  if (k.kind() != KernelKind::Barenblatt) {
    throw DomainError("barenblatt_defect: requires the Barenblatt kernel");
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("barenblatt_defect: scale must be positive");
  }
  check_time(t);
  check_point(k, x);
  const double s = x.norm();
  if (s == 0.0 || s >= k.support_radius(t)) {
    throw DomainError("barenblatt_defect: point must lie strictly inside the support, off the origin");
  }
  if (a == 1.0) return {0.0, true};
  const double pref = std::pow(a, k.p() - 1.0) - a;
  return {pref * kernel_time_derivative(k, x, t), false};
}

double sign_change_radius(const EvolutionKernel& k, double t) {
  if (k.kind() != KernelKind::Barenblatt) {
    throw DomainError("sign_change_radius: requires the Barenblatt kernel");
  }
  check_time(t);
  const double p = k.p();
  return std::pow(k.big_c() * p * k.n(), (p - 1.0) / p) * std::pow(k.beta(), (p - 2.0) / p) *
         std::pow(t, k.beta());
}

Vector two_bump_gradient(const EvolutionKernel& k, const Vector& y, const Vector& x, double t) {
  return kernel_gradient(k, x + y, t) + kernel_gradient(k, x - y, t);
}

double two_bump_defect(const EvolutionKernel& k, const Vector& y, double t) {
  if (k.kind() != KernelKind::Homogeneous) {
    throw DomainError("two_bump_defect: requires the homogeneous kernel");
  }
  check_time(t);
  check_point(k, y);
  if (y.norm() == 0.0) {
    throw DegenerateConfigurationError("two_bump_defect: the bumps must be separated (y != 0)");
  }
  const double p = k.p();
  const double w = kernel_value(k, y, t);
  return 2.0 * (p - 1.0) * std::pow(2.0 * w, p - 2.0) * kernel_time_derivative(k, y, t);
}

double homogeneous_sign_change_time(const EvolutionKernel& k, const Vector& y) {
  if (k.kind() != KernelKind::Homogeneous) {
    throw DomainError("homogeneous_sign_change_time: requires the homogeneous kernel");
  }
  check_point(k, y);
  const double s = y.norm();
  if (s == 0.0) {
    throw DegenerateConfigurationError("homogeneous_sign_change_time: y must be non-zero");
  }
  const double p = k.p();
  const double q = p / (p - 1.0);
  // W_t = 0  <=>  coef (s t^{-1/p})^q = n/p
  const double target = k.n() / p;
  return std::pow(homogeneous_coefficient(k) * std::pow(s, q) / target, p - 1.0);
}

}  // namespace plap
