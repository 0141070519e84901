#include "plap/core.hpp"

#include <cmath>
#include <string>

#include "plap/error.hpp"

namespace plap {

Params::Params(double p, int n, double c) : p_(p), n_(n), c_(c) {
  if (!std::isfinite(p) || !std::isfinite(c)) {
    throw DomainError("Params: p and c must be finite");
  }
  if (p == 1.0) {
    throw DomainError("Params: p = 1 has no non-constant radial solutions");
  }
  if (n < 1) {
    throw DomainError("Params: dimension must be >= 1, got " + std::to_string(n));
  }
  if (!(c > 0.0)) {
    throw DomainError("Params: normalization c must be positive");
  }
}

double Params::big_c() const noexcept {
  return c_ * (p_ - 2.0) * (p_ + n_ - 2.0) / (p_ - 1.0);
}

double Params::value_exponent() const noexcept { return (p_ - n_) / (p_ - 1.0); }

RadialProfile fundamental_profile(const Params& params, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError("fundamental_profile: radius must be positive and finite");
  }
  const double p = params.p();
  const double n = params.n();
  const double c = params.c();
  const double e = (1.0 - n) / (p - 1.0);
  const double dv = -c * std::pow(r, e);
  const double ddv = e * dv / r;
  double v;
  if (params.logarithmic()) {
    v = -c * std::log(r);
  } else {
    const double alpha = params.value_exponent();
    v = -c * (p - 1.0) / (p - n) * std::pow(r, alpha);
  }
  return {r, v, dv, ddv};
}

double profile_ode_residual(const Params& params, const RadialProfile& prof) {
  return (params.p() - 1.0) * prof.ddv + (params.n() - 1.0) * prof.dv / prof.r;
}

namespace {

void check_dims(const Params& params, const Vector& x, const Vector& y) {
  if (x.size() != params.n() || y.size() != params.n()) {
    throw DomainError("radial calculus: point dimension does not match n");
  }
}

}  // namespace

Vector radial_gradient(const Params& params, const Vector& x, const Vector& y) {
  check_dims(params, x, y);
  const Vector d = x - y;
  const double r = d.norm();
  if (r == 0.0) {
    throw PoleSingularityError("radial_gradient: evaluation point coincides with the pole");
  }
  const RadialProfile prof = fundamental_profile(params, r);
  return (prof.dv / r) * d;
}

Matrix radial_hessian(const Params& params, const Vector& x, const Vector& y) {
  check_dims(params, x, y);
  const Vector d = x - y;
  const double r = d.norm();
  if (r == 0.0) {
    throw PoleSingularityError("radial_hessian: evaluation point coincides with the pole");
  }
  const RadialProfile prof = fundamental_profile(params, r);
  const Vector u = d / r;
  const double tangential = prof.dv / r;
  Matrix h = (prof.ddv - tangential) * (u * u.transpose());
  h.diagonal().array() += tangential;
  return h;
}

double rayleigh_quotient(const Matrix& h, const Vector& z) {
  const double zz = z.squaredNorm();
  if (zz == 0.0) {
    throw DegenerateDirectionError("rayleigh_quotient: zero direction");
  }
  if (h.rows() != z.size() || h.cols() != z.size()) {
    throw DomainError("rayleigh_quotient: dimension mismatch");
  }
  return z.dot(h * z) / zz;
}

}  // namespace plap
