#pragma once

// Parameters, radial calculus and the closed-form fundamental solution of
// the p-Laplace equation  div(|grad u|^{p-2} grad u) = 0.

#include <Eigen/Dense>

namespace plap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Exponent p, dimension n and normalization c of the fundamental solution.
///
/// The p = n (logarithmic) branch is selected by exact equality of p and n.
class Params {
 public:
  /// Throws DomainError if p == 1, n < 1 or c <= 0 (or any value is not finite).
  Params(double p, int n, double c = 1.0);

  double p() const noexcept { return p_; }
  int n() const noexcept { return n_; }
  double c() const noexcept { return c_; }

  bool logarithmic() const noexcept { return p_ == static_cast<double>(n_); }

  /// c (p-2)(p+n-2)/(p-1), the prefactor of the superposition sign identity.
  double big_c() const noexcept;

  /// Exponent (p-n)/(p-1) of the power-law profile (meaningless when logarithmic()).
  double value_exponent() const noexcept;

 private:
  double p_;
  int n_;
  double c_;
};

/// Value and radial derivatives of the fundamental solution profile v(r).
struct RadialProfile {
  double r;
  double v;
  double dv;
  double ddv;
};

/// v(r) = -c (p-1)/(p-n) r^{(p-n)/(p-1)} for p != n, -c ln r for p == n,
/// with v'(r) = -c r^{(1-n)/(p-1)}.  Throws DomainError for r <= 0.
RadialProfile fundamental_profile(const Params& params, double r);

/// (p-1) v'' + (n-1) v'/r, zero up to rounding.
double profile_ode_residual(const Params& params, const RadialProfile& prof);

/// Gradient of x -> v(|x - y|).  Throws PoleSingularityError at x == y.
Vector radial_gradient(const Params& params, const Vector& x, const Vector& y);

/// Hessian v'' u u^T + (v'/r)(I - u u^T), u = (x-y)/|x-y|.
Matrix radial_hessian(const Params& params, const Vector& x, const Vector& y);

/// z^T H z / |z|^2.  Throws DegenerateDirectionError for z == 0.
double rayleigh_quotient(const Matrix& h, const Vector& z);

}  // namespace plap
