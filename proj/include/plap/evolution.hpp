#pragma once

// Self-similar kernels of the evolutionary p-Laplace equations and the
// superposition defects they produce.
//
//   Barenblatt:   u_t = Delta_p u
//   Homogeneous:  (|u|^{p-2} u)_t = Delta_p u

#include "plap/core.hpp"

namespace plap {

enum class KernelKind { Barenblatt, Homogeneous };

const char* to_string(KernelKind kind) noexcept;

class EvolutionKernel {
 public:
  /// Throws DomainError unless p > 2, n >= 1 and both constants are positive.
  EvolutionKernel(KernelKind kind, double p, int n, double big_c = 1.0, double small_c = 1.0);

  KernelKind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  int n() const noexcept { return n_; }
  /// Barenblatt constant C.
  double big_c() const noexcept { return big_c_; }
  /// Homogeneous-kernel amplitude c.
  double small_c() const noexcept { return small_c_; }
  /// 1 / (n(p-2) + p)
  double beta() const noexcept { return beta_; }

  /// Radius of the Barenblatt support at time t.
  double support_radius(double t) const;

 private:
  KernelKind kind_;
  double p_;
  int n_;
  double big_c_;
  double small_c_;
  double beta_;
};

/// Throws DomainError for t <= 0.
double kernel_value(const EvolutionKernel& k, const Vector& x, double t);

/// Analytic spatial gradient; zero at the origin.
Vector kernel_gradient(const EvolutionKernel& k, const Vector& x, double t);

/// Analytic d/dt.  Throws NonDifferentiablePointError when a relative time
/// step of 1e-6 moves the Barenblatt free boundary across |x|.
double kernel_time_derivative(const EvolutionKernel& k, const Vector& x, double t);

struct DefectResult {
  double value = 0.0;
  /// a == 1: the defect vanishes identically.
  bool degenerate = false;
};

/// (a^{p-1} - a) B_t(x, t) = Delta_p(aB) - (aB)_t for the Barenblatt kernel.
/// Requires x strictly inside the support and away from the origin.
DefectResult barenblatt_defect(const EvolutionKernel& k, double a, const Vector& x, double t);

/// (C p n)^{(p-1)/p} beta^{(p-2)/p} t^beta: where B_t changes sign.
double sign_change_radius(const EvolutionKernel& k, double t);

/// Gradient of W(x+y, t) + W(x-y, t).
Vector two_bump_gradient(const EvolutionKernel& k, const Vector& y, const Vector& x, double t);

/// 2(p-1) (2W(y,t))^{p-2} W_t(y,t): the value of d/dt(|V|^{p-2}V) - Delta_p V
/// at x = 0 for V(x,t) = W(x+y,t) + W(x-y,t).  Throws DegenerateConfigurationError for y = 0.
double two_bump_defect(const EvolutionKernel& k, const Vector& y, double t);

/// Time at which W_t(y, .) changes sign (homogeneous kernel, y != 0).
double homogeneous_sign_change_time(const EvolutionKernel& k, const Vector& y);

}  // namespace plap
