#pragma once

// Superpositions V(x) = sum_i a_i w(x - y_i) of fundamental solutions, an
// optional concave term K, and three independent routes to Delta_p(V + K).

#include <limits>
#include <vector>

#include "plap/concave.hpp"
#include "plap/core.hpp"

namespace plap {

struct Pole {
  double weight = 0.0;
  Vector location;
};

/// Immutable weighted pole configuration.  Poles at identical locations are
/// merged (weights summed) and zero-weight poles are dropped.
class PoleSet {
 public:
  /// Throws DomainError on negative weights, dimension mismatch, or when no
  /// pole carries positive weight.
  PoleSet(std::vector<Pole> poles, Params params);

  /// No poles at all: W reduces to the concave term.  Only this factory can
  /// produce an empty set.
  static PoleSet empty(Params params);

  const std::vector<Pole>& poles() const noexcept { return poles_; }
  const Params& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return poles_.size(); }
  int dim() const noexcept { return params_.n(); }

  /// c * sum a_i (c for the empty set); scales the vanishing-gradient threshold.
  double weight_scale() const noexcept;
  double gradient_epsilon() const noexcept;

 private:
  explicit PoleSet(Params params) : params_(params) {}

  std::vector<Pole> poles_;
  Params params_;
};

struct EvalResult {
  /// +infinity when x sits on a pole and the kernel blows up there.
  double value = 0.0;
  bool has_derivatives = true;
  Vector gradient;
  Matrix hessian;
  /// Angle in [0, pi] between x - y_i and the gradient; 0 when the gradient vanishes.
  std::vector<double> angles;
  /// sin^2 of `angles`, computed directly from the rejection of x - y_i.
  std::vector<double> sin2;
  std::vector<double> distances;
  /// |gradient| < 1e-8 with p < 2.
  bool low_confidence = false;
};

enum class SignClass { NonPositive, IdenticallyZero, NonNegative, Excluded };

const char* to_string(SignClass s) noexcept;

/// Relative threshold (times PoleSet::weight_scale) below which the gradient is treated as zero.
inline constexpr double kGradientEpsilon = 1e-12;
inline constexpr double kLowConfidenceGradient = 1e-8;
inline constexpr double kDefaultFdStep = 1e-4;

/// Value only; +infinity at poles where the kernel is unbounded.  Never throws at poles.
double superposition_value(const PoleSet& ps, const ConcaveTerm& k, const Vector& x);

/// Gradient only.  Throws PoleSingularityError at a pole.
Vector superposition_gradient(const PoleSet& ps, const ConcaveTerm& k, const Vector& x);

/// At a pole with 1 < p < n the value is +infinity and has_derivatives is false;
/// for other exponents a pole raises PoleSingularityError.
EvalResult eval(const PoleSet& ps, const ConcaveTerm& k, const Vector& x);

/// |xi|^{p-2} ((p-2) xi^T H xi / |xi|^2 + trace H) from the assembled derivatives.
/// Vanishing gradient: 0 for p > 2, the Laplacian for p = 2, UndefinedOperatorError for p < 2.
double delta_p_direct(const PoleSet& ps, const ConcaveTerm& k, const Vector& x);
double delta_p_direct(const EvalResult& e, const PoleSet& ps);

/// -C_{n,p} |grad V|^{p-2} sum_i a_i sin^2(theta_i) / |x - y_i|^{(p+n-2)/(p-1)}.
double delta_p_closed_form(const PoleSet& ps, const Vector& x);
double delta_p_closed_form(const EvalResult& e, const PoleSet& ps);
/// Throws UnsupportedConfigurationError unless k is zero.
double delta_p_closed_form(const PoleSet& ps, const ConcaveTerm& k, const Vector& x);

/// Central-difference divergence of |grad W|^{p-2} grad W with per-axis
/// step `step * (1 + |x|)`.  Requires every pole farther than 10 steps.
double delta_p_fd(const PoleSet& ps, const ConcaveTerm& k, const Vector& x,
                  double step = kDefaultFdStep);

/// Sign of Delta_p V for pure superpositions as a function of (p, n).
SignClass sign_region(double p, int n);

/// Piecewise-constant density on a regular grid of cells (row-major, axis 0 fastest).
struct SampledDensity {
  Vector lower;
  Vector cell_size;
  std::vector<int> cells;
  std::vector<double> values;
};

/// One pole per cell centre with weight density * cell volume.
PoleSet riemann_pole_set(const SampledDensity& density, const Params& params);

}  // namespace plap
