#pragma once

// Concave additive terms K: zero, quadratic, pointwise minimum of affine
// functions and their mollifications K_delta = phi_delta * K.

#include <memory>
#include <variant>
#include <vector>

#include "plap/core.hpp"

namespace plap {

class ConcaveTerm {
 public:
  struct Zero {};

  /// 0.5 x^T A x + b.x + c0.  `concave` records whether A is negative semidefinite.
  struct Quadratic {
    Matrix a;
    Vector b;
    double c0 = 0.0;
    bool concave = false;
  };

  struct AffinePiece {
    Vector slope;
    double offset = 0.0;
  };

  /// min_j (slope_j . x + offset_j)
  struct AffineMin {
    std::vector<AffinePiece> pieces;
  };

  /// Convolution of `base` with the unit-mass bump supported on the ball of radius `delta`.
  struct Mollified {
    std::shared_ptr<const ConcaveTerm> base;
    double delta = 0.0;
  };

  using Variant = std::variant<Zero, Quadratic, AffineMin, Mollified>;

  ConcaveTerm() = default;

  static ConcaveTerm zero();
  /// Non-concave matrices are accepted; the result carries concave() == false.
  static ConcaveTerm quadratic(Matrix a, Vector b, double c0 = 0.0);
  static ConcaveTerm affine_min(std::vector<AffinePiece> pieces);
  static ConcaveTerm mollified(ConcaveTerm base, double delta);

  const Variant& variant() const noexcept { return v_; }
  bool is_zero() const noexcept { return std::holds_alternative<Zero>(v_); }
  bool concave() const noexcept;

 private:
  explicit ConcaveTerm(Variant v) : v_(std::move(v)) {}
  Variant v_ = Zero{};
};

struct ConcaveEval {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Relative tie tolerance between the two smallest affine pieces.
inline constexpr double kTieEpsilon = 1e-9;
/// Absolute slack of eigenvalue_criterion at its equality boundary.
inline constexpr double kCriterionSlack = 1e-12;
/// Gauss-Legendre nodes per axis used by the mollifier.
inline constexpr int kMollifierNodes = 16;
/// Largest dimension for which tensor-product mollification is attempted.
inline constexpr int kMollifierMaxDim = 4;

/// Value only; defined everywhere, including on kinks.
double concave_value(const ConcaveTerm& k, const Vector& x);

/// Value, gradient and Hessian.  Throws KinkError on AffineMin ties and
/// QuadratureError when the mollifier rule is unavailable.
ConcaveEval eval_concave(const ConcaveTerm& k, const Vector& x);

/// Largest eigenvalue <= 1e-12 * ||A||.
bool is_negative_semidefinite(const Matrix& a);

/// lambda_1 + ... + lambda_{n-1} + (p-1) lambda_n for the ascending spectrum of H.
double criterion_sum(const Matrix& h, double p);

/// criterion_sum(h, p) <= kCriterionSlack.  Requires p > 2 and symmetric H.
bool eigenvalue_criterion(const Matrix& h, double p);

/// (p-2) xi^T (Hess K) xi / |xi|^2 + trace(Hess K) at x.
double operator_term(const ConcaveTerm& k, double p, const Vector& xi, const Vector& x);

/// diag(1-m, 1, ..., 1), m = p+n-2: the non-concave quadratic that still
/// keeps the operator term non-positive.
Matrix non_concave_counterexample(double p, int n);

}  // namespace plap
