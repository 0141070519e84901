#include "plap/concave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "plap/error.hpp"

namespace plap {

namespace {

void require_symmetric(const Matrix& h, const char* who) {
  if (h.rows() != h.cols()) {
    throw DomainError(std::string(who) + ": matrix is not square");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError(std::string(who) + ": matrix is not symmetric");
  }
}

Eigen::VectorXd ascending_eigenvalues(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// Symmetric Gauss-Legendre nodes and weights on [-1,1].
const std::pair<std::vector<double>, std::vector<double>>& line_nodes() {
  static const auto nodes = [] {
    using Gauss = boost::math::quadrature::gauss<double, kMollifierNodes>;
    std::pair<std::vector<double>, std::vector<double>> out;
    const auto& abscissa = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      out.first.push_back(abscissa[i]);
      out.second.push_back(weights[i]);
      if (abscissa[i] != 0.0) {
        out.first.push_back(-abscissa[i]);
        out.second.push_back(weights[i]);
      }
    }
    return out;
  }();
  return nodes;
}

// Tensor-product Gauss-Legendre rule on [-1,1]^n weighted by the bump
// exp(-1/(1-|u|^2)).  Only nodes inside the unit ball are kept.
struct BumpRule {
  std::vector<Vector> nodes;
  std::vector<double> phi;       // bump value times quadrature weight
  double mass = 0.0;
};

const BumpRule& bump_rule(int dim) {
  static const std::vector<BumpRule> rules = [] {
    const auto& [x1, w1] = line_nodes();
    const int m = static_cast<int>(x1.size());

    std::vector<BumpRule> out(kMollifierMaxDim + 1);
    for (int d = 1; d <= kMollifierMaxDim; ++d) {
      BumpRule& rule = out[d];
      std::vector<int> idx(d, 0);
      while (true) {
        Vector u(d);
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
          u[k] = x1[idx[k]];
          w *= w1[idx[k]];
        }
        const double s = u.squaredNorm();
        if (s < 1.0) {
          const double om = 1.0 - s;
          const double psi = std::exp(-1.0 / om);
          rule.nodes.push_back(u);
          rule.phi.push_back(w * psi);
          rule.mass += w * psi;
        }
        int k = 0;
        while (k < d && ++idx[k] == m) {
          idx[k] = 0;
          ++k;
        }
        if (k == d) break;
      }
    }
    return out;
  }();
  if (dim < 1 || dim > kMollifierMaxDim) {
    throw QuadratureError("mollifier: tensor-product rule unavailable in dimension " +
                          std::to_string(dim));
  }
  return rules[dim];
}

// Hessian of phi_delta * min_j l_j.  The distributional Hessian of the
// minimum lives on the facets {l_a = l_b = min} and equals
// -|m_a - m_b| n n^T dS there, so the result is a non-negative combination
// of negative rank-one matrices.  Facet integrals use the same 1D nodes on
// the (n-1)-dimensional plane through the projection of x.
Matrix kink_hessian(const ConcaveTerm::AffineMin& am, const Vector& x, double delta,
                    double mass) {
  const auto dim = x.size();
  Matrix hess = Matrix::Zero(dim, dim);
  const auto& pieces = am.pieces;
  const std::vector<double>& x1 = line_nodes().first;
  const std::vector<double>& w1 = line_nodes().second;
  const int m = static_cast<int>(x1.size());
  const auto level = [&](std::size_t j, const Vector& y) {
    return pieces[j].slope.dot(y) + pieces[j].offset;
  };
  for (std::size_t a = 0; a < pieces.size(); ++a) {
    for (std::size_t b = a + 1; b < pieces.size(); ++b) {
      const Vector jump = pieces[a].slope - pieces[b].slope;
      const double jn = jump.norm();
      if (jn == 0.0) continue;
      const Vector normal = jump / jn;
      const double signed_dist = (level(a, x) - level(b, x)) / jn;
      if (std::abs(signed_dist) >= delta) continue;
      const Vector y0 = x - signed_dist * normal;
      // Orthonormal basis of the facet plane.
      Eigen::HouseholderQR<Matrix> qr(normal);
      const Matrix q = qr.householderQ();
      const Matrix tangent = q.rightCols(dim - 1);
      const double d2 = (signed_dist / delta) * (signed_dist / delta);
      double weight = 0.0;
      std::vector<int> idx(static_cast<std::size_t>(dim - 1), 0);
      while (true) {
        Vector s(dim - 1);
        double w = 1.0;
        for (Eigen::Index k = 0; k + 1 < dim; ++k) {
          s[k] = x1[idx[k]];
          w *= w1[idx[k]];
        }
        const double r2 = d2 + s.squaredNorm();
        if (r2 < 1.0) {
          const Vector y = y0 + delta * (tangent * s);
          const double lab = 0.5 * (level(a, y) + level(b, y));
          bool active = true;
          for (std::size_t j = 0; j < pieces.size() && active; ++j) {
            if (j == a || j == b) continue;
            if (level(j, y) < lab) active = false;
          }
          if (active) weight += w * std::exp(-1.0 / (1.0 - r2));
        }
        Eigen::Index k = 0;
        while (k + 1 < dim && ++idx[k] == m) {
          idx[k] = 0;
          ++k;
        }
        if (k + 1 >= dim) break;
      }
      hess -= (jn * weight / (mass * delta)) * (normal * normal.transpose());
    }
  }
  return hess;
}

void check_dim(const ConcaveTerm::Quadratic& q, const Vector& x) {
  if (q.a.rows() != x.size()) {
    throw DomainError("concave quadratic: dimension mismatch");
  }
}

void check_dim(const ConcaveTerm::AffinePiece& piece, const Vector& x) {
  if (piece.slope.size() != x.size()) {
    throw DomainError("affine piece: dimension mismatch");
  }
}

}  // namespace

ConcaveTerm ConcaveTerm::zero() { return ConcaveTerm(Zero{}); }

ConcaveTerm ConcaveTerm::quadratic(Matrix a, Vector b, double c0) {
  require_symmetric(a, "ConcaveTerm::quadratic");
  if (b.size() == 0) b = Vector::Zero(a.rows());
  if (b.size() != a.rows()) {
    throw DomainError("ConcaveTerm::quadratic: b has wrong dimension");
  }
  const bool nsd = is_negative_semidefinite(a);
  return ConcaveTerm(Quadratic{std::move(a), std::move(b), c0, nsd});
}

ConcaveTerm ConcaveTerm::affine_min(std::vector<AffinePiece> pieces) {
  if (pieces.empty()) {
    throw DomainError("ConcaveTerm::affine_min: at least one piece is required");
  }
  const auto dim = pieces.front().slope.size();
  for (const auto& piece : pieces) {
    if (piece.slope.size() != dim) {
      throw DomainError("ConcaveTerm::affine_min: pieces have different dimensions");
    }
  }
  return ConcaveTerm(AffineMin{std::move(pieces)});
}

ConcaveTerm ConcaveTerm::mollified(ConcaveTerm base, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("ConcaveTerm::mollified: smoothing radius must be positive");
  }
  return ConcaveTerm(
      Mollified{std::make_shared<const ConcaveTerm>(std::move(base)), delta});
}

bool ConcaveTerm::concave() const noexcept {
  struct Visitor {
    bool operator()(const Zero&) const { return true; }
    bool operator()(const Quadratic& q) const { return q.concave; }
    bool operator()(const AffineMin&) const { return true; }
    bool operator()(const Mollified& m) const { return m.base->concave(); }
  };
  return std::visit(Visitor{}, v_);
}

double concave_value(const ConcaveTerm& k, const Vector& x) {
  struct Visitor {
    const Vector& x;
    double operator()(const ConcaveTerm::Zero&) const { return 0.0; }
    double operator()(const ConcaveTerm::Quadratic& q) const {
      check_dim(q, x);
      return 0.5 * x.dot(q.a * x) + q.b.dot(x) + q.c0;
    }
    double operator()(const ConcaveTerm::AffineMin& m) const {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& piece : m.pieces) {
        check_dim(piece, x);
        best = std::min(best, piece.slope.dot(x) + piece.offset);
      }
      return best;
    }
    double operator()(const ConcaveTerm::Mollified& m) const {
      const BumpRule& rule = bump_rule(static_cast<int>(x.size()));
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        acc += rule.phi[q] * concave_value(*m.base, x - m.delta * rule.nodes[q]);
      }
      return acc / rule.mass;
    }
  };
  return std::visit(Visitor{x}, k.variant());
}

ConcaveEval eval_concave(const ConcaveTerm& k, const Vector& x) {
  const auto dim = x.size();
  struct Visitor {
    const Vector& x;
    Eigen::Index dim;
    ConcaveEval operator()(const ConcaveTerm::Zero&) const {
      return {0.0, Vector::Zero(dim), Matrix::Zero(dim, dim)};
    }
    ConcaveEval operator()(const ConcaveTerm::Quadratic& q) const {
      check_dim(q, x);
      return {0.5 * x.dot(q.a * x) + q.b.dot(x) + q.c0, q.a * x + q.b, q.a};
    }
    ConcaveEval operator()(const ConcaveTerm::AffineMin& m) const {
      std::size_t best = 0;
      double best_val = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m.pieces.size(); ++j) {
        check_dim(m.pieces[j], x);
        const double val = m.pieces[j].slope.dot(x) + m.pieces[j].offset;
        if (val < best_val) {
          second = best_val;
          best_val = val;
          best = j;
        } else if (val < second) {
          second = val;
        }
      }
      if (second - best_val <= kTieEpsilon * std::max(1.0, std::abs(best_val))) {
        throw KinkError("eval_concave: affine pieces tie at the query point");
      }
      return {best_val, m.pieces[best].slope, Matrix::Zero(dim, dim)};
    }
    ConcaveEval operator()(const ConcaveTerm::Mollified& m) const {
      const BumpRule& rule = bump_rule(static_cast<int>(dim));
      if (!(rule.mass > 0.0)) {
        throw QuadratureError("eval_concave: mollifier rule has no mass");
      }
      ConcaveEval out{0.0, Vector::Zero(dim), Matrix::Zero(dim, dim)};
      if (const auto* am = std::get_if<ConcaveTerm::AffineMin>(&m.base->variant())) {
        // The base is only Lipschitz.  The gradient averages the a.e. slope,
        // which is the exact derivative of the discrete value; the Hessian
        // integrates the bump against the kink measure.
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const Vector y = x - m.delta * rule.nodes[q];
          std::size_t best = 0;
          double best_val = std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < am->pieces.size(); ++j) {
            check_dim(am->pieces[j], y);
            const double val = am->pieces[j].slope.dot(y) + am->pieces[j].offset;
            if (val < best_val) {
              best_val = val;
              best = j;
            }
          }
          out.value += rule.phi[q] * best_val;
          out.gradient += rule.phi[q] * am->pieces[best].slope;
        }
        out.value /= rule.mass;
        out.gradient /= rule.mass;
        out.hessian = kink_hessian(*am, x, m.delta, rule.mass);
      } else {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const ConcaveEval e = eval_concave(*m.base, x - m.delta * rule.nodes[q]);
          out.value += rule.phi[q] * e.value;
          out.gradient += rule.phi[q] * e.gradient;
          out.hessian += rule.phi[q] * e.hessian;
        }
        out.value /= rule.mass;
        out.gradient /= rule.mass;
        out.hessian /= rule.mass;
      }
      if (!std::isfinite(out.value) || !out.gradient.allFinite() || !out.hessian.allFinite()) {
        throw QuadratureError("eval_concave: mollifier quadrature did not converge");
      }
      out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
      return out;
    }
  };
  return std::visit(Visitor{x, dim}, k.variant());
}

bool is_negative_semidefinite(const Matrix& a) {
  if (a.size() == 0) return true;
  const double norm = a.norm();
  const auto ev = ascending_eigenvalues(a);
  return ev[ev.size() - 1] <= 1e-12 * norm;
}

double criterion_sum(const Matrix& h, double p) {
  if (!(p > 2.0)) {
    throw DomainError("eigenvalue_criterion: requires p > 2");
  }
  require_symmetric(h, "eigenvalue_criterion");
  const auto ev = ascending_eigenvalues(h);
  const auto n = ev.size();
  return ev.head(n - 1).sum() + (p - 1.0) * ev[n - 1];
}

bool eigenvalue_criterion(const Matrix& h, double p) {
  return criterion_sum(h, p) <= kCriterionSlack;
}

double operator_term(const ConcaveTerm& k, double p, const Vector& xi, const Vector& x) {
  const double xx = xi.squaredNorm();
  if (xx == 0.0) {
    throw DegenerateDirectionError("operator_term: zero direction");
  }
  const ConcaveEval e = eval_concave(k, x);
  return (p - 2.0) * xi.dot(e.hessian * xi) / xx + e.hessian.trace();
}

Matrix non_concave_counterexample(double p, int n) {
  Matrix a = Matrix::Identity(n, n);
  a(0, 0) = 1.0 - (p + n - 2.0);
  return a;
}

}  // namespace plap
