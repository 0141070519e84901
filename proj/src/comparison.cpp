#include "plap/comparison.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Sparse>
#include <spdlog/spdlog.h>

#include "plap/error.hpp"

namespace plap {

GridDomain::GridDomain(Vector lower, Vector upper, std::vector<int> nodes)
    : lower_(std::move(lower)), upper_(std::move(upper)), nodes_(std::move(nodes)) {
  const int d = static_cast<int>(nodes_.size());
  if (d != 2 && d != 3) {
    throw DomainError("GridDomain: dimension must be 2 or 3");
  }
  if (lower_.size() != d || upper_.size() != d) {
    throw DomainError("GridDomain: bounds do not match the dimension");
  }
  spacing_.resize(d);
  size_ = 1;
  for (int k = 0; k < d; ++k) {
    if (nodes_[k] < 9) {
      throw DomainError("GridDomain: at least 9 nodes per axis are required");
    }
    if (!(upper_[k] > lower_[k])) {
      throw DomainError("GridDomain: upper bound must exceed lower bound");
    }
    spacing_[k] = (upper_[k] - lower_[k]) / (nodes_[k] - 1);
    size_ *= static_cast<std::size_t>(nodes_[k]);
  }
}

std::size_t GridDomain::flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int k = dim() - 1; k >= 0; --k) {
    flat = flat * static_cast<std::size_t>(nodes_[k]) + static_cast<std::size_t>(idx[k]);
  }
  return flat;
}

std::vector<int> GridDomain::multi_index(std::size_t flat) const {
  std::vector<int> idx(dim());
  for (int k = 0; k < dim(); ++k) {
    idx[k] = static_cast<int>(flat % static_cast<std::size_t>(nodes_[k]));
    flat /= static_cast<std::size_t>(nodes_[k]);
  }
  return idx;
}

Vector GridDomain::coordinates(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vector x(dim());
  for (int k = 0; k < dim(); ++k) {
    // Pin the last node to the upper bound exactly.
    x[k] = idx[k] == nodes_[k] - 1 ? upper_[k] : lower_[k] + idx[k] * spacing_[k];
  }
  return x;
}

bool GridDomain::is_boundary(std::size_t flat) const {
  const auto idx = multi_index(flat);
  for (int k = 0; k < dim(); ++k) {
    if (idx[k] == 0 || idx[k] == nodes_[k] - 1) return true;
  }
  return false;
}

namespace {

// Kuhn simplex: vertices v_0 = cell corner, v_k = v_{k-1} + e_{axis[k-1]}.
// Its piecewise-linear gradient has component axis[k-1] equal to
// (u(v_k) - u(v_{k-1})) / h_{axis[k-1]}.
struct Simplex {
  std::array<std::size_t, 4> vertex{};
  std::array<int, 3> axis{};
};

struct Mesh {
  std::vector<Simplex> simplices;
  double volume = 0.0;  // common simplex volume
};

Mesh build_mesh(const GridDomain& dom) {
  const int d = dom.dim();
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  Mesh mesh;
  double cell = 1.0;
  for (int k = 0; k < d; ++k) cell *= dom.spacing(k);
  mesh.volume = cell / static_cast<double>(perms.size());

  std::vector<int> idx(d, 0);
  std::vector<int> cells(d);
  std::size_t ncells = 1;
  for (int k = 0; k < d; ++k) {
    cells[k] = dom.nodes()[k] - 1;
    ncells *= static_cast<std::size_t>(cells[k]);
  }
  mesh.simplices.reserve(ncells * perms.size());
  for (std::size_t c = 0; c < ncells; ++c) {
    for (const auto& pm : perms) {
      Simplex s;
      std::vector<int> v = idx;
      s.vertex[0] = dom.flat_index(v);
      for (int k = 0; k < d; ++k) {
        ++v[pm[k]];
        s.vertex[k + 1] = dom.flat_index(v);
        s.axis[k] = pm[k];
      }
      mesh.simplices.push_back(s);
    }
    for (int k = 0; k < d && ++idx[k] == cells[k]; ++k) idx[k] = 0;
  }
  return mesh;
}

struct Assembly {
  double energy = 0.0;
  Eigen::VectorXd gradient;
  Eigen::SparseMatrix<double> hessian;
};

class EnergyModel {
 public:
  EnergyModel(const GridDomain& dom, double p, double reg_eps)
      : dom_(dom), mesh_(build_mesh(dom)), p_(p), eps2_(reg_eps * reg_eps) {
    unknown_.assign(dom.size(), -1);
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (!dom.is_boundary(i)) {
        unknown_[i] = static_cast<int>(free_.size());
        free_.push_back(i);
      }
    }
  }

  std::size_t unknowns() const { return free_.size(); }
  const std::vector<std::size_t>& free_nodes() const { return free_; }

  double energy(const std::vector<double>& u) const {
    const int d = dom_.dim();
    double e = 0.0;
    for (const auto& s : mesh_.simplices) {
      double g2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double gk = (u[s.vertex[k + 1]] - u[s.vertex[k]]) / dom_.spacing(s.axis[k]);
        g2 += gk * gk;
      }
      e += std::pow(g2 + eps2_, 0.5 * p_);
    }
    return e * mesh_.volume;
  }

  Assembly assemble(const std::vector<double>& u, bool with_hessian) const {
    const int d = dom_.dim();
    Assembly out;
    out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
    std::vector<Eigen::Triplet<double>> trip;
    if (with_hessian) trip.reserve(mesh_.simplices.size() * 16);
    Eigen::Vector3d g;
    Eigen::Matrix<double, 3, 4> b;  // d(gradient)/d(vertex values)
    for (const auto& s : mesh_.simplices) {
      b.setZero();
      double g2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double inv_h = 1.0 / dom_.spacing(s.axis[k]);
        g[k] = (u[s.vertex[k + 1]] - u[s.vertex[k]]) * inv_h;
        b(k, k + 1) = inv_h;
        b(k, k) = -inv_h;
        g2 += g[k] * g[k];
      }
      const double sreg = g2 + eps2_;
      const double a1 = p_ * std::pow(sreg, 0.5 * p_ - 1.0);
      out.energy += std::pow(sreg, 0.5 * p_);
      // dE/dg = a1 g,  d2E/dg2 = a1 I + a2 g g^T
      for (int j = 0; j <= d; ++j) {
        const int row = unknown_[s.vertex[j]];
        if (row < 0) continue;
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += b(k, j) * g[k];
        out.gradient[row] += mesh_.volume * a1 * acc;
      }
      if (!with_hessian) continue;
      const double a2 = p_ * (p_ - 2.0) * std::pow(sreg, 0.5 * p_ - 2.0);
      for (int i = 0; i <= d; ++i) {
        const int row = unknown_[s.vertex[i]];
        if (row < 0) continue;
        double bi_g = 0.0;
        for (int k = 0; k < d; ++k) bi_g += b(k, i) * g[k];
        for (int j = 0; j <= d; ++j) {
          const int col = unknown_[s.vertex[j]];
          if (col < 0) continue;
          double bi_bj = 0.0;
          double bj_g = 0.0;
          for (int k = 0; k < d; ++k) {
            bi_bj += b(k, i) * b(k, j);
            bj_g += b(k, j) * g[k];
          }
          trip.emplace_back(row, col, mesh_.volume * (a1 * bi_bj + a2 * bi_g * bj_g));
        }
      }
    }
    out.energy *= mesh_.volume;
    if (with_hessian) {
      const auto m = static_cast<Eigen::Index>(free_.size());
      out.hessian.resize(m, m);
      out.hessian.setFromTriplets(trip.begin(), trip.end());
    }
    return out;
  }

  void apply(std::vector<double>& u, const Eigen::VectorXd& step, double alpha) const {
    for (std::size_t i = 0; i < free_.size(); ++i) {
      u[free_[i]] += alpha * step[static_cast<Eigen::Index>(i)];
    }
  }

 private:
  const GridDomain& dom_;
  Mesh mesh_;
  double p_;
  double eps2_;
  std::vector<int> unknown_;
  std::vector<std::size_t> free_;
};

// Accepted steps without a 1% residual improvement before giving up.
constexpr int kStallWindow = 500;

bool newton_direction(const Eigen::SparseMatrix<double>& hess, const Eigen::VectorXd& grad,
                      Eigen::VectorXd& dir) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  double shift = 0.0;
  const double diag_scale = hess.diagonal().cwiseAbs().maxCoeff();
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::SparseMatrix<double> m = hess;
    if (shift > 0.0) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += shift;
    }
    ldlt.compute(m);
    if (ldlt.info() == Eigen::Success) {
      dir = ldlt.solve(-grad);
      if (ldlt.info() == Eigen::Success && dir.allFinite() && dir.dot(grad) < 0.0) return true;
    }
    shift = shift == 0.0 ? 1e-10 * diag_scale : shift * 100.0;
  }
  return false;
}

}  // namespace

double p_dirichlet_energy(const GridDomain& dom, const std::vector<double>& values, double p,
                          double reg_eps) {
  if (values.size() != dom.size()) {
    throw DomainError("p_dirichlet_energy: value count does not match the grid");
  }
  return EnergyModel(dom, p, reg_eps).energy(values);
}

SolveResult solve_p_harmonic(const GridDomain& dom, const GridFunction& boundary, double p,
                             const SolverOptions& opts) {
  if (!(p >= 2.0)) {
    throw DomainError("solve_p_harmonic: requires p >= 2");
  }
  if (!(opts.reg_eps > 0.0) || !(opts.tol > 0.0) || opts.max_iterations < 1) {
    throw DomainError("solve_p_harmonic: invalid solver options");
  }
  if (boundary.values.size() != dom.size()) {
    throw DomainError("solve_p_harmonic: boundary data does not match the grid");
  }
  std::vector<double> u(dom.size(), 0.0);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (!dom.is_boundary(i)) continue;
    if (!std::isfinite(boundary.values[i])) {
      throw DomainError("solve_p_harmonic: boundary values must be finite");
    }
    u[i] = boundary.values[i];
  }

  // The p = 2 energy is quadratic: one Newton step from zero interior values
  // gives the discrete harmonic extension, used as the starting point.
  {
    const EnergyModel harmonic(dom, 2.0, opts.reg_eps);
    const Assembly a = harmonic.assemble(u, true);
    Eigen::VectorXd dir;
    if (newton_direction(a.hessian, a.gradient, dir)) harmonic.apply(u, dir, 1.0);
  }

  const EnergyModel model(dom, p, opts.reg_eps);
  SolveResult result;
  Assembly cur = model.assemble(u, true);
  result.energies.push_back(cur.energy);
  double residual = cur.gradient.size() ? cur.gradient.cwiseAbs().maxCoeff() : 0.0;
  int it = 0;
  double best = residual;
  int since_best = 0;
  while (residual > opts.tol) {
    if (it >= opts.max_iterations) {
      throw SolverFailure("solve_p_harmonic: iteration budget exhausted", residual);
    }
    ++it;
    Eigen::VectorXd dir;
    if (!newton_direction(cur.hessian, cur.gradient, dir)) dir = -cur.gradient;
    const double slope = dir.dot(cur.gradient);

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      std::vector<double> trial = u;
      model.apply(trial, dir, alpha);
      Assembly next = model.assemble(trial, true);
      if (!std::isfinite(next.energy)) continue;
      const double next_res = next.gradient.cwiseAbs().maxCoeff();
      const bool armijo = next.energy <= cur.energy + 1e-4 * alpha * slope;
      // Close to the minimum the energy decrease drops below rounding; a
      // step that keeps the energy within rounding and shrinks the residual
      // is still progress.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(cur.energy);
      const bool flat = next.energy <= cur.energy + noise && next_res < residual;
      if (armijo || flat) {
        u = std::move(trial);
        cur = std::move(next);
        residual = next_res;
        result.energies.push_back(cur.energy);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw SolverFailure("solve_p_harmonic: line search stalled", residual);
    }
    if (residual < 0.99 * best) {
      best = residual;
      since_best = 0;
    } else if (++since_best >= kStallWindow) {
      throw SolverFailure("solve_p_harmonic: residual stopped decreasing", residual);
    }
    spdlog::debug("solve_p_harmonic: iteration {} energy {:.17g} residual {:.3e}", it,
                  cur.energy, residual);
  }

  result.iterations = it;
  result.residual = residual;
  result.solution.values = std::move(u);
  result.solution.marker.resize(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) {
    result.solution.marker[i] = dom.is_boundary(i) ? NodeKind::Boundary : NodeKind::Interior;
  }
  return result;
}

ComparisonReport comparison_check(const PoleSet& ps, const ConcaveTerm& k, const GridDomain& dom,
                                  const ComparisonOptions& opts) {
  const Params& params = ps.params();
  if (!(params.p() > 2.0)) {
    throw DomainError("comparison_check: requires p > 2");
  }
  if (ps.dim() != dom.dim()) {
    throw DomainError("comparison_check: pole dimension does not match the grid");
  }
  const double tiny = 1e-9 * dom.max_spacing();
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (!dom.is_boundary(i)) continue;
    const Vector x = dom.coordinates(i);
    for (const auto& pole : ps.poles()) {
      if ((x - pole.location).norm() <= tiny) {
        throw ConfigurationError("comparison_check: a pole lies on a boundary node");
      }
    }
  }

  ComparisonReport rep;
  rep.w = sample(dom, [&](const Vector& x) { return superposition_value(ps, k, x); });
  GridFunction data = rep.w;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (dom.is_boundary(i)) {
      data.values[i] -= opts.boundary_shift;
    } else {
      data.values[i] = 0.0;
    }
  }
  rep.h = solve_p_harmonic(dom, data, params.p(), opts.solver);
  const auto& h = rep.h.solution.values;
  const double hmax = *std::max_element(h.begin(), h.end());

  const bool unbounded = params.logarithmic() || params.value_exponent() < 0.0;
  const double radius = opts.excision_factor * dom.max_spacing();
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (dom.is_boundary(i)) continue;
    ++rep.interior_nodes;
    const Vector x = dom.coordinates(i);
    bool in_ball = false;
    for (const auto& pole : ps.poles()) {
      if ((x - pole.location).norm() < radius) in_ball = true;
    }
    const double wv = rep.w.values[i];
    if (in_ball) {
      ++rep.excised_nodes;
      if (unbounded && wv < hmax) rep.excision_ok = false;
    }
    if (!std::isfinite(wv)) continue;  // W = +inf at a pole dominates any h
    const double gap = wv - h[i];
    rep.min_gap = std::min(rep.min_gap, gap);
    if (gap < -opts.comparison_tol) ++rep.violations;
  }
  return rep;
}

}  // namespace plap
