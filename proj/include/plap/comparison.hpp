#pragma once

// Discrete p-harmonic Dirichlet solver on rectangular grids and a harness
// that checks the comparison principle h <= W for h = W on the boundary.

#include <vector>

#include "plap/concave.hpp"
#include "plap/core.hpp"
#include "plap/superpose.hpp"

namespace plap {

/// Tensor-product grid on a box in 2 or 3 dimensions.
class GridDomain {
 public:
  /// Throws DomainError unless dimension is 2 or 3, every axis has at least
  /// 9 nodes and upper > lower.
  GridDomain(Vector lower, Vector upper, std::vector<int> nodes);

  int dim() const noexcept { return static_cast<int>(nodes_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  const std::vector<int>& nodes() const noexcept { return nodes_; }
  double spacing(int axis) const noexcept { return spacing_[axis]; }
  double max_spacing() const noexcept { return spacing_.maxCoeff(); }
  std::size_t size() const noexcept { return size_; }

  /// Axis 0 varies fastest.
  std::size_t flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(std::size_t flat) const;
  Vector coordinates(std::size_t flat) const;
  bool is_boundary(std::size_t flat) const;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<int> nodes_;
  Vector spacing_;
  std::size_t size_ = 0;
};

enum class NodeKind { Interior, Boundary };

struct GridFunction {
  std::vector<double> values;
  std::vector<NodeKind> marker;
};

/// Samples f at every node and marks boundary nodes.
template <typename F>
GridFunction sample(const GridDomain& dom, F&& f) {
  GridFunction g;
  g.values.resize(dom.size());
  g.marker.resize(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) {
    g.values[i] = f(dom.coordinates(i));
    g.marker[i] = dom.is_boundary(i) ? NodeKind::Boundary : NodeKind::Interior;
  }
  return g;
}

struct SolverOptions {
  double reg_eps = 1e-8;
  /// Sup-norm of the energy gradient at termination.
  double tol = 1e-9;
  int max_iterations = 100000;
};

struct SolveResult {
  GridFunction solution;
  int iterations = 0;
  double residual = 0.0;
  /// Energy after every accepted step, starting with the initial guess.
  std::vector<double> energies;
};

/// Regularized discrete p-Dirichlet energy  sum_T |T| (|grad u|^2 + eps^2)^{p/2}
/// over the Kuhn simplices of the grid.
double p_dirichlet_energy(const GridDomain& dom, const std::vector<double>& values, double p,
                          double reg_eps);

/// Minimizes the discrete energy over interior values with boundary values
/// taken from `boundary`.  Throws SolverFailure carrying the residual when
/// the budget runs out, DomainError for p < 2 or non-finite boundary data.
SolveResult solve_p_harmonic(const GridDomain& dom, const GridFunction& boundary, double p,
                             const SolverOptions& opts = {});

inline constexpr double kComparisonTol = 1e-3;
inline constexpr double kExcisionFactor = 3.0;

struct ComparisonOptions {
  SolverOptions solver;
  /// Boundary data is W - boundary_shift.
  double boundary_shift = 0.0;
  double comparison_tol = kComparisonTol;
  /// Pole balls have radius excision_factor * max spacing.
  double excision_factor = kExcisionFactor;
};

struct ComparisonReport {
  double min_gap = 0.0;
  int violations = 0;
  std::size_t interior_nodes = 0;
  /// Interior nodes inside a pole ball.
  std::size_t excised_nodes = 0;
  /// W >= max h on every pole ball (only meaningful when the kernel is unbounded at poles).
  bool excision_ok = true;
  GridFunction w;
  SolveResult h;
};

/// Solves for h with h|dD = W|dD - shift and reports min over interior nodes
/// of W - h.  Throws ConfigurationError when a pole sits on a boundary node.
ComparisonReport comparison_check(const PoleSet& ps, const ConcaveTerm& k, const GridDomain& dom,
                                  const ComparisonOptions& opts = {});

}  // namespace plap
