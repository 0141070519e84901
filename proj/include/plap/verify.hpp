#pragma once

// Randomized invariant suites.  Every check reports the worst observed
// error against a fixed tolerance; a suite passes when all of its checks do.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plap/sampling.hpp"

namespace plap::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tol = 0.0;
  std::size_t samples = 0;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// superpose, concave, comparison, evolution, all
const std::vector<std::string>& suite_names();

/// Throws ConfigurationError for an unknown suite name.
SuiteReport run_suite(const std::string& suite, std::uint64_t seed = kDefaultSeed);

// Individual checks, shared with the acceptance driver.

CheckResult check_profile_ode();
CheckResult check_radial_derivatives(Rng& rng, int samples);
CheckResult check_rotation_equivariance(Rng& rng, int samples);

/// Closed form against direct (first) and finite differences (second) over
/// random configurations with N <= 8, p in {2, 2.5, 3, 4}, n in {2, 3, 5}.
std::pair<CheckResult, CheckResult> check_three_way(Rng& rng, int configs);
CheckResult check_sign_soundness(Rng& rng, int configs);
CheckResult check_isometry(Rng& rng, int configs);
CheckResult check_weight_scaling(Rng& rng, int configs);
CheckResult check_single_pole_nullity(Rng& rng, int samples);
/// sign_region on p = m/20 in [0.2, 4] (p != 1), n = 1..6 against the sign
/// of -(p-2)(p+n-2)/(p-1) and the three zero lines.  worst = mismatches.
CheckResult check_sign_map();

CheckResult check_concavity_criterion(Rng& rng, int samples);
CheckResult check_criterion_sign(Rng& rng, int samples);
/// Random pole sets plus concave quadratics, p > 2: max delta_p_direct.
CheckResult check_concave_addition(Rng& rng, int pairs, int points_per_pair);
/// diag(1-m, 1, ..., 1): not NSD, criterion sum ~ 0, operator term <= 0.
CheckResult check_counterexample(Rng& rng, const std::vector<std::pair<double, int>>& cases,
                                 int directions);
CheckResult check_mollifier_convergence(Rng& rng);
CheckResult check_mollifier_nsd(Rng& rng, int samples);

CheckResult check_affine_reproduction();
CheckResult check_harmonic_polynomial();
CheckResult check_radial_solve();
CheckResult check_maximum_principle(Rng& rng, int solves);
CheckResult check_energy_monotonicity(Rng& rng, int solves);
/// min(W - h) >= -tol over random pole sets plus concave quadratics on a square grid.
CheckResult check_comparison(Rng& rng, const std::vector<double>& ps, int configs_per_p,
                             int nodes);
/// Same configurations with the boundary data lowered by 1.
CheckResult check_shifted_comparison(Rng& rng, const std::vector<double>& ps, int configs_per_p,
                                     int nodes);
CheckResult check_refinement();

CheckResult check_time_derivative(Rng& rng, int samples);
/// FD-assembled Delta_p(aB) - (aB)_t against the closed defect at p = 3, n = 2.
CheckResult check_defect_identity(Rng& rng, const std::vector<double>& scales, int points);
/// Bisection on the FD time derivative against the analytic radius, (p, n, C, t) tuples.
CheckResult check_sign_change_radius(const std::vector<std::array<double, 4>>& cases);
CheckResult check_two_bump_symmetry(Rng& rng, int samples);
/// Sign change in t of the two-bump defect and the FD-assembled operator limit at x = 0.
CheckResult check_two_bump_sign_change();
CheckResult check_two_bump_fd();
CheckResult check_support_radius();

}  // namespace plap::verify
