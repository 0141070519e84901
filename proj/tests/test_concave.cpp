#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "plap/concave.hpp"
#include "plap/error.hpp"
#include "plap/oracle.hpp"
#include "plap/superpose.hpp"
#include "test_helpers.hpp"

using namespace plap;
using plap::testing::Rng;
using plap::testing::vec;

namespace {

Matrix random_symmetric(Rng& rng, int n, double lo, double hi) {
  const Matrix q = rng.orthogonal(n);
  return q * rng.vector(n, lo, hi).asDiagonal() * q.transpose();
}

Matrix random_nsd(Rng& rng, int n) {
  Vector d = rng.vector(n, -3.0, 0.0);
  if (n > 1 && rng.integer(0, 1) == 1) d[0] = 0.0;  // include singular cases
  const Matrix q = rng.orthogonal(n);
  return q * d.asDiagonal() * q.transpose();
}

ConcaveTerm random_affine_min(Rng& rng, int n, int pieces) {
  std::vector<ConcaveTerm::AffinePiece> out;
  for (int j = 0; j < pieces; ++j) out.push_back({rng.vector(n, -2, 2), rng.uniform(-0.5, 0.5)});
  return ConcaveTerm::affine_min(std::move(out));
}

double max_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("construction") {
  Matrix ns(2, 2);
  ns << -1, 0.5, 0.0, -1;
  CHECK_THROWS_AS(ConcaveTerm::quadratic(ns, Vector::Zero(2)), DomainError);
  CHECK_THROWS_AS(ConcaveTerm::quadratic(-Matrix::Identity(2, 2), Vector::Zero(3)), DomainError);
  CHECK_THROWS_AS(ConcaveTerm::affine_min({}), DomainError);
  CHECK_THROWS_AS(ConcaveTerm::affine_min({{vec({1, 0}), 0.0}, {vec({1}), 0.0}}), DomainError);
  CHECK_THROWS_AS(ConcaveTerm::mollified(ConcaveTerm::zero(), 0.0), DomainError);
  CHECK_THROWS_AS(ConcaveTerm::mollified(ConcaveTerm::zero(), -1.0), DomainError);

  CHECK(ConcaveTerm::zero().concave());
  CHECK(ConcaveTerm::zero().is_zero());
  CHECK(ConcaveTerm::quadratic(-Matrix::Identity(3, 3), Vector()).concave());
  CHECK(ConcaveTerm::quadratic(Matrix::Zero(3, 3), Vector()).concave());
  CHECK_FALSE(ConcaveTerm::quadratic(Matrix::Identity(3, 3), Vector()).concave());
  CHECK_FALSE(ConcaveTerm::quadratic(non_concave_counterexample(3.0, 3), Vector()).concave());
  CHECK(ConcaveTerm::affine_min({{vec({1, 2}), 3.0}}).concave());
  CHECK_FALSE(ConcaveTerm::mollified(ConcaveTerm::quadratic(Matrix::Identity(2, 2), Vector()), 0.1)
                  .concave());
}

TEST_CASE("eval_concave examples") {
  SUBCASE("quadratic -I at (1,1)") {
    const ConcaveTerm k = ConcaveTerm::quadratic(-Matrix::Identity(2, 2), Vector::Zero(2));
    const ConcaveEval e = eval_concave(k, vec({1, 1}));
    CHECK(e.value == -1.0);
    CHECK(e.gradient == vec({-1, -1}));
    CHECK(e.hessian == -Matrix::Identity(2, 2));
    CHECK(concave_value(k, vec({1, 1})) == -1.0);
  }
  SUBCASE("single affine piece") {
    Rng rng(11);
    const Vector m = vec({0.7, -1.3, 2.0});
    const ConcaveTerm k = ConcaveTerm::affine_min({{m, 0.25}});
    for (int i = 0; i < 20; ++i) {
      const Vector x = rng.vector(3, -5, 5);
      const ConcaveEval e = eval_concave(k, x);
      CHECK(e.value == m.dot(x) + 0.25);
      CHECK(e.gradient == m);
      CHECK(e.hessian.isZero(0.0));
    }
  }
  SUBCASE("mollification preserves affine functions") {
    Rng rng(12);
    for (int n = 1; n <= 3; ++n) {
      const Vector m = rng.vector(n, -2, 2);
      const double q = rng.uniform(-1, 1);
      const ConcaveTerm k = ConcaveTerm::mollified(ConcaveTerm::affine_min({{m, q}}), 0.1);
      for (int i = 0; i < 10; ++i) {
        const Vector x = rng.vector(n, -3, 3);
        const ConcaveEval e = eval_concave(k, x);
        CHECK(std::abs(e.value - (m.dot(x) + q)) <= 1e-10);
        CHECK((e.gradient - m).norm() <= 1e-10);
        CHECK(e.hessian.norm() <= 1e-10);
        CHECK(std::abs(concave_value(k, x) - (m.dot(x) + q)) <= 1e-10);
      }
    }
  }
  SUBCASE("mollified quadratic keeps the Hessian") {
    Rng rng(13);
    const Matrix a = random_nsd(rng, 2);
    const ConcaveTerm k = ConcaveTerm::mollified(ConcaveTerm::quadratic(a, vec({0.3, -0.2})), 0.2);
    const ConcaveEval e = eval_concave(k, vec({0.4, 0.1}));
    CHECK((e.hessian - a).norm() <= 1e-12 * (1.0 + a.norm()));
    CHECK((e.gradient - (a * vec({0.4, 0.1}) + vec({0.3, -0.2}))).norm() <= 1e-12);
  }
  SUBCASE("dimension mismatch") {
    const ConcaveTerm k = ConcaveTerm::quadratic(-Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK_THROWS_AS(eval_concave(k, vec({1, 2, 3})), DomainError);
    CHECK_THROWS_AS(concave_value(ConcaveTerm::affine_min({{vec({1, 2}), 0.0}}), vec({1})),
                    DomainError);
  }
  SUBCASE("mollifier unavailable above the supported dimension") {
    const int n = kMollifierMaxDim + 1;
    const ConcaveTerm k = ConcaveTerm::mollified(ConcaveTerm::zero(), 0.1);
    CHECK_THROWS_AS(eval_concave(k, Vector::Zero(n)), QuadratureError);
  }
}

TEST_CASE("kinks") {
  const ConcaveTerm tent = ConcaveTerm::affine_min({{vec({1, 0}), 0.0}, {vec({-1, 0}), 0.0}});
  CHECK_THROWS_AS(eval_concave(tent, vec({0, 0.7})), KinkError);
  CHECK_THROWS_AS(eval_concave(tent, vec({1e-12, 0.7})), KinkError);
  CHECK(concave_value(tent, vec({0, 0.7})) == 0.0);
  const ConcaveEval left = eval_concave(tent, vec({-0.5, 0}));
  CHECK(left.value == -0.5);
  CHECK(left.gradient == vec({1, 0}));
  // Three pieces with a unique minimizer next to a tie of the other two.
  const ConcaveTerm three =
      ConcaveTerm::affine_min({{vec({1, 0}), 0.0}, {vec({-1, 0}), 0.0}, {vec({0, 0}), -5.0}});
  CHECK(eval_concave(three, vec({0, 0})).value == -5.0);
  CHECK_THROWS_AS(operator_term(tent, 3.0, vec({1, 0}), vec({0, 1})), KinkError);
}

TEST_CASE("eigenvalue criterion") {
  SUBCASE("counterexample sits on the boundary") {
    const Matrix h = non_concave_counterexample(3.0, 3);
    CHECK(h(0, 0) == -3.0);
    CHECK(h(1, 1) == 1.0);
    CHECK(h(2, 2) == 1.0);
    CHECK(criterion_sum(h, 3.0) == 0.0);
    CHECK(eigenvalue_criterion(h, 3.0));
    for (double p : {2.5, 3.0, 4.0, 6.5}) {
      for (int n = 2; n <= 5; ++n) {
        const Matrix c = non_concave_counterexample(p, n);
        CHECK(std::abs(criterion_sum(c, p)) <= 1e-13 * (p + n));
        CHECK(eigenvalue_criterion(c, p));
      }
    }
  }
  SUBCASE("definite cases") {
    CHECK_FALSE(eigenvalue_criterion(Matrix::Identity(2, 2), 3.0));
    CHECK(criterion_sum(Matrix::Identity(2, 2), 3.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(eigenvalue_criterion(-Matrix::Identity(2, 2), 3.0));
    CHECK(criterion_sum(-Matrix::Identity(2, 2), 3.0) == doctest::Approx(-3.0).epsilon(1e-15));
  }
  SUBCASE("errors") {
    Matrix ns(2, 2);
    ns << 0, 1, 0, 0;
    CHECK_THROWS_AS(eigenvalue_criterion(ns, 3.0), DomainError);
    CHECK_THROWS_AS(eigenvalue_criterion(Matrix::Identity(2, 2), 2.0), DomainError);
    CHECK_THROWS_AS(eigenvalue_criterion(Matrix::Identity(2, 2), 1.5), DomainError);
    CHECK_THROWS_AS(eigenvalue_criterion(Matrix::Identity(2, 3), 3.0), DomainError);
  }
  SUBCASE("negative semidefiniteness threshold") {
    CHECK(is_negative_semidefinite(Matrix::Zero(3, 3)));
    CHECK(is_negative_semidefinite(-Matrix::Identity(3, 3)));
    Matrix almost = -Matrix::Identity(2, 2);
    almost(1, 1) = 1e-14;
    CHECK(is_negative_semidefinite(almost));
    almost(1, 1) = 1e-10;
    CHECK_FALSE(is_negative_semidefinite(almost));
  }
}

TEST_CASE("operator_term examples") {
  Rng rng(21);
  SUBCASE("concave quadratics give non-positive terms") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = rng.integer(1, 5);
      const double p = rng.uniform(2.0, 8.0);
      const ConcaveTerm k = ConcaveTerm::quadratic(random_nsd(rng, n), Vector::Zero(n));
      const double t = operator_term(k, p, rng.vector(n, -1, 1), rng.vector(n, -2, 2));
      CHECK(t <= 1e-12);
    }
  }
  SUBCASE("counterexample, p = n = 3") {
    const ConcaveTerm k = ConcaveTerm::quadratic(non_concave_counterexample(3.0, 3), Vector::Zero(3));
    CHECK_FALSE(k.concave());
    for (int i = 0; i < 100; ++i) {
      CHECK(operator_term(k, 3.0, rng.vector(3, -1, 1), rng.vector(3, -1, 1)) <= 1e-12);
    }
    // Equality along the top eigenvector.
    CHECK(operator_term(k, 3.0, vec({0, 2, 0}), Vector::Zero(3)) == 0.0);
  }
  SUBCASE("zero term") {
    const ConcaveTerm z = ConcaveTerm::quadratic(Matrix::Zero(2, 2), Vector::Zero(2));
    CHECK(operator_term(z, 3.0, vec({1, 2}), vec({0.3, 0.4})) == 0.0);
    CHECK(operator_term(ConcaveTerm::zero(), 3.0, vec({1, 2}), vec({0.3, 0.4})) == 0.0);
  }
  SUBCASE("matches the formula") {
    const Matrix a = random_symmetric(rng, 3, -2, 2);
    const ConcaveTerm k = ConcaveTerm::quadratic(a, Vector::Zero(3));
    const Vector xi = rng.vector(3, -1, 1);
    const double expect = 1.5 * xi.dot(a * xi) / xi.squaredNorm() + a.trace();
    CHECK(std::abs(operator_term(k, 3.5, xi, Vector::Zero(3)) - expect) <= 1e-13);
  }
  SUBCASE("zero direction") {
    const ConcaveTerm k = ConcaveTerm::quadratic(-Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK_THROWS_AS(operator_term(k, 3.0, Vector::Zero(2), vec({1, 1})), DegenerateDirectionError);
  }
}

TEST_CASE("properties of concave terms") {
  Rng rng(31);
  SUBCASE("concavity implies the criterion") {
    for (int trial = 0; trial < 500; ++trial) {
      const int n = rng.integer(1, 6);
      const double p = rng.uniform(2.0 + 1e-6, 10.0);
      CHECK(eigenvalue_criterion(random_nsd(rng, n), p));
    }
  }
  SUBCASE("criterion implies sign") {
    int accepted = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      const int n = rng.integer(1, 5);
      const double p = rng.uniform(2.1, 8.0);
      const Matrix h = random_symmetric(rng, n, -3.0, 1.5);
      if (!eigenvalue_criterion(h, p)) continue;
      ++accepted;
      const ConcaveTerm k = ConcaveTerm::quadratic(h, Vector::Zero(n));
      for (int i = 0; i < 5; ++i) {
        Vector xi = rng.vector(n, -1, 1);
        if (xi.norm() < 1e-3) continue;
        CHECK(operator_term(k, p, xi, Vector::Zero(n)) <= 1e-12);
      }
    }
    CHECK(accepted > 200);
  }
  SUBCASE("concave additions keep superpositions p-superharmonic") {
    double worst = -1.0;
    for (int trial = 0; trial < 60; ++trial) {
      const int n = rng.integer(1, 4);
      const double p = rng.uniform(2.1, 6.0);
      const PoleSet ps(rng.poles(rng.integer(1, 4), n, 1.0), Params(p, n));
      const ConcaveTerm k =
          ConcaveTerm::quadratic(random_nsd(rng, n), rng.vector(n, -1, 1), rng.uniform(-1, 1));
      for (int i = 0; i < 5; ++i) {
        const Vector x = rng.away_from(ps, 1.5, 0.3);
        const double d = delta_p_direct(ps, k, x);
        worst = std::max(worst, d);
        CHECK(d <= 1e-10);
      }
    }
    MESSAGE("largest Delta_p(V + K): " << worst);
  }
}

TEST_CASE("mollification") {
  Rng rng(41);
  SUBCASE("sup-norm convergence as delta halves") {
    std::vector<ConcaveTerm> bases{
        random_affine_min(rng, 2, 4),
        ConcaveTerm::quadratic(random_nsd(rng, 2), rng.vector(2, -1, 1)),
    };
    for (const ConcaveTerm& base : bases) {
      std::vector<double> sup;
      for (double delta : {0.4, 0.2, 0.1, 0.05}) {
        const ConcaveTerm k = ConcaveTerm::mollified(base, delta);
        double s = 0.0;
        for (double x = -1.0; x <= 1.0 + 1e-12; x += 0.1) {
          for (double y = -1.0; y <= 1.0 + 1e-12; y += 0.1) {
            const Vector pt = vec({x, y});
            s = std::max(s, std::abs(concave_value(k, pt) - concave_value(base, pt)));
          }
        }
        sup.push_back(s);
      }
      for (std::size_t i = 1; i < sup.size(); ++i) {
        CHECK(sup[i] < sup[i - 1]);
        CHECK(sup[i - 1] / sup[i] >= 1.8);
      }
      // A mollified concave function lies below the function itself.
      CHECK(sup.back() <= 0.05 * 2.0 * 4.0);
    }
  }
  SUBCASE("Hessians of mollified concave bases are negative semidefinite") {
    int samples = 0;
    for (int n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 4; ++trial) {
        const double delta = rng.uniform(0.05, 0.5);
        const std::vector<ConcaveTerm> terms{
            ConcaveTerm::mollified(random_affine_min(rng, n, rng.integer(2, 5)), delta),
            ConcaveTerm::mollified(ConcaveTerm::quadratic(random_nsd(rng, n), Vector::Zero(n)),
                                   delta),
        };
        for (const ConcaveTerm& k : terms) {
          for (int i = 0; i < (n == 3 ? 8 : 25); ++i) {
            const ConcaveEval e = eval_concave(k, rng.vector(n, -1, 1));
            CHECK(is_negative_semidefinite(e.hessian));
            ++samples;
          }
        }
      }
    }
    // Nested mollification of a kinked base, 2D.
    const ConcaveTerm nested =
        ConcaveTerm::mollified(ConcaveTerm::mollified(random_affine_min(rng, 2, 3), 0.3), 0.1);
    for (int i = 0; i < 5; ++i) {
      CHECK(is_negative_semidefinite(eval_concave(nested, rng.vector(2, -1, 1)).hessian));
      ++samples;
    }
    CHECK(samples > 300);
  }
  SUBCASE("Hessian of a mollified tent against its bump marginal") {
    // K = -|x_1| in 2D: d^2 K_delta / dx_1^2 = -2 * (marginal of the bump at x_1).
    const double delta = 0.5;
    const ConcaveTerm tent = ConcaveTerm::mollified(
        ConcaveTerm::affine_min({{vec({1, 0}), 0.0}, {vec({-1, 0}), 0.0}}), delta);
    const auto bump = [](double s2) { return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0; };
    const int steps = 20000;
    double mass = 0.0;  // 2 pi int_0^1 bump(r^2) r dr
    for (int i = 0; i < steps; ++i) {
      const double r = (i + 0.5) / steps;
      mass += bump(r * r) * r / steps;
    }
    mass *= 2.0 * M_PI;
    for (double x : {-0.3, -0.1, 0.0, 0.2, 0.45}) {
      const double t = x / delta;
      double marginal = 0.0;
      for (int i = 0; i < steps; ++i) {
        const double u = -1.0 + 2.0 * (i + 0.5) / steps;
        marginal += bump(t * t + u * u) * 2.0 / steps;
      }
      const double expect = -2.0 * marginal / (mass * delta);
      const ConcaveEval e = eval_concave(tent, vec({x, 0.1}));
      CHECK(std::abs(e.hessian(0, 1)) <= 1e-14);
      CHECK(e.hessian(1, 1) == 0.0);
      CHECK(std::abs(e.hessian(0, 0) - expect) <= 2e-2 * std::abs(expect));
    }
  }
  SUBCASE("non-concave base") {
    const ConcaveTerm k = ConcaveTerm::mollified(
        ConcaveTerm::quadratic(non_concave_counterexample(3.0, 2), Vector::Zero(2)), 0.2);
    CHECK(max_eigenvalue(eval_concave(k, vec({0.1, 0.2})).hessian) > 0.0);
  }
}
