#include <cmath>

#include "doctest.h"
#include "plap/core.hpp"
#include "plap/error.hpp"
#include "plap/oracle.hpp"
#include "test_helpers.hpp"

using namespace plap;
using plap::testing::Rng;

TEST_CASE("Params validation") {
  CHECK_THROWS_AS(Params(1.0, 3), DomainError);
  CHECK_THROWS_AS(Params(3.0, 0), DomainError);
  CHECK_THROWS_AS(Params(3.0, 2, 0.0), DomainError);
  CHECK_THROWS_AS(Params(3.0, 2, -1.0), DomainError);
  CHECK_THROWS_AS(Params(NAN, 2), DomainError);
  const Params p(3.0, 2, 2.0);
  CHECK(p.big_c() == doctest::Approx(2.0 * 1.0 * 3.0 / 2.0));
  CHECK(Params(3.0, 3).logarithmic());
  CHECK_FALSE(Params(3.0000001, 3).logarithmic());
}

TEST_CASE("fundamental_profile closed forms") {
  SUBCASE("Newtonian case") {
    const auto prof = fundamental_profile(Params(2.0, 3), 2.0);
    CHECK(prof.v == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(prof.dv == doctest::Approx(-0.25).epsilon(1e-15));
  }
  SUBCASE("logarithmic branch") {
    const auto prof = fundamental_profile(Params(3.0, 3), 1.0);
    CHECK(prof.v == 0.0);
    CHECK(prof.dv == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("non-positive radius") {
    CHECK_THROWS_AS(fundamental_profile(Params(3.0, 2), 0.0), DomainError);
    CHECK_THROWS_AS(fundamental_profile(Params(3.0, 2), -1.0), DomainError);
  }
  SUBCASE("dv against finite differences of v, p=4 n=2") {
    const Params params(4.0, 2);
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
      const double r = rng.uniform(0.1, 10.0);
      const double fd = oracle::central_difference(
          [&](double s) { return fundamental_profile(params, s).v; }, r, 1e-5);
      const auto prof = fundamental_profile(params, r);
      CHECK(plap::testing::rel_err(prof.dv, fd) <= 1e-6);
      const double fd2 = oracle::central_difference(
          [&](double s) { return fundamental_profile(params, s).dv; }, r, 1e-5);
      CHECK(plap::testing::rel_err(prof.ddv, fd2) <= 1e-6);
    }
  }
}

TEST_CASE("profile ODE residual vanishes") {
  for (int n = 1; n <= 6; ++n) {
    for (double p : {2.0, 2.5, 3.0, static_cast<double>(n), 6.0}) {
      if (p == 1.0) continue;
      const Params params(p, n);
      for (double r = 1e-3; r < 1e3; r *= 1.7) {
        const auto prof = fundamental_profile(params, r);
        const double scale = (std::abs(p - 1.0) * std::abs(prof.ddv) +
                              (n - 1.0) * std::abs(prof.dv) / r);
        if (scale == 0.0) {
          CHECK(profile_ode_residual(params, prof) == 0.0);
        } else {
          CHECK(std::abs(profile_ode_residual(params, prof)) <= 1e-12 * scale);
        }
        CHECK(prof.dv == -std::pow(r, (1.0 - n) / (p - 1.0)));
      }
    }
  }
}

TEST_CASE("radial_gradient") {
  const Params newton(2.0, 3);
  Vector x(3);
  x << 2.0, 0.0, 0.0;
  const Vector g = radial_gradient(newton, x, Vector::Zero(3));
  CHECK(g[0] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK_THROWS_AS(radial_gradient(newton, x, x), PoleSingularityError);

  const Params params(3.5, 4);
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const Vector xi = rng.vector(4, -2, 2);
    const Vector yi = rng.vector(4, -2, 2);
    const Vector grad = radial_gradient(params, xi, yi);
    const double r = (xi - yi).norm();
    CHECK(std::abs(grad.norm() - std::abs(fundamental_profile(params, r).dv)) <=
          1e-14 * std::max(1.0, grad.norm()));
    const Vector fd = oracle::fd_gradient(
        [&](const Vector& z) { return fundamental_profile(params, (z - yi).norm()).v; }, xi, 1e-5);
    CHECK((grad - fd).norm() <= 1e-6 * grad.norm());
  }
}

TEST_CASE("radial_hessian") {
  Rng rng(17);
  SUBCASE("trace and eigenvector identities") {
    for (int n = 1; n <= 5; ++n) {
      const Params params(rng.uniform(1.5, 5.0), n);
      for (int i = 0; i < 10; ++i) {
        const Vector x = rng.vector(n, -1, 1);
        const Vector y = rng.vector(n, -1, 1);
        const Matrix h = radial_hessian(params, x, y);
        const auto prof = fundamental_profile(params, (x - y).norm());
        const double lap = prof.ddv + (n - 1) * prof.dv / prof.r;
        CHECK(std::abs(h.trace() - lap) <= 1e-12 * std::max(1.0, std::abs(lap)));
        const Vector d = x - y;
        CHECK((h * d - prof.ddv * d).norm() <= 1e-12 * std::abs(prof.ddv) * d.norm() + 1e-300);
      }
    }
  }
  SUBCASE("matches nested finite differences, p=3 n=2") {
    const Params params(3.0, 2);
    for (int i = 0; i < 30; ++i) {
      const Vector x = rng.vector(2, -2, 2);
      const Vector y = rng.vector(2, -2, 2);
      if ((x - y).norm() < 0.2) continue;
      const Matrix h = radial_hessian(params, x, y);
      const Matrix fd = oracle::fd_hessian(
          [&](const Vector& z) { return fundamental_profile(params, (z - y).norm()).v; }, x, 1e-4);
      CHECK((h - fd).cwiseAbs().maxCoeff() <= 1e-4);
    }
  }
  SUBCASE("pole") {
    const Vector x = Vector::Ones(2);
    CHECK_THROWS_AS(radial_hessian(Params(3.0, 2), x, x), PoleSingularityError);
  }
}

TEST_CASE("rayleigh_quotient") {
  CHECK(rayleigh_quotient(Matrix::Identity(3, 3), Vector::Ones(3)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rayleigh_quotient(Matrix::Identity(3, 3), Vector::Zero(3)),
                  DegenerateDirectionError);

  const Params params(4.0, 3);
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.vector(3, -1, 1);
    const Vector y = rng.vector(3, -1, 1);
    const Vector z = rng.vector(3, -1, 1);
    const Matrix h = radial_hessian(params, x, y);
    const auto prof = fundamental_profile(params, (x - y).norm());
    CHECK(rayleigh_quotient(h, x - y) == doctest::Approx(prof.ddv).epsilon(1e-12));
    const double c = (x - y).dot(z) / ((x - y).norm() * z.norm());
    const double cos2 = c * c;
    const double expected = prof.ddv * cos2 + prof.dv / prof.r * (1.0 - cos2);
    CHECK(std::abs(rayleigh_quotient(h, z) - expected) <=
          1e-12 * (std::abs(prof.ddv) + std::abs(prof.dv / prof.r)));
  }
}

TEST_CASE("rotation equivariance of the radial gradient") {
  Rng rng(31);
  for (int n = 2; n <= 5; ++n) {
    const Params params(rng.uniform(2.0, 5.0), n);
    for (int i = 0; i < 10; ++i) {
      const Matrix q = rng.orthogonal(n);
      const Vector x = rng.vector(n, -1, 1);
      const Vector y = rng.vector(n, -1, 1);
      const Vector lhs = radial_gradient(params, q * x, q * y);
      const Vector rhs = q * radial_gradient(params, x, y);
      CHECK((lhs - rhs).norm() <= 1e-13 * std::max(1.0, rhs.norm()));
    }
  }
}
