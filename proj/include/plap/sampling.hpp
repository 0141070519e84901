#pragma once

// Seeded random sampling shared by the verification suites and the tests.

#include <cstdint>
#include <random>
#include <vector>

#include "plap/core.hpp"
#include "plap/superpose.hpp"

namespace plap {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(gen_); }

  Vector vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Haar-ish orthogonal matrix from the QR factorization of a Gaussian matrix.
  Matrix orthogonal(int n) {
    std::normal_distribution<> nd;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = nd(gen_);
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ();
  }

  std::vector<Pole> poles(int count, int n, double box, double wlo = 0.2, double whi = 2.0) {
    std::vector<Pole> out;
    for (int i = 0; i < count; ++i) out.push_back({uniform(wlo, whi), vector(n, -box, box)});
    return out;
  }

  /// Point in [-box, box]^n at distance >= min_dist from every pole.
  Vector away_from(const PoleSet& ps, double box, double min_dist) {
    for (;;) {
      Vector x = vector(ps.dim(), -box, box);
      bool ok = true;
      for (const auto& pole : ps.poles()) ok = ok && (x - pole.location).norm() >= min_dist;
      if (ok) return x;
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace plap
