#pragma once

// Hand-rolled generators for the property tests.

#include <cstdint>
#include <random>

#include "rydsim/quantum_core.hpp"

namespace rydsim::prop {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex complex_normal() {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng_);
    return {re, n(rng_)};
  }

  CMatrix complex_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

  /// Random full-rank density matrix A A^dag / Tr.
  CMatrix density(Eigen::Index n) {
    const CMatrix a = complex_matrix(n, n);
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
  }

  /// Random normalized pure state.
  CVector pure(Eigen::Index n) {
    CVector v = complex_matrix(n, 1);
    return v / v.norm();
  }

  CMatrix hermitian(Eigen::Index n) {
    const CMatrix a = complex_matrix(n, n);
    return 0.5 * (a + a.adjoint());
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Dense two-atom swap operator |a b> -> |b a>.
inline CMatrix swap_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  CMatrix s = CMatrix::Zero(n, n);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      s(static_cast<Eigen::Index>(b * d + a), static_cast<Eigen::Index>(a * d + b)) = 1.0;
  return s;
}

}  // namespace rydsim::prop
