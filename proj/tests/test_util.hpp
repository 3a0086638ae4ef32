#pragma once

#include <cmath>
#include <random>

#include "mwdet/core/state.hpp"
#include "mwdet/rng.hpp"

namespace mwdet::testutil {

inline double gauss(std::mt19937_64& rng) {
  // Box-Muller on the portable uniform; good enough for test fixtures.
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Random full-rank density matrix (Ginibre ensemble, normalized).
inline State random_density(const SubsystemLayout& layout, std::mt19937_64& rng) {
  const int d = layout.total_dim();
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return State::density(layout, std::move(rho));
}

inline State random_ket(const SubsystemLayout& layout, std::mt19937_64& rng) {
  const int d = layout.total_dim();
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v /= v.norm();
  return State::ket(layout, std::move(v));
}

}  // namespace mwdet::testutil
