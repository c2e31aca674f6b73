#pragma once

#include <cstdint>
#include <random>

#include "qg/operators.hpp"

namespace qg {

/// Gaussian sine coefficients with standard deviation mu_kl^{-decay}, reproducible from `seed`.
inline SpectralField random_field(const Grid& g, std::uint64_t seed, double decay = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd mu = laplacian_eigenvalues(g);
  SpectralField f(g);
  for (int k = 0; k < g.nx; ++k)
    for (int l = 0; l < g.ny; ++l) f.coeffs()(k, l) = normal(rng) * std::pow(mu(k, l), -decay);
  return f;
}

/// Initial state for ensemble runs: mu^{-2} spectrum scaled to ||w||_{1/2} = target.
inline SpectralField random_initial_state(const Grid& g, std::uint64_t seed, double target = 0.5) {
  SpectralField f = random_field(g, seed, 2.0);
  const double n = sobolev_norm(f, 0.5);
  return n > 0.0 ? f * (target / n) : f;
}

}  // namespace qg
