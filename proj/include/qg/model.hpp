#pragma once

#include "qg/operators.hpp"

namespace qg {

/// Physical constants of the barotropic vorticity model on a rectangular grid.
struct ModelParams {
  double nu = 1.0;    // viscosity
  double r = 1.0;     // Ekman friction
  double beta = 0.0;  // meridional Coriolis gradient
  Grid grid;

  void validate() const {
    grid.validate();
    if (!(nu > 0.0) || !std::isfinite(nu)) throw PreconditionError("model: nu must be > 0");
    if (!(r > 0.0) || !std::isfinite(r)) throw PreconditionError("model: r must be > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw PreconditionError("model: beta must be >= 0");
  }
};

struct GapCondition {
  bool holds = false;
  double lambda1 = 0.0;  // nu - beta^2 |D|^2 / (4 r pi^2)
};

/// 4 nu r > beta^2 |D|^2 / pi^2 together with the coercivity constant lambda1, which
/// satisfies <Aw,w> >= lambda1 ||grad w||^2 whenever the condition holds.
inline GapCondition spectral_gap_condition(const ModelParams& p) {
  const double area = p.grid.area();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  GapCondition out;
  out.holds = 4.0 * p.nu * p.r > p.beta * p.beta * area * area / pi2;
  out.lambda1 = p.nu - p.beta * p.beta * area * area / (4.0 * p.r * pi2);
  return out;
}

/// Lower bound lambda1 * mu_11 on Re sigma(A); nonpositive when the gap condition fails.
inline double decay_rate_bound(const ModelParams& p) {
  return spectral_gap_condition(p).lambda1 * p.grid.mu(1, 1);
}

/// beta d/dx Laplacian^{-1} w, projected back onto the sine basis through the collocation points.
inline SpectralField beta_term(const ModelParams& p, const SpectralField& w) {
  if (p.beta == 0.0) return SpectralField(w.grid());
  return p.beta * to_spectral(ddx(inverse_laplacian(w)));
}

/// A w = -nu Lap w + r w + beta d/dx Lap^{-1} w.
inline SpectralField apply_A(const ModelParams& p, const SpectralField& w) {
  require_same_grid(p.grid, w.grid(), "apply_A");
  const Eigen::MatrixXd diag = p.nu * laplacian_eigenvalues(p.grid).array() + p.r;
  SpectralField out(w.grid(), diag.cwiseProduct(w.coeffs()));
  if (p.beta != 0.0) out += beta_term(p, w);
  return out;
}

/// Time derivative of the vorticity: -A w - J(Lap^{-1} w, w) + f.
inline SpectralField rhs(const ModelParams& p, const SpectralField& w, const SpectralField& f) {
  require_same_grid(p.grid, w.grid(), "rhs");
  require_same_grid(p.grid, f.grid(), "rhs");
  return f - apply_A(p, w) - jacobian(inverse_laplacian(w), w);
}

}  // namespace qg
