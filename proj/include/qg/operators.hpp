#pragma once

#include <cmath>

#include "qg/transform.hpp"

namespace qg {

/// mu(k,l) = (k pi/lx)^2 + (l pi/ly)^2, the eigenvalues of -Laplacian.
inline Eigen::MatrixXd laplacian_eigenvalues(const Grid& g) {
  const auto bx = detail::axis_basis(g.nx, g.lx);
  const auto by = detail::axis_basis(g.ny, g.ly);
  Eigen::MatrixXd mu(g.nx, g.ny);
  for (int l = 0; l < g.ny; ++l)
    for (int k = 0; k < g.nx; ++k) mu(k, l) = bx->wave(k) * bx->wave(k) + by->wave(l) * by->wave(l);
  return mu;
}

inline SpectralField laplacian(const SpectralField& f) {
  return SpectralField(f.grid(), -laplacian_eigenvalues(f.grid()).cwiseProduct(f.coeffs()));
}

/// Dirichlet inverse; every eigenvalue is strictly negative so this is always defined.
inline SpectralField inverse_laplacian(const SpectralField& f) {
  return SpectralField(f.grid(), -f.coeffs().cwiseQuotient(laplacian_eigenvalues(f.grid())));
}

/// Zero every mode above the 2/3-rule cutoff in either direction.
inline SpectralField dealias(const SpectralField& f) {
  const Grid& g = f.grid();
  SpectralField out(g);
  const int kx = g.dealias_x();
  const int ky = g.dealias_y();
  out.coeffs().topLeftCorner(kx, ky) = f.coeffs().topLeftCorner(kx, ky);
  return out;
}

/// J(f,g) = f_x g_y - f_y g_x, pseudo-spectral with 2/3-rule dealiasing of inputs and output.
///
/// With both truncations in place the discrete product equals the exact L2 projection of
/// J(Pf, Pg) onto the retained band, so <J(f,g),g> = 0 holds to roundoff.
inline SpectralField jacobian(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "jacobian");
  const SpectralField fd = dealias(f);
  const SpectralField gd = dealias(g);
  const PhysicalField fx = ddx(fd);
  const PhysicalField fy = ddy(fd);
  const PhysicalField gx = ddx(gd);
  const PhysicalField gy = ddy(gd);
  PhysicalField prod(f.grid(), fx.values().cwiseProduct(gy.values()) -
                                   fy.values().cwiseProduct(gx.values()));
  return dealias(to_spectral(prod));
}

inline double inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  return f.coeffs().cwiseProduct(g.coeffs()).sum() * f.grid().area() / 4.0;
}

/// (sum mu^{2s} c^2 |D|/4)^{1/2}; s = 0 is L2, s = 1/2 is ||grad f||, s = 1 is ||Laplacian f||.
inline double sobolev_norm(const SpectralField& f, double s) {
  if (!(s >= -1.0 && s <= 1.0))
    throw PreconditionError("sobolev_norm: exponent must lie in [-1, 1]");
  const Eigen::MatrixXd weight = laplacian_eigenvalues(f.grid()).array().pow(2.0 * s).matrix();
  const double sum = weight.cwiseProduct(f.coeffs().cwiseAbs2()).sum();
  return std::sqrt(sum * f.grid().area() / 4.0);
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

/// Exact integral of the sine series over the rectangle.
inline double domain_integral(const SpectralField& f) {
  const Grid& g = f.grid();
  auto axis = [](int k, double len) {
    return (k % 2 == 1) ? 2.0 * len / (k * std::numbers::pi) : 0.0;
  };
  double total = 0.0;
  for (int l = 1; l <= g.ny; ++l) {
    const double iy = axis(l, g.ly);
    if (iy == 0.0) continue;
    for (int k = 1; k <= g.nx; k += 2) total += f(k, l) * axis(k, g.lx) * iy;
  }
  return total;
}

}  // namespace qg
