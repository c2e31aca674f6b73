#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "qg/field.hpp"

namespace qg {

/// Dense DST-I / cosine-evaluation matrices for one axis with n interior points.
///
/// S(i,k) = sin(pi (i+1)(k+1) / (n+1)) and C(i,k) = cos(...). S is symmetric and
/// S*S = (n+1)/2 * I, so the forward transform is (2/(n+1)) S.
struct AxisBasis {
  int n = 0;
  double length = 0.0;
  Eigen::MatrixXd sine;
  Eigen::MatrixXd cosine;
  Eigen::VectorXd wave;  // k pi / L

  AxisBasis(int n_, double length_) : n(n_), length(length_), sine(n_, n_), cosine(n_, n_), wave(n_) {
    const long period = 2L * (n + 1);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        // Reduce the integer phase first so large grids keep full accuracy.
        const long phase = (static_cast<long>(i + 1) * (k + 1)) % period;
        const double angle = std::numbers::pi * static_cast<double>(phase) / (n + 1);
        sine(i, k) = std::sin(angle);
        cosine(i, k) = std::cos(angle);
      }
    }
    for (int k = 0; k < n; ++k) wave(k) = (k + 1) * std::numbers::pi / length;
  }
};

namespace detail {

inline std::shared_ptr<const AxisBasis> axis_basis(int n, double length) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const AxisBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, length}];
  if (!slot) slot = std::make_shared<const AxisBasis>(n, length);
  return slot;
}

}  // namespace detail

inline PhysicalField to_physical(const SpectralField& f) {
  const Grid& g = f.grid();
  const auto bx = detail::axis_basis(g.nx, g.lx);
  const auto by = detail::axis_basis(g.ny, g.ly);
  return PhysicalField(g, bx->sine * f.coeffs() * by->sine);
}

inline SpectralField to_spectral(const PhysicalField& p) {
  const Grid& g = p.grid();
  const auto bx = detail::axis_basis(g.nx, g.lx);
  const auto by = detail::axis_basis(g.ny, g.ly);
  const double scale = 4.0 / ((g.nx + 1.0) * (g.ny + 1.0));
  return SpectralField(g, scale * (bx->sine * p.values() * by->sine));
}

/// d/dx of the truncated sine series, evaluated at the collocation points.
inline PhysicalField ddx(const SpectralField& f) {
  const Grid& g = f.grid();
  const auto bx = detail::axis_basis(g.nx, g.lx);
  const auto by = detail::axis_basis(g.ny, g.ly);
  return PhysicalField(g, bx->cosine * (bx->wave.asDiagonal() * f.coeffs()) * by->sine);
}

/// d/dy of the truncated sine series, evaluated at the collocation points.
inline PhysicalField ddy(const SpectralField& f) {
  const Grid& g = f.grid();
  const auto bx = detail::axis_basis(g.nx, g.lx);
  const auto by = detail::axis_basis(g.ny, g.ly);
  return PhysicalField(g, bx->sine * (f.coeffs() * by->wave.asDiagonal()) * by->cosine.transpose());
}

}  // namespace qg
