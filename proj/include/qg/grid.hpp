#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qg/errors.hpp"

namespace qg {

/// Rectangle D = (0,lx) x (0,ly) resolved by nx x ny interior sine modes.
///
/// Mode (k,l) is sin(k pi x / lx) sin(l pi y / ly), k = 1..nx, l = 1..ny. The
/// matching collocation points are x_i = i lx / (nx+1), y_j = j ly / (ny+1).
struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = std::numbers::pi;
  double ly = std::numbers::pi;

  Grid() = default;
  Grid(int nx_, int ny_, double lx_ = std::numbers::pi, double ly_ = std::numbers::pi)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    validate();
  }

  void validate() const {
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
      throw PreconditionError("grid: nx and ny must be even and >= 4 (got " +
                              std::to_string(nx) + "x" + std::to_string(ny) + ")");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
      throw PreconditionError("grid: lx and ly must be positive and finite");
  }

  double area() const { return lx * ly; }

  double wavenumber_x(int k) const { return k * std::numbers::pi / lx; }
  double wavenumber_y(int l) const { return l * std::numbers::pi / ly; }

  /// Eigenvalue of -Laplacian for mode (k,l), both 1-based.
  double mu(int k, int l) const {
    const double a = wavenumber_x(k);
    const double b = wavenumber_y(l);
    return a * a + b * b;
  }

  /// Highest retained mode per axis under the 2/3 rule: largest K < 2(n+1)/3.
  int dealias_x() const { return (2 * (nx + 1) - 1) / 3; }
  int dealias_y() const { return (2 * (ny + 1) - 1) / 3; }

  double x(int i) const { return i * lx / (nx + 1); }
  double y(int j) const { return j * ly / (ny + 1); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b))
    throw ShapeMismatch(std::string(where) + ": grid mismatch (" + std::to_string(a.nx) + "x" +
                        std::to_string(a.ny) + " vs " + std::to_string(b.nx) + "x" +
                        std::to_string(b.ny) + ")");
}

}  // namespace qg
