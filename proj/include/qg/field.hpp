#pragma once

#include <Eigen/Dense>

#include "qg/grid.hpp"

namespace qg {

/// Sine-series coefficients of a scalar field vanishing on the boundary.
/// coeffs(k-1, l-1) multiplies sin(k pi x / lx) sin(l pi y / ly).
class SpectralField {
public:
  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid_(g), coeffs_(Eigen::MatrixXd::Zero(g.nx, g.ny)) {}
  SpectralField(const Grid& g, Eigen::MatrixXd c) : grid_(g), coeffs_(std::move(c)) {
    if (coeffs_.rows() != g.nx || coeffs_.cols() != g.ny)
      throw ShapeMismatch("SpectralField: coefficient matrix does not match grid");
  }

  /// amplitude * sin(k pi x/lx) sin(l pi y/ly)
  static SpectralField mode(const Grid& g, int k, int l, double amplitude = 1.0) {
    if (k < 1 || k > g.nx || l < 1 || l > g.ny)
      throw PreconditionError("SpectralField::mode: (" + std::to_string(k) + "," +
                              std::to_string(l) + ") outside grid");
    SpectralField f(g);
    f.coeffs_(k - 1, l - 1) = amplitude;
    return f;
  }

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::MatrixXd& coeffs() { return coeffs_; }

  double operator()(int k, int l) const { return coeffs_(k - 1, l - 1); }
  double& operator()(int k, int l) { return coeffs_(k - 1, l - 1); }

  bool all_finite() const { return coeffs_.allFinite(); }
  double max_abs() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0; }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField +=");
    coeffs_ += o.coeffs_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField -=");
    coeffs_ -= o.coeffs_;
    return *this;
  }
  SpectralField& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

private:
  Grid grid_;
  Eigen::MatrixXd coeffs_;
};

/// Values on the interior collocation points; values(i-1, j-1) sits at (x_i, y_j).
class PhysicalField {
public:
  PhysicalField() = default;
  explicit PhysicalField(const Grid& g) : grid_(g), values_(Eigen::MatrixXd::Zero(g.nx, g.ny)) {}
  PhysicalField(const Grid& g, Eigen::MatrixXd v) : grid_(g), values_(std::move(v)) {
    if (values_.rows() != g.nx || values_.cols() != g.ny)
      throw ShapeMismatch("PhysicalField: value matrix does not match grid");
  }

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  double max_abs() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

/// Copy the coefficients of f onto another grid with the same domain, zero-padding or truncating.
inline SpectralField resample(const SpectralField& f, const Grid& target) {
  if (f.grid().lx != target.lx || f.grid().ly != target.ly)
    throw ShapeMismatch("resample: domains differ");
  SpectralField out(target);
  const int kx = std::min(f.grid().nx, target.nx);
  const int ky = std::min(f.grid().ny, target.ny);
  out.coeffs().topLeftCorner(kx, ky) = f.coeffs().topLeftCorner(kx, ky);
  return out;
}

}  // namespace qg
