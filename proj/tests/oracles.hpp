#pragma once

// Test-only reference computations. None of these go through the library's transform
// matrices: sine series are summed term by term and coefficients come from plain quadrature.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qg/field.hpp"

namespace qg::oracle {

/// sum_{k,l} c_kl sin(k pi x/lx) sin(l pi y/ly) at the points xs x ys, by direct summation.
inline Eigen::MatrixXd sine_series(const SpectralField& f, const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  const Grid& g = f.grid();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<long>(xs.size()), static_cast<long>(ys.size()));
  std::vector<double> sx(static_cast<std::size_t>(g.nx)), sy(static_cast<std::size_t>(g.ny));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int k = 1; k <= g.nx; ++k) sx[k - 1] = std::sin(k * std::numbers::pi * xs[i] / g.lx);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      for (int l = 1; l <= g.ny; ++l) sy[l - 1] = std::sin(l * std::numbers::pi * ys[j] / g.ly);
      double sum = 0.0;
      for (int k = 1; k <= g.nx; ++k) {
        double inner = 0.0;
        for (int l = 1; l <= g.ny; ++l) inner += f(k, l) * sy[l - 1];
        sum += sx[k - 1] * inner;
      }
      out(static_cast<long>(i), static_cast<long>(j)) = sum;
    }
  }
  return out;
}

inline std::vector<double> collocation(int n, double len) {
  std::vector<double> pts;
  for (int i = 1; i <= n; ++i) pts.push_back(i * len / (n + 1));
  return pts;
}

/// Sine coefficients (k,l <= kmax) of an analytic function by the trapezoid rule on an
/// n x n interior grid; exact for trigonometric polynomials of degree < 2(n+1).
inline Eigen::MatrixXd sine_coefficients(const std::function<double(double, double)>& fn, double lx,
                                         double ly, int n, int kmax) {
  const std::vector<double> xs = collocation(n, lx), ys = collocation(n, ly);
  Eigen::MatrixXd values(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) values(i, j) = fn(xs[i], ys[j]);
  Eigen::MatrixXd sx(kmax, n), sy(kmax, n);
  for (int k = 1; k <= kmax; ++k)
    for (int i = 0; i < n; ++i) {
      sx(k - 1, i) = std::sin(k * std::numbers::pi * xs[i] / lx);
      sy(k - 1, i) = std::sin(k * std::numbers::pi * ys[i] / ly);
    }
  // Plain loops: contract x first, then y.
  Eigen::MatrixXd half = Eigen::MatrixXd::Zero(kmax, n);
  for (int k = 0; k < kmax; ++k)
    for (int i = 0; i < n; ++i) {
      const double s = sx(k, i);
      for (int j = 0; j < n; ++j) half(k, j) += s * values(i, j);
    }
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(kmax, kmax);
  for (int k = 0; k < kmax; ++k)
    for (int l = 0; l < kmax; ++l) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += half(k, j) * sy(l, j);
      coeffs(k, l) = sum * 4.0 / ((n + 1.0) * (n + 1.0));
    }
  return coeffs;
}

}  // namespace qg::oracle
