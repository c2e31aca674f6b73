#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <unsupported/Eigen/IterativeSolvers>
#include <vector>

#include "qg/model.hpp"

namespace qg {

/// F(w) = A w + J(Lap^{-1} w, w) - f0.
inline SpectralField stationary_residual(const ModelParams& p, const SpectralField& w, const SpectralField& f0) {
  SpectralField out = apply_A(p, w);
  out += jacobian(inverse_laplacian(w), w);
  out -= f0;
  return out;
}

/// Frechet derivative of F at w0: L h = A h + J(Lap^{-1} h, w0) + J(Lap^{-1} w0, h).
inline SpectralField apply_L(const ModelParams& p, const SpectralField& w0, const SpectralField& h) {
  SpectralField out = apply_A(p, h);
  out += jacobian(inverse_laplacian(h), w0);
  out += jacobian(inverse_laplacian(w0), h);
  return out;
}

class LinearizedOperator;

}  // namespace qg

namespace Eigen::internal {
template <>
struct traits<qg::LinearizedOperator> : public traits<SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace qg {

/// L at a fixed state, exposed to Eigen's Krylov solvers on flattened coefficient vectors.
class LinearizedOperator : public Eigen::EigenBase<LinearizedOperator> {
public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  LinearizedOperator(const ModelParams& p, const SpectralField& w0) : p_(p), w0_(w0) {}

  Eigen::Index rows() const { return static_cast<Eigen::Index>(p_.grid.nx) * p_.grid.ny; }
  Eigen::Index cols() const { return rows(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    SpectralField h(p_.grid, Eigen::Map<const Eigen::MatrixXd>(x.data(), p_.grid.nx, p_.grid.ny));
    const SpectralField lh = apply_L(p_, w0_, h);
    return Eigen::Map<const Eigen::VectorXd>(lh.coeffs().data(), rows());
  }

  template <typename Rhs>
  Eigen::Product<LinearizedOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LinearizedOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  const ModelParams& params() const { return p_; }

private:
  const ModelParams& p_;
  const SpectralField& w0_;
};

/// Jacobi-type preconditioner: inverse of the diagonal nu mu + r of A.
class ViscousPreconditioner {
public:
  ViscousPreconditioner() = default;
  template <typename M>
  explicit ViscousPreconditioner(const M& m) { compute(m); }
  template <typename M>
  ViscousPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  ViscousPreconditioner& factorize(const M& m) { return compute(m); }
  ViscousPreconditioner& compute(const LinearizedOperator& op) {
    const auto& p = op.params();
    const Eigen::MatrixXd d = (p.nu * laplacian_eigenvalues(p.grid).array() + p.r).inverse().matrix();
    inv_diag_ = Eigen::Map<const Eigen::VectorXd>(d.data(), d.size());
    return *this;
  }
  template <typename Rhs>
  Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const { return inv_diag_.cwiseProduct(b.derived()); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
  Eigen::VectorXd inv_diag_;
};

}  // namespace qg

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<qg::LinearizedOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<qg::LinearizedOperator, Rhs, generic_product_impl<qg::LinearizedOperator, Rhs>> {
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const qg::LinearizedOperator& lhs, const Rhs& rhs, const double& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace qg {

struct StationaryState {
  SpectralField omega0;
  double residual_norm = 0.0;
  int newton_iters = 0;
};

struct NewtonOptions {
  double tol = 1e-11;            // on ||F||_{L2}
  int max_iters = 30;
  double linear_tol = 1e-3;      // relative tolerance of each inner solve
  int restart = 40;
  int max_linear_iters = 2000;
};

/// Newton iteration for F(w) = 0 with GMRES inner solves on L (matrix-free, diagonally
/// preconditioned, inexact to `linear_tol`).
inline StationaryState solve_stationary(const ModelParams& p, const SpectralField& f0, const NewtonOptions& opt = {},
                                        std::optional<SpectralField> guess = std::nullopt) {
  p.validate();
  require_same_grid(p.grid, f0.grid(), "stationary");
  if (!spectral_gap_condition(p).holds)
    throw PreconditionError("stationary: spectral-gap condition 4*nu*r > beta^2*|D|^2/pi^2 does not hold");
  if (!(opt.tol > 0.0) || opt.max_iters < 1) throw PreconditionError("stationary: need tol > 0 and max_iters >= 1");
  SpectralField w = guess ? *guess : SpectralField(p.grid);
  require_same_grid(p.grid, w.grid(), "stationary guess");

  const Eigen::Index n = static_cast<Eigen::Index>(p.grid.nx) * p.grid.ny;
  SpectralField F = stationary_residual(p, w, f0);
  double res = l2_norm(F);
  int it = 0;
  while (res >= opt.tol) {
    if (it == opt.max_iters)
      throw ConvergenceFailure("stationary: Newton did not reach residual " + std::to_string(opt.tol) + " in " +
                               std::to_string(opt.max_iters) + " iterations (last " + std::to_string(res) + ")");
    LinearizedOperator L(p, w);
    Eigen::GMRES<LinearizedOperator, ViscousPreconditioner> gmres;
    gmres.set_restart(opt.restart);
    gmres.setTolerance(opt.linear_tol);
    gmres.setMaxIterations(opt.max_linear_iters);
    gmres.compute(L);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(F.coeffs().data(), n);
    const Eigen::VectorXd dx = gmres.solve(rhs);
    if (gmres.info() != Eigen::Success && gmres.error() > 0.5)
      throw ConvergenceFailure("stationary: linear solve stagnated (relative error " + std::to_string(gmres.error()) + ")");
    w -= SpectralField(p.grid, Eigen::Map<const Eigen::MatrixXd>(dx.data(), p.grid.nx, p.grid.ny));
    F = stationary_residual(p, w, f0);
    res = l2_norm(F);
    ++it;
    if (!std::isfinite(res)) throw ConvergenceFailure("stationary: Newton diverged");
  }
  return {w, res, it};
}

/// ||F(w)||_{L2} assembled coefficient by coefficient, sharing no code with the Newton loop's
/// residual beyond the Jacobian kernel (used in antisymmetrized form).
inline double independent_residual_norm(const ModelParams& p, const SpectralField& w, const SpectralField& f0) {
  const Grid& g = p.grid;
  SpectralField psi(g);
  for (int l = 1; l <= g.ny; ++l)
    for (int k = 1; k <= g.nx; ++k) psi(k, l) = -w(k, l) / g.mu(k, l);
  const SpectralField adv = 0.5 * (jacobian(psi, w) - jacobian(w, psi));
  const SpectralField beta_part = to_spectral(ddx(psi));
  double sum = 0.0;
  for (int l = 1; l <= g.ny; ++l)
    for (int k = 1; k <= g.nx; ++k) {
      const double v = (p.nu * g.mu(k, l) + p.r) * w(k, l) + p.beta * beta_part(k, l) + adv(k, l) - f0(k, l);
      sum += v * v;
    }
  return std::sqrt(sum * g.area() / 4.0);
}

/// Largest truncation that keeps every retained mode inside the dealiased band.
inline int max_truncation(const Grid& g) { return std::min(g.dealias_x(), g.dealias_y()); }

/// Galerkin matrix of L at w0 on modes (k, l) with 1 <= k, l <= truncation.
/// Column/row index of mode (k, l) is (k - 1) + truncation * (l - 1).
inline Eigen::MatrixXd assemble_L(const ModelParams& p, const SpectralField& w0, int truncation) {
  p.validate();
  require_same_grid(p.grid, w0.grid(), "assemble_L");
  if (truncation < 1 || truncation > max_truncation(p.grid))
    throw PreconditionError("assemble_L: truncation " + std::to_string(truncation) + " outside [1, " +
                            std::to_string(max_truncation(p.grid)) + "] (dealiased band)");
  const int T = truncation;
  Eigen::MatrixXd M(T * T, T * T);
  for (int l = 1; l <= T; ++l)
    for (int k = 1; k <= T; ++k) {
      const SpectralField col = apply_L(p, w0, SpectralField::mode(p.grid, k, l, 1.0));
      M.col((k - 1) + T * (l - 1)) = col.coeffs().topLeftCorner(T, T).reshaped();
    }
  return M;
}

/// Embed a truncated coefficient vector (ordering as in assemble_L) into a field on g.
inline SpectralField embed_truncated(const Grid& g, const Eigen::VectorXd& v, int truncation) {
  SpectralField f(g);
  f.coeffs().topLeftCorner(truncation, truncation) = v.reshaped(truncation, truncation);
  return f;
}

struct SpectrumReport {
  Eigen::VectorXcd eigenvalues;   // sorted by real part, then imaginary part
  Eigen::MatrixXcd eigenvectors;  // columns match eigenvalues
  double gap_a = 0.0;             // min |Re lambda|
  int n_unstable = 0;             // #{Re lambda < 0}
  int truncation = 0;
};

/// Full nonsymmetric eigendecomposition of an assembled L. A mode is unstable when Re lambda < 0
/// (h' = -L h grows along it).
inline SpectrumReport spectrum(const Eigen::MatrixXd& m, int truncation) {
  if (m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(truncation) * truncation)
    throw ShapeMismatch("spectrum: matrix is not truncation^2 square");
  if (!m.allFinite()) throw PreconditionError("spectrum: matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("spectrum: eigensolver failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });
  SpectrumReport rep;
  rep.truncation = truncation;
  rep.eigenvalues.resize(ev.size());
  rep.eigenvectors.resize(vecs.rows(), vecs.cols());
  rep.gap_a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    rep.eigenvalues(i) = ev(order[static_cast<std::size_t>(i)]);
    rep.eigenvectors.col(i) = vecs.col(order[static_cast<std::size_t>(i)]);
    rep.gap_a = std::min(rep.gap_a, std::abs(rep.eigenvalues(i).real()));
    if (rep.eigenvalues(i).real() < 0.0) ++rep.n_unstable;
  }
  if (ev.size() == 0) rep.gap_a = 0.0;
  return rep;
}

/// lambda0 = pi ||f0||^2 / (2 lambda1^3 |D|).
inline double lambda0(const ModelParams& p, const SpectralField& f0) {
  const double l1 = spectral_gap_condition(p).lambda1;
  if (!(l1 > 0.0)) throw PreconditionError("lambda0: lambda1 must be > 0");
  const double n = l2_norm(f0);
  return std::numbers::pi * n * n / (2.0 * l1 * l1 * l1 * p.grid.area());
}

/// Smallness condition for exponential stability: gap condition and ||f0|| < sqrt(2|D|/pi) lambda1^2.
inline bool corollary_smallness(const ModelParams& p, const SpectralField& f0) {
  const auto gap = spectral_gap_condition(p);
  if (!gap.holds) return false;
  return l2_norm(f0) < std::sqrt(2.0 * p.grid.area() / std::numbers::pi) * gap.lambda1 * gap.lambda1;
}

/// Stationary averaged state together with the spectrum of L there.
struct StationaryAnalysis {
  ModelParams params;
  StationaryState state;
  SpectrumReport spectrum;
};

inline StationaryAnalysis analyze_stationary(const ModelParams& p, const SpectralField& f0, int truncation,
                                             const NewtonOptions& opt = {}) {
  StationaryAnalysis a{p, solve_stationary(p, f0, opt), {}};
  a.spectrum = spectrum(assemble_L(p, a.state.omega0, truncation), truncation);
  return a;
}

}  // namespace qg
