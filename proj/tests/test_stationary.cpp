#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qg/random_field.hpp"
#include "qg/stationary.hpp"

using namespace qg;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

ModelParams demo_params(int n = 32, double beta = 0.1) { return ModelParams{1.0, 1.0, beta, Grid{n, n}}; }

SpectralField demo_f0(const Grid& g) { return SpectralField::mode(g, 1, 1, 0.1); }

Eigen::VectorXd truncated(const SpectralField& f, int T) { return f.coeffs().topLeftCorner(T, T).reshaped(); }

}  // namespace

TEST_CASE("zero forcing has the zero stationary state", "[stationary]") {
  const auto p = demo_params(16);
  const auto s = solve_stationary(p, SpectralField(p.grid));
  CHECK(s.omega0.max_abs() == 0.0);
  CHECK(s.newton_iters <= 1);
  CHECK(s.residual_norm == 0.0);
}

TEST_CASE("manufactured stationary state is recovered", "[stationary]") {
  const auto p = demo_params(32);
  const SpectralField w = SpectralField::mode(p.grid, 1, 1, 0.05) + SpectralField::mode(p.grid, 2, 3, 0.03) +
                          SpectralField::mode(p.grid, 3, 1, -0.02);
  const SpectralField f0 = apply_A(p, w) + jacobian(inverse_laplacian(w), w);
  const auto s = solve_stationary(p, f0);
  CHECK((s.omega0 - w).max_abs() < 1e-10);
  CHECK(s.residual_norm < 1e-11);
}

TEST_CASE("demo stationary state converges quickly and uniquely", "[stationary]") {
  const auto p = demo_params(32);
  const auto f0 = demo_f0(p.grid);
  const auto a = solve_stationary(p, f0, {.tol = 1e-11});
  const auto b = solve_stationary(p, f0, {.tol = 1e-11}, SpectralField::mode(p.grid, 2, 2, 0.01));
  CHECK(a.newton_iters <= 6);
  CHECK(b.newton_iters <= 6);
  CHECK(a.residual_norm < 1e-11);
  CHECK((a.omega0 - b.omega0).max_abs() < 1e-9);
  CHECK(l2_norm(a.omega0) > 0.0);
}

TEST_CASE("independent residual agrees with the Newton residual", "[stationary]") {
  const auto p = demo_params(32);
  const auto f0 = demo_f0(p.grid);
  const auto s = solve_stationary(p, f0);
  CHECK(std::abs(independent_residual_norm(p, s.omega0, f0) - s.residual_norm) < 1e-12);
  // Away from the solution the two paths still agree.
  const SpectralField w = random_initial_state(p.grid, 11);
  const double r1 = l2_norm(stationary_residual(p, w, f0));
  CHECK(independent_residual_norm(p, w, f0) == Approx(r1).epsilon(1e-12));
}

TEST_CASE("stationary solve requires the gap condition", "[stationary]") {
  auto p = demo_params(16, 10.0);
  CHECK_THROWS_WITH(solve_stationary(p, demo_f0(p.grid)), Catch::Matchers::ContainsSubstring("spectral-gap"));
}

TEST_CASE("Newton reports failure when the iteration budget is exhausted", "[stationary]") {
  const auto p = demo_params(16);
  CHECK_THROWS_AS(solve_stationary(p, SpectralField::mode(p.grid, 1, 2, 5.0), {.tol = 1e-14, .max_iters = 1}),
                  ConvergenceFailure);
}

TEST_CASE("L at rest without beta is the diagonal of A", "[linearization]") {
  const auto p = demo_params(16, 0.0);
  const int T = 8;
  const Eigen::MatrixXd M = assemble_L(p, SpectralField(p.grid), T);
  for (int l = 1; l <= T; ++l)
    for (int k = 1; k <= T; ++k) {
      const int i = (k - 1) + T * (l - 1);
      CHECK(M(i, i) == Approx(p.nu * p.grid.mu(k, l) + p.r).epsilon(1e-14));
      CHECK(M.col(i).cwiseAbs().sum() - std::abs(M(i, i)) < 1e-12);
    }
}

TEST_CASE("assembled L matches the matrix-free operator", "[linearization]") {
  const auto p = demo_params(32);
  const auto w0 = solve_stationary(p, demo_f0(p.grid)).omega0;
  const int T = 16;
  const Eigen::MatrixXd M = assemble_L(p, w0, T);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Eigen::VectorXd v = truncated(random_field(p.grid, seed), T);
    const SpectralField h = embed_truncated(p.grid, v, T);
    CHECK((M * v - truncated(apply_L(p, w0, h), T)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("L is the derivative of F", "[linearization]") {
  const auto p = demo_params(32);
  const auto f0 = demo_f0(p.grid);
  const auto w0 = solve_stationary(p, f0).omega0;
  const int T = 16;
  const Eigen::MatrixXd M = assemble_L(p, w0, T);
  for (std::uint64_t seed : {5u, 6u}) {
    const SpectralField e = embed_truncated(p.grid, truncated(random_initial_state(p.grid, seed, 1.0), T), T);
    const SpectralField F0 = stationary_residual(p, w0, f0);
    std::vector<double> err_free, err_mat;
    for (double h : {1e-4, 1e-5}) {
      const SpectralField fd = (1.0 / h) * (stationary_residual(p, w0 + h * e, f0) - F0);
      err_free.push_back(l2_norm(fd - apply_L(p, w0, e)));
      err_mat.push_back((truncated(fd, T) - M * truncated(e, T)).norm());
    }
    CHECK(err_free[0] / err_free[1] >= 5.0);
    CHECK(err_free[0] / err_free[1] <= 20.0);
    CHECK(err_mat[0] / err_mat[1] >= 5.0);
    CHECK(err_mat[0] / err_mat[1] <= 20.0);
  }
}

TEST_CASE("assemble_L rejects truncations beyond the dealiased band", "[linearization]") {
  const auto p = demo_params(32);
  CHECK(max_truncation(p.grid) == 21);
  CHECK_THROWS_AS(assemble_L(p, SpectralField(p.grid), 22), PreconditionError);
  CHECK_THROWS_AS(assemble_L(p, SpectralField(p.grid), 0), PreconditionError);
  CHECK(max_truncation(Grid{48, 48}) == 32);
}

TEST_CASE("spectrum of the diagonal case", "[spectrum]") {
  const auto p = demo_params(16, 0.0);
  const int T = 6;
  const auto rep = spectrum(assemble_L(p, SpectralField(p.grid), T), T);
  CHECK(rep.truncation == T);
  CHECK(rep.eigenvalues.size() == T * T);
  CHECK(rep.n_unstable == 0);
  std::vector<double> expected;
  for (int k = 1; k <= T; ++k)
    for (int l = 1; l <= T; ++l) expected.push_back(p.nu * p.grid.mu(k, l) + p.r);
  std::sort(expected.begin(), expected.end());
  for (int i = 0; i < T * T; ++i) {
    CHECK(rep.eigenvalues(i).real() == Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-12));
    CHECK(rep.eigenvalues(i).imag() == 0.0);
  }
  CHECK(rep.gap_a == Approx(3.0));
}

TEST_CASE("beta keeps the spectrum of A above the coercivity bound", "[spectrum]") {
  for (double beta : {0.1, 0.5, 0.6}) {
    const auto p = demo_params(24, beta);
    REQUIRE(spectral_gap_condition(p).holds);
    const auto rep = spectrum(assemble_L(p, SpectralField(p.grid), 12), 12);
    CHECK(rep.eigenvalues(0).real() >= decay_rate_bound(p));
    CHECK(rep.n_unstable == 0);
  }
}

TEST_CASE("spectrum eigenvectors satisfy the eigen-equation", "[spectrum]") {
  const auto p = demo_params(32);
  const auto w0 = solve_stationary(p, demo_f0(p.grid)).omega0;
  const Eigen::MatrixXd M = assemble_L(p, w0, 10);
  const auto rep = spectrum(M, 10);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXcd v = rep.eigenvectors.col(i);
    CHECK((M.cast<std::complex<double>>() * v - rep.eigenvalues(i) * v).norm() < 1e-10 * v.norm());
  }
  for (int i = 1; i < rep.eigenvalues.size(); ++i) CHECK(rep.eigenvalues(i).real() >= rep.eigenvalues(i - 1).real());
}

TEST_CASE("leading eigenvalues converge under truncation refinement", "[spectrum]") {
  const auto p = demo_params(48);
  const auto w0 = solve_stationary(p, demo_f0(p.grid)).omega0;
  const auto r16 = spectrum(assemble_L(p, w0, 16), 16);
  const auto r24 = spectrum(assemble_L(p, w0, 24), 24);
  CHECK(r16.n_unstable == 0);
  CHECK(r24.n_unstable == r16.n_unstable);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(r16.eigenvalues(i) - r24.eigenvalues(i)) < 1e-6);
  CHECK(r24.gap_a == Approx(r16.gap_a).epsilon(1e-6));
}

TEST_CASE("lambda0 arithmetic", "[thresholds]") {
  const ModelParams p{1.0, 1.0, 0.0, Grid{16, 16}};
  CHECK(lambda0(p, SpectralField(p.grid)) == 0.0);
  // ||mode(1,1)||_{L2} = pi/2 on (0, pi)^2, so this has unit norm.
  const SpectralField unit = SpectralField::mode(p.grid, 1, 1, 2.0 / pi);
  CHECK(lambda0(p, unit) == Approx(1.0 / (2.0 * pi)).epsilon(1e-14));
  CHECK(lambda0(p, 2.0 * unit) == Approx(4.0 * lambda0(p, unit)).epsilon(1e-14));
  CHECK_THROWS_AS(lambda0(ModelParams{1.0, 1.0, 10.0, Grid{16, 16}}, unit), PreconditionError);
}

TEST_CASE("corollary smallness arithmetic", "[thresholds]") {
  const ModelParams p{1.0, 1.0, 0.0, Grid{16, 16}};
  const SpectralField unit = SpectralField::mode(p.grid, 1, 1, 2.0 / pi);
  CHECK(corollary_smallness(p, SpectralField(p.grid)));
  CHECK(corollary_smallness(p, unit));
  CHECK(corollary_smallness(p, 2.5 * unit));
  CHECK_FALSE(corollary_smallness(p, 2.51 * unit));  // threshold sqrt(2 pi) = 2.5066
  CHECK_FALSE(corollary_smallness(p, 10.0 * unit));
  CHECK_FALSE(corollary_smallness(ModelParams{1.0, 1.0, 10.0, Grid{16, 16}}, SpectralField(p.grid)));
}
