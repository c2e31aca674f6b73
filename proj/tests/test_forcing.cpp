#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qg/forcing_io.hpp"

using namespace qg;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

Grid small_grid() { return Grid{8, 8}; }

ForcingSpec single_term(double eta = 1.0, double omega = 1.0, double phase = 0.0) {
  const Grid g = small_grid();
  return ForcingSpec{SpectralField::mode(g, 1, 1, 0.1), {{SpectralField::mode(g, 2, 1, 0.2), omega, phase}}, eta};
}

ForcingSpec quasi_periodic() {
  const Grid g = small_grid();
  return ForcingSpec{SpectralField::mode(g, 1, 1, 0.1),
                     {{SpectralField::mode(g, 2, 1, 0.2), 1.0, 0.0},
                      {SpectralField::mode(g, 1, 3, 0.15), std::sqrt(2.0), 0.7}},
                     1.0};
}

ForcingSpec at_frequencies(std::initializer_list<double> omegas, double eta = 1.0) {
  const Grid g = small_grid();
  ForcingSpec s{SpectralField(g), {}, eta};
  int k = 1;
  for (double w : omegas) s.terms.push_back({SpectralField::mode(g, k++, 1, 1.0), w, 0.0});
  return s;
}

double diff_norm(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b); }

// Composite Simpson for (1/T) int_a^{a+T} f, independent of the closed form used by the library.
SpectralField simpson_window_mean(const ForcingSpec& s, double a, double T, long panels) {
  const double h = T / panels;
  SpectralField acc(s.grid());
  for (long i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += (w * h / 3.0 / T) * evaluate(s, a + i * h);
  }
  return acc;
}

}  // namespace

TEST_CASE("steady forcing evaluates to its mean", "[forcing]") {
  ForcingSpec s{SpectralField::mode(small_grid(), 1, 2, 0.3), {}, 4.0};
  for (double tau : {0.0, 1.3, -7.0, 1e5}) CHECK(diff_norm(evaluate(s, tau), s.mean) == 0.0);
}

TEST_CASE("single term at zero phase starts at mean plus amplitude", "[forcing]") {
  const auto s = single_term(3.0);
  CHECK(diff_norm(evaluate(s, 0.0), s.mean + s.terms[0].amplitude) == 0.0);
  CHECK(evaluate(s, pi)(2, 1) == Approx(-0.2));
}

TEST_CASE("single term is periodic in original time with period 2 pi / (omega eta)", "[forcing]") {
  const auto s = single_term(16.0, 1.5, 0.4);
  const double period = 2.0 * pi / (1.5 * 16.0);
  for (double t : {0.0, 0.11, 2.7}) {
    CHECK(diff_norm(evaluate_at_time(s, t), evaluate_at_time(s, t + period)) < 1e-13);
    CHECK(diff_norm(evaluate_at_time(s, t), evaluate(s, 16.0 * t)) == 0.0);
  }
  // In fast time the period does not involve eta.
  CHECK(diff_norm(evaluate(s, 0.3), evaluate(s, 0.3 + 2.0 * pi / 1.5)) < 1e-13);
}

TEST_CASE("spec with one generator is periodic with the generator period", "[forcing]") {
  const auto s = at_frequencies({2.0, 3.0}, 1.0);
  const auto basis = frequency_basis(s);
  REQUIRE(basis.size() == 1);
  const double period = 2.0 * pi / basis[0];
  for (double t : {0.0, 0.5, 4.0}) CHECK(diff_norm(evaluate_at_time(s, t), evaluate_at_time(s, t + period)) < 1e-12);
}

TEST_CASE("average is the mean and does not depend on eta", "[forcing]") {
  for (double eta : {1.0, 8.0, 100.0}) {
    CHECK(diff_norm(average(single_term(eta)), single_term().mean) == 0.0);
    CHECK(diff_norm(average(quasi_periodic().with_eta(eta)), quasi_periodic().mean) == 0.0);
  }
}

TEST_CASE("long-window quadrature reproduces the average", "[forcing]") {
  const auto s = quasi_periodic();
  const double T = 1e4 * slowest_period(s);
  const SpectralField numeric = simpson_window_mean(s, 0.0, T, 2 * 1'000'000);
  CHECK(diff_norm(numeric, average(s)) < 1e-3);
  CHECK(diff_norm(numeric, average(s)) < 1e-5);  // the window error itself is O(1/T)
}

TEST_CASE("time_average_error vanishes for steady forcing", "[forcing]") {
  ForcingSpec s{SpectralField::mode(small_grid(), 1, 1, 1.0), {}, 1.0};
  const auto rep = time_average_error(s, 0.5, {1.0, 10.0, 100.0});
  for (double v : rep.sigma) CHECK(v == 0.0);
  CHECK(rep.m_gamma == 0.0);
}

TEST_CASE("time_average_error of one cosine is bounded by 2|a|/T", "[forcing]") {
  const auto s = single_term(1.0);
  for (double gamma : {-0.5, 0.0, 0.5, 1.0}) {
    const auto rep = time_average_error(s, gamma, {10.0, 100.0, 1000.0});
    const double a = sobolev_norm(s.terms[0].amplitude, gamma);
    for (std::size_t i = 0; i < rep.windows.size(); ++i) {
      CHECK(rep.sigma[i] >= 0.0);
      CHECK(rep.sigma[i] <= 2.0 * a / rep.windows[i] + 1e-15);
    }
  }
}

TEST_CASE("time_average_error matches window quadrature", "[forcing]") {
  const auto s = quasi_periodic();
  const double P = slowest_period(s);
  for (double T : {10.0, 37.0}) {
    double worst = 0.0;
    for (int b = 0; b < 8; ++b)
      worst = std::max(worst, sobolev_norm(simpson_window_mean(s, b * P / 8.0, T, 20000) - s.mean, 0.5));
    CHECK(time_average_error(s, 0.5, {T}).sigma[0] == Approx(worst).epsilon(1e-9));
  }
}

TEST_CASE("doubling the window halves the quasi-periodic error", "[forcing]") {
  const auto s = quasi_periodic();
  // sigma(T) carries a factor |sin(omega T / 2)| per term, so a doubling only halves it when
  // neither T nor 2T sits near a cancellation; these windows avoid them for both frequencies.
  const std::vector<double> windows{111.0, 222.0, 444.0, 888.0};
  const auto rep = time_average_error(s, 0.0, windows);
  for (std::size_t i = 0; i + 1 < windows.size(); ++i)
    CHECK(rep.sigma[i] / rep.sigma[i + 1] == Approx(2.0).epsilon(0.2));
}

TEST_CASE("time_average_error rejects gamma outside [-1, 1]", "[forcing]") {
  CHECK_THROWS_AS(time_average_error(single_term(), 1.5, {1.0}), PreconditionError);
}

TEST_CASE("frequency basis reduces commensurate frequencies", "[forcing]") {
  auto b = frequency_basis(at_frequencies({1.0, 2.0, 3.0}));
  REQUIRE(b.size() == 1);
  CHECK(b[0] == Approx(1.0));

  b = frequency_basis(at_frequencies({1.0, std::sqrt(2.0)}));
  REQUIRE(b.size() == 2);
  CHECK(b[0] == Approx(1.0));
  CHECK(b[1] == Approx(std::sqrt(2.0)));

  b = frequency_basis(at_frequencies({1.0, 1.5}));
  REQUIRE(b.size() == 1);
  CHECK(b[0] == Approx(0.5));
}

TEST_CASE("frequency basis is in original-time units", "[forcing]") {
  const auto b = frequency_basis(at_frequencies({1.0, 1.5}, 8.0));
  REQUIRE(b.size() == 1);
  CHECK(b[0] == Approx(4.0));
  CHECK(frequency_basis(ForcingSpec{SpectralField(small_grid()), {}, 1.0}).empty());
}

TEST_CASE("every frequency is an integer combination of the basis", "[forcing]") {
  const auto s = at_frequencies({1.0, std::sqrt(2.0), 1.0 + std::sqrt(2.0), 2.5});
  const auto b = frequency_basis(s);
  CHECK(b.size() == 2);
  for (const auto& t : s.terms) CHECK(detail::small_integer_combination(t.omega, b, 6, 1e-9));
}

TEST_CASE("forcing file round trip", "[forcing][io]") {
  const Grid g = small_grid();
  const auto s = parse_forcing_text(
      "eta = 16\n"
      "mean = 1 1 0.1; 2 2 0.05\n"
      "# comment line\n"
      "[term1]\n"
      "modes = 2 1 0.2\n"
      "omega = 1\n"
      "[term2]\n"
      "modes = 1 3 0.15; 3 1 -0.1\n"
      "omega = 1.4142135623730951\n"
      "phase = 0.7\n",
      g);
  CHECK(s.eta == 16.0);
  CHECK(s.mean(1, 1) == 0.1);
  CHECK(s.mean(2, 2) == 0.05);
  REQUIRE(s.terms.size() == 2);
  CHECK(s.terms[0].amplitude(2, 1) == 0.2);
  CHECK(s.terms[0].phase == 0.0);
  CHECK(s.terms[1].amplitude(3, 1) == -0.1);
  CHECK(s.terms[1].phase == 0.7);
  CHECK(s.terms[1].omega == Approx(std::sqrt(2.0)));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("forcing parser collects every problem", "[forcing][io]") {
  try {
    parse_forcing_text(
        "eta = fast\n"
        "mean = 1 1\n"
        "colour = red\n"
        "[term1]\n"
        "modes = 99 1 0.2\n"
        "omega = -1\n"
        "[extra]\n"
        "x = 1\n",
        small_grid());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.problems().size() >= 5);
  }
  CHECK_THROWS_AS(load_forcing("/nonexistent/forcing.ini", small_grid()), ParseError);
}
