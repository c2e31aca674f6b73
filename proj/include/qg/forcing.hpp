#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qg/stepper.hpp"

namespace qg {

struct ForcingTerm {
  SpectralField amplitude;
  double omega = 1.0;  // base frequency
  double phase = 0.0;
};

/// f(x,y,eta t) = mean + sum_j amplitude_j cos(omega_j eta t + phase_j).
///
/// Written in fast time tau = eta t this is mean + sum_j amplitude_j cos(omega_j tau + phase_j),
/// which is what evaluate() returns; evaluate_at_time() takes original time t.
struct ForcingSpec {
  SpectralField mean;
  std::vector<ForcingTerm> terms;
  double eta = 1.0;

  const Grid& grid() const { return mean.grid(); }
  double epsilon() const { return 1.0 / eta; }
  bool steady() const { return terms.empty(); }

  void validate() const {
    if (!(eta >= 1.0) || !std::isfinite(eta)) throw PreconditionError("forcing: eta must be >= 1");
    if (!mean.all_finite()) throw PreconditionError("forcing: mean is not finite");
    for (const auto& t : terms) {
      require_same_grid(mean.grid(), t.amplitude.grid(), "forcing term");
      if (!(t.omega > 0.0) || !std::isfinite(t.omega))
        throw PreconditionError("forcing: term omega must be > 0");
      if (!std::isfinite(t.phase) || !t.amplitude.all_finite())
        throw PreconditionError("forcing: term is not finite");
    }
  }

  /// Same spec with the oscillating part removed.
  ForcingSpec averaged() const { return ForcingSpec{mean, {}, eta}; }

  ForcingSpec with_eta(double new_eta) const { return ForcingSpec{mean, terms, new_eta}; }
};

inline SpectralField evaluate(const ForcingSpec& spec, double tau) {
  SpectralField f = spec.mean;
  for (const auto& t : spec.terms) f += std::cos(t.omega * tau + t.phase) * t.amplitude;
  return f;
}

inline SpectralField evaluate_at_time(const ForcingSpec& spec, double t) {
  return evaluate(spec, spec.eta * t);
}

/// Time average of the family; exact because every term is a pure cosine.
inline SpectralField average(const ForcingSpec& spec) { return spec.mean; }

/// Shortest oscillation period in fast time (0 when steady).
inline double fastest_period(const ForcingSpec& spec) {
  double w = 0.0;
  for (const auto& t : spec.terms) w = std::max(w, t.omega);
  return w > 0.0 ? 2.0 * std::numbers::pi / w : 0.0;
}

/// Longest oscillation period in fast time (0 when steady).
inline double slowest_period(const ForcingSpec& spec) {
  if (spec.terms.empty()) return 0.0;
  double w = spec.terms.front().omega;
  for (const auto& t : spec.terms) w = std::min(w, t.omega);
  return 2.0 * std::numbers::pi / w;
}

/// The forcing as a function of fast time, for the stepper.
inline TimeForcing fast_time_forcing(const ForcingSpec& spec) {
  if (spec.steady()) return TimeForcing::steady(spec.mean);
  return {[spec](double tau) { return evaluate(spec, tau); }, fastest_period(spec)};
}

struct AverageReport {
  std::vector<double> windows;
  std::vector<double> sigma;
  double gamma = 0.0;
  double m_gamma = 0.0;  // largest observed sigma
};

/// sup over base points t of ||(1/T) int_t^{t+T} f(tau) dtau - f0||_gamma for each window T.
/// Base points are 8 uniformly spaced points over one slowest period.
inline AverageReport time_average_error(const ForcingSpec& spec, double gamma,
                                        const std::vector<double>& windows) {
  if (!(gamma >= -1.0 && gamma <= 1.0))
    throw PreconditionError("time_average_error: gamma must lie in [-1, 1]");
  AverageReport rep;
  rep.gamma = gamma;
  rep.windows = windows;
  const double period = slowest_period(spec);
  for (double T : windows) {
    if (!(T > 0.0)) throw PreconditionError("time_average_error: windows must be positive");
    double worst = 0.0;
    for (int b = 0; b < 8 && !spec.steady(); ++b) {
      const double t0 = b * period / 8.0;
      SpectralField deviation(spec.grid());
      for (const auto& term : spec.terms) {
        const double mean_cos = (std::sin(term.omega * (t0 + T) + term.phase) -
                                 std::sin(term.omega * t0 + term.phase)) /
                                (term.omega * T);
        deviation += mean_cos * term.amplitude;
      }
      worst = std::max(worst, sobolev_norm(deviation, gamma));
    }
    rep.sigma.push_back(worst);
    rep.m_gamma = std::max(rep.m_gamma, worst);
  }
  return rep;
}

namespace detail {

/// Smallest q <= max_den with |x - p/q| <= tol * max(1,|x|); returns {p,q} or {0,0}.
inline std::pair<long, long> rational_approx(double x, long max_den, double tol) {
  for (long q = 1; q <= max_den; ++q) {
    const double p = std::round(x * q);
    if (std::abs(x - p / q) <= tol * std::max(1.0, std::abs(x))) return {static_cast<long>(p), q};
  }
  return {0, 0};
}

/// True when target equals sum c_j basis_j with integers |c_j| <= bound (tolerance relative).
inline bool small_integer_combination(double target, const std::vector<double>& basis, int bound,
                                      double tol) {
  const std::size_t m = basis.size();
  if (m == 0) return std::abs(target) <= tol;
  std::vector<int> c(m, -bound);
  const double scale = std::max(1.0, std::abs(target));
  while (true) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += c[j] * basis[j];
    if (std::abs(s - target) <= tol * scale) return true;
    std::size_t j = 0;
    while (j < m && c[j] == bound) c[j++] = -bound;
    if (j == m) return false;
    ++c[j];
  }
}

}  // namespace detail

inline constexpr double kRationalTolerance = 1e-9;
inline constexpr long kMaxDenominator = 64;

/// Rationally independent generators of the term frequencies omega_j * eta.
///
/// Frequencies whose ratios are rational (denominator <= 64, tolerance 1e-9) are merged into
/// their common divisor; a generator that is a small integer combination of the others is
/// then dropped.
inline std::vector<double> frequency_basis(const ForcingSpec& spec) {
  std::vector<double> freqs;
  for (const auto& t : spec.terms) {
    const double f = t.omega * spec.eta;
    const bool seen = std::any_of(freqs.begin(), freqs.end(), [&](double g) {
      return std::abs(g - f) <= kRationalTolerance * std::max(1.0, f);
    });
    if (!seen) freqs.push_back(f);
  }
  std::sort(freqs.begin(), freqs.end());

  struct Member {
    long p, q;
  };
  struct Class {
    double rep;
    std::vector<Member> members;
  };
  std::vector<Class> classes;
  for (double f : freqs) {
    bool placed = false;
    for (auto& c : classes) {
      const auto [p, q] = detail::rational_approx(f / c.rep, kMaxDenominator, kRationalTolerance);
      if (q != 0) {
        c.members.push_back({p, q});
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({f, {{1, 1}}});
  }

  std::vector<double> gens;
  for (const auto& c : classes) {
    long lcm = 1;
    for (const auto& m : c.members) lcm = std::lcm(lcm, m.q);
    long g = 0;
    for (const auto& m : c.members) g = std::gcd(g, m.p * (lcm / m.q));
    gens.push_back(c.rep * static_cast<double>(g) / static_cast<double>(lcm));
  }

  // Drop generators that are integer combinations of the remaining ones, largest first.
  std::sort(gens.begin(), gens.end());
  for (std::size_t i = gens.size(); i-- > 0;) {
    std::vector<double> others;
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (j != i) others.push_back(gens[j]);
    if (others.size() <= 4 && detail::small_integer_combination(gens[i], others, 4, kRationalTolerance))
      gens.erase(gens.begin() + static_cast<long>(i));
  }
  return gens;
}

}  // namespace qg
