#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "qg/forcing.hpp"
#include "qg/parallel.hpp"
#include "qg/random_field.hpp"
#include "qg/stationary.hpp"

namespace qg {

namespace detail {

inline void require_stable(const StationaryAnalysis& a, const char* where) {
  if (a.spectrum.n_unstable > 0)
    throw PreconditionError(std::string(where) + ": stationary state has " + std::to_string(a.spectrum.n_unstable) +
                            " unstable modes; tracking would need the stable-manifold construction");
  if (!(a.spectrum.gap_a > 0.0)) throw PreconditionError(std::string(where) + ": spectral gap a must be > 0");
}

/// Spin-up length k / (eps a), rounded up to whole forcing periods (or whole steps when steady)
/// so the recorded window starts at forcing phase zero.
inline double spinup_length(const ForcingSpec& spec, double eps, double gap_a, double efolds, double dt) {
  const double raw = efolds / (eps * gap_a);
  const double unit = spec.steady() ? dt : slowest_period(spec);
  return std::ceil(raw / unit - 1e-9) * unit;
}

}  // namespace detail

struct BoundedSolution {
  Trajectory trajectory;     // tau in [0, horizon]
  double sup_distance_half;  // sup over samples of ||w*(tau) - w0||_{1/2}
};

/// Forward-attracting representative of the bounded solution of the oscillating system near a
/// stable stationary averaged state: start at w0, spin up for `spinup_efolds` / (eps a) in fast
/// time, then record tau in [0, horizon].
inline BoundedSolution track_bounded_solution(const StationaryAnalysis& a, const ForcingSpec& spec, double eps,
                                              double horizon, const StepperConfig& stepper, long sample_every = 1,
                                              double spinup_efolds = 10.0) {
  detail::require_stable(a, "bounded");
  spec.validate();
  stepper.validate();
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("bounded: eps must lie in (0, 1]");
  if (!(horizon > 0.0)) throw PreconditionError("bounded: horizon must be > 0");
  if (sample_every < 1) throw PreconditionError("bounded: sample_every must be >= 1");
  const ModelParams& p = a.params;
  require_same_grid(p.grid, spec.grid(), "bounded");
  const TimeForcing forcing = fast_time_forcing(spec);
  stepper.check_resolution(forcing.fastest_period);

  Stepper st(vorticity_problem(p, forcing, eps), stepper.scheme);
  const double spin = detail::spinup_length(spec, eps, a.spectrum.gap_a, spinup_efolds, stepper.dt);
  SpectralField w = march(st, a.state.omega0, -spin, 0.0, stepper.dt);

  BoundedSolution out{{{}, {}, p}, 0.0};
  const long n = step_count(0.0, horizon, stepper.dt);
  march(st, std::move(w), 0.0, horizon, stepper.dt, [&](long i, double t, const SpectralField& u) {
    if (i % sample_every == 0 || i == n) {
      out.trajectory.times.push_back(t);
      out.trajectory.states.push_back(u);
      out.sup_distance_half = std::max(out.sup_distance_half, sobolev_norm(u - a.state.omega0, 0.5));
    }
  });
  return out;
}

struct DecayReport {
  std::vector<double> times;
  std::vector<double> distance;      // ||w - w*||_{1/2}
  std::vector<double> log_distance;  // ln of distance, clamped at the floor
  double fitted_rate = 0.0;          // least-squares decay rate over the pre-floor window
  double reference_rate = 0.0;       // eps * a
  std::size_t fit_begin = 0, fit_end = 0;  // half-open sample range used by the fit
};

inline constexpr double kDecayFloor = 1e-13;

/// Perturb the bounded solution at tau = 0 and measure how fast the perturbed orbit rejoins it.
/// Samples are taken at every forcing period (every step when steady); the fit skips the first
/// period and stops at the floor. `duration` <= 0 picks 40 / (eps a).
inline DecayReport decay_experiment(const StationaryAnalysis& a, const ForcingSpec& spec, double eps,
                                    const SpectralField& perturbation, const StepperConfig& stepper,
                                    double duration = 0.0, double spinup_efolds = 10.0) {
  detail::require_stable(a, "decay");
  spec.validate();
  stepper.validate();
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("decay: eps must lie in (0, 1]");
  const ModelParams& p = a.params;
  require_same_grid(p.grid, perturbation.grid(), "decay");
  const double size_limit = 0.1 * sobolev_norm(a.state.omega0, 0.5) + 1e-3;
  if (sobolev_norm(perturbation, 0.5) > size_limit * (1.0 + 1e-12))
    throw PreconditionError("decay: perturbation ||.||_{1/2} exceeds 0.1 ||w0||_{1/2} + 1e-3");
  const TimeForcing forcing = fast_time_forcing(spec);
  stepper.check_resolution(forcing.fastest_period);

  const double gap = a.spectrum.gap_a;
  const double unit = spec.steady() ? stepper.dt : slowest_period(spec);
  if (!(duration > 0.0)) duration = 40.0 / (eps * gap);
  duration = std::ceil(duration / unit - 1e-9) * unit;

  Stepper ref_st(vorticity_problem(p, forcing, eps), stepper.scheme);
  Stepper per_st(vorticity_problem(p, forcing, eps), stepper.scheme);
  const double spin = detail::spinup_length(spec, eps, gap, spinup_efolds, stepper.dt);
  SpectralField ref = march(ref_st, a.state.omega0, -spin, 0.0, stepper.dt);
  SpectralField per = ref + perturbation;

  DecayReport rep;
  rep.reference_rate = eps * gap;
  const long n = step_count(0.0, duration, stepper.dt);
  const double dt = duration / static_cast<double>(n);
  const long every = spec.steady() ? 1 : std::max(1L, std::lround(unit / dt));
  const double d0 = sobolev_norm(perturbation, 0.5);
  auto record = [&](double t) {
    const double d = sobolev_norm(per - ref, 0.5);
    if (d0 > 0.0 && d > 10.0 * d0)
      throw ConvergenceFailure("decay: distance grew tenfold by tau = " + std::to_string(t) +
                               " (unstable state or perturbation too large)");
    rep.times.push_back(t);
    rep.distance.push_back(d);
    rep.log_distance.push_back(std::log(std::max(d, kDecayFloor)));
  };
  record(0.0);
  for (long i = 1; i <= n; ++i) {
    const double t_prev = static_cast<double>(i - 1) * dt;
    ref = ref_st.step(ref, t_prev, dt);
    per = per_st.step(per, t_prev, dt);
    if (!ref.all_finite() || !per.all_finite()) throw BlowUp("decay: non-finite state", t_prev);
    if (i % every == 0 || i == n) record(i == n ? duration : static_cast<double>(i) * dt);
    if (rep.distance.back() < kDecayFloor && i % every == 0) break;
  }

  // Least-squares slope of log distance over samples after the first period, before the floor.
  std::size_t begin = 0;
  while (begin < rep.times.size() && rep.times[begin] < unit * (spec.steady() ? 0.0 : 1.0) - 1e-12) ++begin;
  std::size_t end = begin;
  while (end < rep.times.size() && rep.distance[end] >= kDecayFloor) ++end;
  rep.fit_begin = begin;
  rep.fit_end = end;
  if (end - begin < 2) {
    rep.fitted_rate = std::numeric_limits<double>::infinity();
    rep.fit_end = rep.fit_begin;
    return rep;
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double m = static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    st += rep.times[i];
    sy += rep.log_distance[i];
    stt += rep.times[i] * rep.times[i];
    sty += rep.times[i] * rep.log_distance[i];
  }
  rep.fitted_rate = -(m * sty - st * sy) / (m * stt - st * st);
  return rep;
}

struct FrequencyLine {
  double frequency;
  double magnitude;
};

struct FrequencyResponse {
  std::vector<FrequencyLine> candidates;
  std::vector<FrequencyLine> controls;
  double max_candidate = 0.0;
  double max_control = 0.0;

  /// Controls stay below 5% of the strongest candidate line.
  bool contract_holds() const { return max_control < 0.05 * max_candidate; }
};

namespace detail {

/// |(2/T) int_0^T s(t) exp(-i lambda t) dt| by the trapezoid rule on the sample times.
inline double line_magnitude(const std::vector<double>& t, const std::vector<double>& s, double lambda) {
  const double T = t.back() - t.front();
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const auto e0 = std::polar(1.0, -lambda * (t[i] - t.front()));
    const auto e1 = std::polar(1.0, -lambda * (t[i + 1] - t.front()));
    acc += 0.5 * (t[i + 1] - t[i]) * (s[i] * e0 + s[i + 1] * e1);
  }
  return std::abs(2.0 / T * acc);
}

}  // namespace detail

/// Harmonic content of s(t) = <w(t), probe> at candidate and control frequencies (in the
/// trajectory's time units). The trajectory must span 50 periods of the slowest nonzero candidate.
inline FrequencyResponse response_frequencies(const Trajectory& traj, const SpectralField& probe,
                                              const std::vector<double>& candidates,
                                              const std::vector<double>& controls = {}) {
  if (traj.size() < 2) throw PreconditionError("frequencies: trajectory needs at least two samples");
  const double T = traj.times.back() - traj.times.front();
  double slowest = 0.0;
  for (const auto* list : {&candidates, &controls})
    for (double f : *list)
      if (!(f >= 0.0) || !std::isfinite(f)) throw PreconditionError("frequencies: frequencies must be >= 0");
  for (double f : candidates)
    if (f > 0.0) slowest = slowest == 0.0 ? f : std::min(slowest, f);
  if (slowest > 0.0 && T < 50.0 * 2.0 * std::numbers::pi / slowest * (1.0 - 1e-9))
    throw PreconditionError("frequencies: trajectory spans " + std::to_string(T) +
                            ", shorter than 50 periods of the slowest candidate frequency");
  std::vector<double> s(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) s[i] = inner_product(traj.states[i], probe);
  FrequencyResponse out;
  for (double f : candidates) {
    out.candidates.push_back({f, detail::line_magnitude(traj.times, s, f)});
    out.max_candidate = std::max(out.max_candidate, out.candidates.back().magnitude);
  }
  for (double f : controls) {
    out.controls.push_back({f, detail::line_magnitude(traj.times, s, f)});
    out.max_control = std::max(out.max_control, out.controls.back().magnitude);
  }
  return out;
}

/// Distinct nonnegative values of sum c_j b_j with sum |c_j| <= order, including 0.
inline std::vector<double> combination_frequencies(const std::vector<double>& basis, int order = 3) {
  std::vector<double> out{0.0};
  std::vector<int> c(basis.size(), -order);
  if (basis.empty()) return out;
  while (true) {
    int l1 = 0;
    double f = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      l1 += std::abs(c[j]);
      f += c[j] * basis[j];
    }
    if (l1 <= order && f > 1e-12) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](double g) { return std::abs(g - f) <= 1e-9 * f; });
      if (!seen) out.push_back(f);
    }
    std::size_t j = 0;
    while (j < c.size() && c[j] == order) c[j++] = -order;
    if (j == c.size()) break;
    ++c[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Off-basis controls (k + phi - 1) b_min, k = 0..3, with phi the golden ratio.
inline std::vector<double> control_frequencies(const std::vector<double>& basis) {
  if (basis.empty()) return {};
  const double b = *std::min_element(basis.begin(), basis.end());
  std::vector<double> out;
  for (int k = 0; k < 4; ++k) out.push_back((k + std::numbers::phi - 1.0) * b);
  return out;
}

struct AttractorWindow {
  double t_transient = 5.0;  // slow time discarded before sampling
  double t_window = 2.0;     // slow time sampled
  int samples_per_member = 40;
};

struct AttractorRecord {
  double eta = 0.0;
  double dist = 0.0;  // sup over full-system samples of the distance to the averaged cloud
  std::size_t n_samples = 0;
};

namespace detail {

/// Post-transient samples of one member, integrated in fast time with time scale 1/eta.
inline std::vector<SpectralField> attractor_samples(const ModelParams& p, const TimeForcing& forcing, double eta,
                                                    const SpectralField& w0, const AttractorWindow& win,
                                                    const StepperConfig& stepper) {
  const double eps = 1.0 / eta;
  const double tau0 = win.t_transient / eps;
  const double tau1 = (win.t_transient + win.t_window) / eps;
  Stepper st(vorticity_problem(p, forcing, eps), stepper.scheme);
  SpectralField w = march(st, w0, 0.0, tau0, stepper.dt);
  const long n = step_count(tau0, tau1, stepper.dt);
  const long every = std::max(1L, n / std::max(1, win.samples_per_member));
  std::vector<SpectralField> out;
  march(st, std::move(w), tau0, tau1, stepper.dt, [&](long i, double, const SpectralField& u) {
    if (i % every == 0) out.push_back(u);
  });
  return out;
}

}  // namespace detail

/// One-sided Hausdorff distance in ||.||_{1/2} from the sampled attractor of the oscillating
/// system to that of the averaged system, for each eta. Member i starts from
/// random_initial_state(grid, seed + i) in both systems.
inline std::vector<AttractorRecord> attractor_distance(const ModelParams& p, const ForcingSpec& spec,
                                                       const std::vector<double>& eta_list, int n_initial,
                                                       const AttractorWindow& win, const StepperConfig& stepper,
                                                       std::uint64_t seed = 1, int jobs = 1) {
  p.validate();
  spec.validate();
  stepper.validate();
  require_same_grid(p.grid, spec.grid(), "attractor");
  if (!spectral_gap_condition(p).holds)
    throw PreconditionError("attractor: spectral-gap condition 4*nu*r > beta^2*|D|^2/pi^2 does not hold");
  if (n_initial < 1) throw PreconditionError("attractor: n_initial must be >= 1");
  if (!(win.t_transient >= 0.0) || !(win.t_window > 0.0) || win.samples_per_member < 1)
    throw PreconditionError("attractor: need t_transient >= 0, t_window > 0, samples_per_member >= 1");
  for (double eta : eta_list)
    if (!(eta >= 1.0)) throw PreconditionError("attractor: every eta must be >= 1");
  const TimeForcing full = fast_time_forcing(spec);
  const TimeForcing avg = TimeForcing::steady(average(spec));
  stepper.check_resolution(full.fastest_period);

  const std::size_t members = static_cast<std::size_t>(n_initial);
  const std::size_t per_eta = 2 * members;
  auto clouds = parallel_map(eta_list.size() * per_eta, jobs, [&](std::size_t job) {
    const double eta = eta_list[job / per_eta];
    const std::size_t r = job % per_eta;
    const SpectralField w0 = random_initial_state(p.grid, seed + r % members);
    return detail::attractor_samples(p, r < members ? full : avg, eta, w0, win, stepper);
  });

  std::vector<AttractorRecord> out;
  for (std::size_t e = 0; e < eta_list.size(); ++e) {
    AttractorRecord rec{eta_list[e], 0.0, 0};
    for (std::size_t i = 0; i < members; ++i)
      for (const auto& s : clouds[e * per_eta + i]) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = members; j < per_eta; ++j)
          for (const auto& sb : clouds[e * per_eta + j]) best = std::min(best, sobolev_norm(s - sb, 0.5));
        rec.dist = std::max(rec.dist, best);
        ++rec.n_samples;
      }
    out.push_back(rec);
  }
  return out;
}

}  // namespace qg
