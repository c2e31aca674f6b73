#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qg/forcing.hpp"
#include "qg/parallel.hpp"

namespace qg {

/// Finite-interval comparison of the oscillating flow against the averaged flow.
struct ComparisonConfig {
  ModelParams params;
  ForcingSpec spec;
  double T = 1.0;                 // slow-time horizon; each run covers tau in [0, T/eps]
  std::vector<double> epsilons;   // strictly decreasing, in (0, 1]
  SpectralField w0;               // shared initial state
  StepperConfig stepper;
  long sample_every = 1;
  int jobs = 1;
};

struct ComparisonRecord {
  double epsilon = 0.0;
  double sup_half = 0.0;  // sup ||z||_{1/2} over the sampled times
  double sup_da = 0.0;    // sup ||z||_{D(A)} (Laplacian proxy)
  double end_half = 0.0;  // ||z(T/eps)||_{1/2}
};

struct ComparisonReport {
  std::vector<ComparisonRecord> records;
};

inline void check_epsilons(const std::vector<double>& eps, const char* where) {
  if (eps.empty()) throw PreconditionError(std::string(where) + ": epsilon list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] <= 1.0))
      throw PreconditionError(std::string(where) + ": every epsilon must lie in (0, 1]");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      throw PreconditionError(std::string(where) + ": epsilons must be strictly decreasing");
  }
}

inline void require_gap(const ModelParams& p, const char* where) {
  if (!spectral_gap_condition(p).holds)
    throw PreconditionError(std::string(where) +
                            ": spectral-gap condition 4*nu*r > beta^2*|D|^2/pi^2 does not hold");
}

/// Run the averaged system from w0 over one unit of slow time and confirm it stays inside the
/// energy ball max(||w0||, ||f0|| / (lambda1 mu11)).
inline void preroll_bounded(const ModelParams& p, const SpectralField& f0, const SpectralField& w0,
                            const StepperConfig& stepper) {
  const double rate = decay_rate_bound(p);
  const double radius = std::max(l2_norm(w0), l2_norm(f0) / rate);
  const Trajectory pre = integrate(p, w0, TimeForcing::steady(f0), 0.0, 1.0, stepper, 1);
  for (const auto& s : pre.states)
    if (l2_norm(s) > radius * (1.0 + 1e-6) + 1e-12)
      throw PreconditionError("compare: averaged pre-roll left the absorbing ball (radius " +
                              std::to_string(radius) + ")");
}

/// Integrate the oscillating system and the averaged system from the same state over
/// tau in [0, T/eps] with identical steps, and record sup norms of their difference.
/// The sups are over sample points only, so they are lower bounds on the continuous sup.
inline ComparisonReport compare_finite_interval(const ComparisonConfig& cfg) {
  cfg.params.validate();
  cfg.spec.validate();
  cfg.stepper.validate();
  require_gap(cfg.params, "compare");
  check_epsilons(cfg.epsilons, "compare");
  if (!(cfg.T > 0.0)) throw PreconditionError("compare: T must be > 0");
  require_same_grid(cfg.params.grid, cfg.w0.grid(), "compare");
  require_same_grid(cfg.params.grid, cfg.spec.grid(), "compare");
  cfg.stepper.check_resolution(fastest_period(cfg.spec));

  const SpectralField f0 = average(cfg.spec);
  preroll_bounded(cfg.params, f0, cfg.w0, cfg.stepper);

  ComparisonReport rep;
  rep.records = parallel_map(cfg.epsilons.size(), cfg.jobs, [&](std::size_t i) {
    const double eps = cfg.epsilons[i];
    const double tau_end = cfg.T / eps;
    const Trajectory full = integrate(cfg.params, cfg.w0, fast_time_forcing(cfg.spec), 0.0, tau_end,
                                      cfg.stepper, cfg.sample_every, eps);
    const Trajectory avg = integrate(cfg.params, cfg.w0, TimeForcing::steady(f0), 0.0, tau_end,
                                     cfg.stepper, cfg.sample_every, eps);
    ComparisonRecord rec;
    rec.epsilon = eps;
    for (std::size_t s = 0; s < full.size(); ++s) {
      const SpectralField z = full.states[s] - avg.states[s];
      rec.sup_half = std::max(rec.sup_half, sobolev_norm(z, 0.5));
      rec.sup_da = std::max(rec.sup_da, sobolev_norm(z, 1.0));
    }
    rec.end_half = sobolev_norm(full.states.back() - avg.states.back(), 0.5);
    return rec;
  });
  return rep;
}

/// Deviation f0 - f(tau) of a forcing from its average, in fast time.
inline TimeForcing average_deviation(const ForcingSpec& spec) {
  if (spec.steady()) return TimeForcing::steady(SpectralField(spec.grid()));
  return {[spec](double tau) { return spec.mean - evaluate(spec, tau); }, fastest_period(spec)};
}

/// Split form of v' = -eps A v + d(tau): eps (nu mu + r) is diagonal, the beta term and the
/// deviation are explicit.
inline SplitProblem aux_v_problem(const ModelParams& p, double eps, TimeForcing deviation) {
  SplitProblem prob;
  prob.rate = eps * (p.nu * laplacian_eigenvalues(p.grid).array() + p.r).matrix();
  prob.explicit_part = [p, eps, deviation = std::move(deviation)](double tau, const SpectralField& v) {
    SpectralField n = deviation.eval(tau);
    if (p.beta != 0.0) n -= eps * beta_term(p, v);
    return n;
  };
  return prob;
}

/// Bounded solution of v' = -eps A v + d(tau), sampled on tau_grid (nondecreasing).
///
/// Integration starts from v = 0 about spinup_efolds / (eps * lambda1 * mu11) before
/// tau_grid[0] (rounded up to whole steps); lambda1 * mu11 bounds the decay rate of
/// exp(-eps A tau) from below, so the start-up transient is damped by at least exp(-spinup_efolds).
inline std::vector<SpectralField> bounded_linear_response(const ModelParams& p, double eps,
                                                          const TimeForcing& deviation,
                                                          const std::vector<double>& tau_grid,
                                                          const StepperConfig& stepper,
                                                          double spinup_efolds = 10.0) {
  p.validate();
  stepper.validate();
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("aux_v: eps must lie in (0, 1]");
  if (tau_grid.empty()) throw PreconditionError("aux_v: tau grid is empty");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end()))
    throw PreconditionError("aux_v: tau grid must be nondecreasing");
  const double rate = decay_rate_bound(p);
  const double horizon = spinup_efolds / (eps * rate);
  if (!spectral_gap_condition(p).holds || !(rate > 0.0) || !std::isfinite(horizon))
    throw PreconditionError("aux_v: spin-up horizon is not finite (spectral-gap condition fails)");
  stepper.check_resolution(deviation.fastest_period);

  Stepper st(aux_v_problem(p, eps, deviation), stepper.scheme);
  std::vector<SpectralField> out;
  out.reserve(tau_grid.size());
  SpectralField v(p.grid);
  double tau = tau_grid.front() - std::ceil(horizon / stepper.dt) * stepper.dt;
  for (double target : tau_grid) {
    if (target > tau) v = march(st, std::move(v), tau, target, stepper.dt);
    tau = std::max(tau, target);
    out.push_back(v);
  }
  return out;
}

/// v(tau, eps): the bounded solution of v' = -eps A v + f0 - f(tau).
inline std::vector<SpectralField> aux_v(const ModelParams& p, const ForcingSpec& spec, double eps,
                                        const std::vector<double>& tau_grid, const StepperConfig& stepper,
                                        double spinup_efolds = 10.0) {
  spec.validate();
  require_same_grid(p.grid, spec.grid(), "aux_v");
  if (spec.steady()) {
    p.validate();
    if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("aux_v: eps must lie in (0, 1]");
    if (!spectral_gap_condition(p).holds)
      throw PreconditionError("aux_v: spin-up horizon is not finite (spectral-gap condition fails)");
    return std::vector<SpectralField>(tau_grid.size(), SpectralField(p.grid));
  }
  return bounded_linear_response(p, eps, average_deviation(spec), tau_grid, stepper, spinup_efolds);
}

struct AuxVRecord {
  double epsilon = 0.0;
  double sup_alpha_norm_of_eps_v = 0.0;
  double alpha = 0.0;
};

struct AuxVReport {
  std::vector<AuxVRecord> records;
};

/// 16 equally spaced probe times over one slowest forcing period.
inline std::vector<double> probe_times(const ForcingSpec& spec, int count = 16) {
  std::vector<double> taus;
  const double period = spec.steady() ? 1.0 : slowest_period(spec);
  for (int k = 0; k < count; ++k) taus.push_back(k * period / count);
  return taus;
}

/// sup over the probe times of ||eps v(tau, eps)||_alpha for each eps.
inline AuxVReport epsilon_v_decay(const ModelParams& p, const ForcingSpec& spec,
                                  const std::vector<double>& epsilons, double alpha,
                                  const StepperConfig& stepper, int jobs = 1) {
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw PreconditionError("aux-v: alpha must lie in [-1, 1]");
  check_epsilons(epsilons, "aux-v");
  const std::vector<double> taus = probe_times(spec);
  AuxVReport rep;
  rep.records = parallel_map(epsilons.size(), jobs, [&](std::size_t i) {
    const double eps = epsilons[i];
    AuxVRecord rec{eps, 0.0, alpha};
    for (const auto& v : aux_v(p, spec, eps, taus, stepper))
      rec.sup_alpha_norm_of_eps_v = std::max(rec.sup_alpha_norm_of_eps_v, eps * sobolev_norm(v, alpha));
    return rec;
  });
  return rep;
}

}  // namespace qg
