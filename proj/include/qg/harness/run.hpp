#pragma once

#include <chrono>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "qg/harness/config.hpp"
#include "qg/io.hpp"

namespace qg::harness {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  nlohmann::ordered_json json;
  bool contracts_ok = true;
  std::vector<std::filesystem::path> files;
};

namespace detail {

class Output {
public:
  Output(std::filesystem::path dir, RunManifest& m) : dir_(std::move(dir)), m_(m) {
    std::filesystem::create_directories(dir_);
  }

  void csv(const std::string& name, const CsvWriter& w) {
    w.save(dir_ / name);
    note(name);
  }

  void snapshot(const std::string& name, const SpectralField& f) {
    write_snapshot(dir_ / name, f);
    note(name);
  }

  const std::filesystem::path& dir() const { return dir_; }

private:
  void note(const std::string& name) {
    m_.files.push_back(dir_ / name);
    spdlog::info("wrote {}", (dir_ / name).string());
  }
  std::filesystem::path dir_;
  RunManifest& m_;
};

inline void contract(RunManifest& m, const std::string& name, bool ok) {
  m.json["contracts"][name] = ok;
  if (!ok) {
    m.contracts_ok = false;
    spdlog::error("contract violated: {}", name);
  }
}

/// Each value is at most (1 + ripple) times its predecessor; ripple 0 demands strict decrease.
inline bool decreasing(const std::vector<double>& v, double ripple) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (ripple == 0.0 ? !(v[i] < v[i - 1]) : !(v[i] <= (1.0 + ripple) * v[i - 1])) return false;
  return true;
}

inline SpectralField initial_state(const RunConfig& cfg) {
  return cfg.initial_seed ? random_initial_state(cfg.model.grid, *cfg.initial_seed) : cfg.initial;
}

inline CsvWriter trajectory_csv(const Trajectory& traj, double time_factor) {
  CsvWriter w({"time", "l2_norm", "h1_norm", "d_a_norm", "energy"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    const double e = sobolev_norm(s, -0.5);
    w.row({traj.times[i] * time_factor, l2_norm(s), sobolev_norm(s, 0.5), sobolev_norm(s, 1.0), 0.5 * e * e});
  }
  return w;
}

inline StationaryAnalysis analysis(const RunConfig& cfg) {
  auto a = analyze_stationary(cfg.model, average(cfg.forcing), cfg.truncation, cfg.newton);
  spdlog::info("stationary state: residual {:.3e} after {} Newton steps; N = {}, gap a = {:.6g}",
               a.state.residual_norm, a.state.newton_iters, a.spectrum.n_unstable, a.spectrum.gap_a);
  return a;
}

inline void run_simulate(const RunConfig& cfg, RunManifest& m, Output& out) {
  const double eps = cfg.forcing.epsilon();
  const TimeForcing f = cfg.averaged ? TimeForcing::steady(average(cfg.forcing)) : fast_time_forcing(cfg.forcing);
  const Trajectory traj = integrate(cfg.model, initial_state(cfg), f, 0.0, cfg.t_end / eps, cfg.stepper,
                                    cfg.sample_every, eps);
  out.csv("trajectory.csv", trajectory_csv(traj, eps));
  out.snapshot("final.qgf", traj.states.back());
  m.json["summary"] = {{"samples", traj.size()},
                       {"final_l2_norm", l2_norm(traj.states.back())},
                       {"final_h1_norm", sobolev_norm(traj.states.back(), 0.5)}};
}

inline void run_compare(const RunConfig& cfg, int jobs, RunManifest& m, Output& out) {
  ComparisonConfig c{cfg.model, cfg.forcing, cfg.T, cfg.epsilons, initial_state(cfg), cfg.stepper,
                     cfg.sample_every, jobs};
  const auto rep = compare_finite_interval(c);
  CsvWriter w({"epsilon", "sup_half", "sup_da", "end_half"});
  std::vector<double> sup;
  for (const auto& r : rep.records) {
    w.row({r.epsilon, r.sup_half, r.sup_da, r.end_half});
    sup.push_back(r.sup_half);
  }
  out.csv("comparison.csv", w);
  m.json["summary"] = {{"epsilons", cfg.epsilons}, {"sup_half", sup}};
  contract(m, "sup_half nonincreasing within 10%", decreasing(sup, 0.1));
}

inline void run_aux_v(const RunConfig& cfg, int jobs, RunManifest& m, Output& out) {
  const auto rep = epsilon_v_decay(cfg.model, cfg.forcing, cfg.epsilons, cfg.alpha, cfg.stepper, jobs);
  CsvWriter w({"epsilon", "alpha", "sup_eps_v"});
  std::vector<double> sup;
  for (const auto& r : rep.records) {
    w.row({r.epsilon, r.alpha, r.sup_alpha_norm_of_eps_v});
    sup.push_back(r.sup_alpha_norm_of_eps_v);
  }
  out.csv("aux_v.csv", w);
  m.json["summary"] = {{"epsilons", cfg.epsilons}, {"sup_eps_v", sup}};
  contract(m, "sup_eps_v nonincreasing within 10%", decreasing(sup, 0.1));
}

inline void run_stationary(const RunConfig& cfg, RunManifest& m, Output& out) {
  const SpectralField f0 = average(cfg.forcing);
  const auto s = solve_stationary(cfg.model, f0, cfg.newton);
  const double check = independent_residual_norm(cfg.model, s.omega0, f0);
  CsvWriter w({"residual_norm", "independent_residual", "newton_iters", "l2_norm", "h1_norm"});
  w.row({s.residual_norm, check, static_cast<double>(s.newton_iters), l2_norm(s.omega0), sobolev_norm(s.omega0, 0.5)});
  out.csv("stationary.csv", w);
  out.snapshot("omega0.qgf", s.omega0);
  m.json["summary"] = {{"residual", s.residual_norm},
                       {"independent_residual", check},
                       {"newton_iters", s.newton_iters},
                       {"lambda1", spectral_gap_condition(cfg.model).lambda1},
                       {"lambda0", lambda0(cfg.model, f0)},
                       {"corollary_smallness", corollary_smallness(cfg.model, f0)}};
  contract(m, "residual below tolerance", s.residual_norm < cfg.newton.tol);
  contract(m, "independent residual agrees within 1e-12", std::abs(check - s.residual_norm) <= 1e-12);
}

inline void run_spectrum(const RunConfig& cfg, RunManifest& m, Output& out) {
  const auto a = analysis(cfg);
  CsvWriter w({"re", "im"});
  w.add_preamble("truncation = " + std::to_string(a.spectrum.truncation));
  std::ostringstream gap;
  gap << std::setprecision(17) << a.spectrum.gap_a;
  w.add_preamble("gap_a = " + gap.str());
  w.add_preamble("n_unstable = " + std::to_string(a.spectrum.n_unstable));
  for (Eigen::Index i = 0; i < a.spectrum.eigenvalues.size(); ++i)
    w.row({a.spectrum.eigenvalues(i).real(), a.spectrum.eigenvalues(i).imag()});
  out.csv("spectrum.csv", w);
  out.snapshot("omega0.qgf", a.state.omega0);
  m.json["summary"] = {{"truncation", a.spectrum.truncation},
                       {"n_unstable", a.spectrum.n_unstable},
                       {"gap_a", a.spectrum.gap_a},
                       {"residual", a.state.residual_norm},
                       {"lambda0", lambda0(cfg.model, average(cfg.forcing))},
                       {"corollary_smallness", corollary_smallness(cfg.model, average(cfg.forcing))}};
}

inline void run_decay(const RunConfig& cfg, RunManifest& m, Output& out) {
  const auto a = analysis(cfg);
  const auto rep = decay_experiment(a, cfg.forcing, cfg.eps, cfg.perturbation, cfg.stepper, cfg.duration);
  CsvWriter w({"t", "distance", "log_distance"});
  for (std::size_t i = 0; i < rep.times.size(); ++i) w.row({rep.times[i], rep.distance[i], rep.log_distance[i]});
  out.csv("decay.csv", w);
  m.json["summary"] = {{"eps", cfg.eps},
                       {"fitted_rate", std::isfinite(rep.fitted_rate) ? nlohmann::ordered_json(rep.fitted_rate)
                                                                       : nlohmann::ordered_json("inf")},
                       {"reference_rate", rep.reference_rate},
                       {"gap_a", a.spectrum.gap_a},
                       {"fit_samples", rep.fit_end - rep.fit_begin}};
  contract(m, "fitted rate >= 0.5 eps a", rep.fitted_rate >= 0.5 * rep.reference_rate);
}

inline void run_bounded(const RunConfig& cfg, int jobs, RunManifest& m, Output& out) {
  const auto a = analysis(cfg);
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : (cfg.forcing.steady() ? 2.0 * std::numbers::pi : slowest_period(cfg.forcing));
  const auto sups = parallel_map(cfg.epsilons.size(), jobs, [&](std::size_t i) {
    return track_bounded_solution(a, cfg.forcing, cfg.epsilons[i], horizon, cfg.stepper, cfg.sample_every)
        .sup_distance_half;
  });
  CsvWriter w({"epsilon", "sup_distance_half"});
  for (std::size_t i = 0; i < sups.size(); ++i) w.row({cfg.epsilons[i], sups[i]});
  out.csv("bounded.csv", w);
  m.json["summary"] = {{"epsilons", cfg.epsilons}, {"sup_distance_half", sups}, {"gap_a", a.spectrum.gap_a}};
  contract(m, "sup distance decreasing in epsilon", decreasing(sups, 0.0) || cfg.forcing.steady());
}

inline void run_frequencies(const RunConfig& cfg, RunManifest& m, Output& out) {
  const auto a = analysis(cfg);
  std::vector<double> basis;
  for (double b : frequency_basis(cfg.forcing)) basis.push_back(b / cfg.forcing.eta);  // fast-time units
  const auto candidates = combination_frequencies(basis, cfg.order);
  const auto controls = control_frequencies(basis);
  const double slowest = candidates.size() > 1 ? candidates[1] : 1.0;
  const double horizon = cfg.periods * 2.0 * std::numbers::pi / slowest;
  const auto b = track_bounded_solution(a, cfg.forcing, cfg.eps, horizon, cfg.stepper, 1);
  const auto resp = response_frequencies(b.trajectory, cfg.probe, candidates, controls);
  CsvWriter w({"frequency", "magnitude", "control"});
  for (const auto& l : resp.candidates) w.row({l.frequency, l.magnitude, 0.0});
  for (const auto& l : resp.controls) w.row({l.frequency, l.magnitude, 1.0});
  out.csv("frequencies.csv", w);
  m.json["summary"] = {{"eps", cfg.eps},
                       {"basis", basis},
                       {"max_candidate", resp.max_candidate},
                       {"max_control", resp.max_control}};
  contract(m, "controls below 5% of the strongest candidate", resp.contract_holds());
}

inline void run_attractor(const RunConfig& cfg, int jobs, RunManifest& m, Output& out) {
  const auto rep = attractor_distance(cfg.model, cfg.forcing, cfg.eta_list, cfg.n_initial, cfg.window, cfg.stepper,
                                      cfg.seed, jobs);
  CsvWriter w({"eta", "dist", "n_samples"});
  std::vector<double> dist;
  for (const auto& r : rep) {
    w.row({r.eta, r.dist, static_cast<double>(r.n_samples)});
    dist.push_back(r.dist);
  }
  out.csv("attractor.csv", w);
  m.json["summary"] = {{"eta_list", cfg.eta_list}, {"dist", dist}};
  contract(m, "dist nonincreasing within 15%", decreasing(dist, 0.15));
}

}  // namespace detail

/// Execute the configured experiment, write its artifacts into the output directory and the
/// manifest last. Returns the manifest; contracts_ok is false when a result-level contract failed.
inline RunManifest run(const RunConfig& cfg, int jobs = 1, std::optional<std::filesystem::path> out_dir = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.json["experiment"] = to_string(cfg.experiment);
  m.json["version"] = kVersion;
  m.json["config_file"] = cfg.source.string();
  m.json["config"] = cfg.text;
  m.json["jobs"] = jobs;
  m.json["contracts"] = nlohmann::ordered_json::object();
  detail::Output out(out_dir.value_or(cfg.output_dir), m);
  spdlog::info("running {} into {}", to_string(cfg.experiment), out.dir().string());
  switch (cfg.experiment) {
    case Experiment::Simulate: detail::run_simulate(cfg, m, out); break;
    case Experiment::Compare: detail::run_compare(cfg, jobs, m, out); break;
    case Experiment::AuxV: detail::run_aux_v(cfg, jobs, m, out); break;
    case Experiment::Stationary: detail::run_stationary(cfg, m, out); break;
    case Experiment::Spectrum: detail::run_spectrum(cfg, m, out); break;
    case Experiment::Decay: detail::run_decay(cfg, m, out); break;
    case Experiment::Bounded: detail::run_bounded(cfg, jobs, m, out); break;
    case Experiment::Frequencies: detail::run_frequencies(cfg, m, out); break;
    case Experiment::Attractor: detail::run_attractor(cfg, jobs, m, out); break;
  }
  m.json["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> files;
  for (const auto& f : m.files) files.push_back(f.string());
  m.json["files"] = files;
  m.json["status"] = m.contracts_ok ? "ok" : "contract_violation";
  write_file_atomic(out.dir() / "manifest.json", m.json.dump(2) + "\n");
  return m;
}

}  // namespace qg::harness
