#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qg/averaging.hpp"
#include "qg/forcing_io.hpp"
#include "qg/response.hpp"

namespace qg::harness {

enum class Experiment { Simulate, Compare, AuxV, Stationary, Spectrum, Decay, Bounded, Frequencies, Attractor };

inline const std::vector<std::pair<std::string, Experiment>>& experiment_names() {
  static const std::vector<std::pair<std::string, Experiment>> names{
      {"simulate", Experiment::Simulate},   {"compare", Experiment::Compare}, {"aux-v", Experiment::AuxV},
      {"stationary", Experiment::Stationary}, {"spectrum", Experiment::Spectrum}, {"decay", Experiment::Decay},
      {"bounded", Experiment::Bounded},     {"frequencies", Experiment::Frequencies},
      {"attractor", Experiment::Attractor}};
  return names;
}

inline std::string to_string(Experiment e) {
  for (const auto& [n, x] : experiment_names())
    if (x == e) return n;
  return "?";
}

inline std::optional<Experiment> parse_experiment(const std::string& name) {
  for (const auto& [n, x] : experiment_names())
    if (n == name) return x;
  return std::nullopt;
}

struct RunConfig {
  std::filesystem::path source;
  std::string text;  // verbatim config, echoed into the manifest
  Experiment experiment = Experiment::Simulate;
  ModelParams model{1.0, 1.0, 0.0, Grid{32, 32}};
  std::filesystem::path forcing_file;
  ForcingSpec forcing;
  StepperConfig stepper;
  std::filesystem::path output_dir = "out";

  // Initial state (simulate, compare): mode list, or random_initial_state(seed) when set.
  SpectralField initial;
  std::optional<std::uint64_t> initial_seed;

  double t_end = 1.0;  // simulate, slow time
  bool averaged = false;
  long sample_every = 1;
  double T = 2.0;  // compare, slow time
  std::vector<double> epsilons;
  double alpha = 0.5;
  NewtonOptions newton;
  int truncation = 16;  // capped at the dealiased band when not given
  double eps = 0.0;  // decay, frequencies; 0 means 1/eta of the forcing
  SpectralField perturbation;
  double duration = 0.0;  // decay, fast time; 0 picks the default
  double horizon = 0.0;   // bounded, fast time; 0 means one slowest period
  double periods = 50.0;  // frequencies
  SpectralField probe;
  int order = 3;
  std::vector<double> eta_list;
  int n_initial = 8;
  std::uint64_t seed = 1;
  AttractorWindow window;
};

namespace detail {

/// Real number with optional pi factors and divisions: "0.1", "pi", "2*pi", "pi/2", "1/32".
inline std::optional<double> parse_real(const std::string& raw) {
  const std::string s = qg::detail::trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 1.0;
  char op = '*';
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find_first_of("*/", pos);
    const std::string tok = qg::detail::trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    double v = 0.0;
    if (tok == "pi") {
      v = std::numbers::pi;
    } else {
      std::istringstream in(tok);
      std::string extra;
      if (tok.empty() || !(in >> v) || (in >> extra)) return std::nullopt;
    }
    value = op == '*' ? value * v : value / v;
    if (next == std::string::npos) break;
    op = s[next];
    pos = next + 1;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

/// Reads one INI section, recording problems and which keys were consumed.
class Section {
public:
  Section(const boost::property_tree::ptree* pt, std::string name, std::vector<std::string>& errors)
      : pt_(pt), name_(std::move(name)), errors_(errors) {}

  bool has(const std::string& key) const { return pt_ && pt_->get_child_optional(key); }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    if (!pt_) return std::nullopt;
    auto v = pt_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return qg::detail::trim(*v);
  }

  void real(const std::string& key, double& out) {
    if (auto t = text(key)) {
      if (auto v = parse_real(*t)) out = *v;
      else error(key, "expected a number, got '" + *t + "'");
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (auto t = text(key)) {
      std::istringstream in(*t);
      long long v = 0;
      std::string extra;
      if (!(in >> v) || (in >> extra)) error(key, "expected an integer, got '" + *t + "'");
      else out = static_cast<Int>(v);
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto t = text(key)) {
      if (*t == "true" || *t == "1") out = true;
      else if (*t == "false" || *t == "0") out = false;
      else error(key, "expected true or false, got '" + *t + "'");
    }
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (auto t = text(key)) {
      out.clear();
      std::stringstream all(*t);
      std::string item;
      while (std::getline(all, item, ',')) {
        if (auto v = parse_real(item)) out.push_back(*v);
        else error(key, "cannot parse list entry '" + qg::detail::trim(item) + "'");
      }
    }
  }

  void modes(const std::string& key, const Grid& g, SpectralField& out) {
    if (auto t = text(key)) out = qg::detail::parse_mode_list(*t, g, "[" + name_ + "] " + key, errors_);
  }

  void error(const std::string& key, const std::string& msg) { errors_.push_back("[" + name_ + "] " + key + ": " + msg); }

  /// Report keys present in the file but never read.
  void reject_unused(const std::string& why) {
    if (!pt_) return;
    for (const auto& [key, _] : *pt_)
      if (!used_.count(key)) error(key, why);
  }

private:
  const boost::property_tree::ptree* pt_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

inline const boost::property_tree::ptree* child(const boost::property_tree::ptree& pt, const std::string& name) {
  auto c = pt.get_child_optional(name);
  return c ? &*c : nullptr;
}

template <typename Fn>
void check(std::vector<std::string>& errors, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
}

}  // namespace detail

/// Parse and validate a run configuration. Every problem found is reported together in one
/// ParseError. `forced` (the CLI subcommand) wins over a missing [experiment] type and must agree
/// with a present one.
inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {},
                                   std::optional<Experiment> forced = std::nullopt) {
  boost::property_tree::ptree pt;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError({"config: " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  std::vector<std::string> errors;
  RunConfig cfg;
  cfg.text = text;

  for (const auto& [name, sec] : pt)
    if (sec.empty() || !std::set<std::string>{"model", "forcing", "stepper", "experiment", "output"}.count(name))
      errors.push_back("config: unknown " + std::string(sec.empty() ? "top-level key '" + name + "'" : "section [" + name + "]"));

  // [model]
  detail::Section model(detail::child(pt, "model"), "model", errors);
  model.real("nu", cfg.model.nu);
  model.real("r", cfg.model.r);
  model.real("beta", cfg.model.beta);
  model.integer("nx", cfg.model.grid.nx);
  model.integer("ny", cfg.model.grid.ny);
  model.real("lx", cfg.model.grid.lx);
  model.real("ly", cfg.model.grid.ly);
  model.reject_unused("unknown key");
  bool grid_ok = true;
  detail::check(errors, [&] { cfg.model.validate(); });
  try {
    cfg.model.grid.validate();
  } catch (const std::exception&) {
    grid_ok = false;
  }
  const Grid g = grid_ok ? cfg.model.grid : Grid{8, 8};

  // [experiment]
  detail::Section exp(detail::child(pt, "experiment"), "experiment", errors);
  std::optional<Experiment> type = forced;
  if (auto t = exp.text("type")) {
    auto parsed = parse_experiment(*t);
    if (!parsed) exp.error("type", "unknown experiment '" + *t + "'");
    else if (forced && *forced != *parsed)
      exp.error("type", "config says '" + *t + "' but the command is '" + to_string(*forced) + "'");
    else type = parsed;
  }
  if (!type) errors.push_back("[experiment] type: missing");
  cfg.experiment = type.value_or(Experiment::Simulate);

  // [forcing]
  detail::Section forcing(detail::child(pt, "forcing"), "forcing", errors);
  cfg.forcing = ForcingSpec{SpectralField(g), {}, 1.0};
  if (auto f = forcing.text("file")) {
    cfg.forcing_file = std::filesystem::path(*f).is_absolute() ? std::filesystem::path(*f) : base_dir / *f;
    try {
      cfg.forcing = load_forcing(cfg.forcing_file, g);
    } catch (const ParseError& e) {
      for (const auto& p : e.problems()) errors.push_back(p + " (in " + cfg.forcing_file.string() + ")");
    }
  }
  forcing.reject_unused("unknown key");

  // [stepper]
  detail::Section stepper(detail::child(pt, "stepper"), "stepper", errors);
  if (auto s = stepper.text("scheme")) detail::check(errors, [&] { cfg.stepper.scheme = parse_scheme(*s); });
  stepper.integer("osc_resolution", cfg.stepper.osc_resolution);
  const double fast = fastest_period(cfg.forcing);
  cfg.stepper.dt = fast > 0.0 && cfg.stepper.osc_resolution > 0 ? fast / cfg.stepper.osc_resolution : 0.05;
  stepper.real("dt", cfg.stepper.dt);
  stepper.reject_unused("unknown key");
  detail::check(errors, [&] {
    cfg.stepper.validate();
    cfg.stepper.check_resolution(fast);
  });

  // [output]
  detail::Section output(detail::child(pt, "output"), "output", errors);
  if (auto d = output.text("dir")) cfg.output_dir = *d;
  output.reject_unused("unknown key");

  // Experiment-specific keys.
  cfg.initial = SpectralField(g);
  cfg.perturbation = SpectralField::mode(g, 2, 2, 1e-3);
  cfg.probe = SpectralField::mode(g, 1, 1, 1.0) + SpectralField::mode(g, 2, 1, 1.0);
  auto read_initial = [&] {
    exp.modes("initial", g, cfg.initial);
    if (exp.has("initial_seed")) {
      std::uint64_t s = 0;
      exp.integer("initial_seed", s);
      cfg.initial_seed = s;
    }
  };
  auto in_unit = [&](const char* key, double v) {
    if (!(v > 0.0 && v <= 1.0)) exp.error(key, "must lie in (0, 1]");
  };
  const double default_eps = cfg.forcing.epsilon();
  switch (cfg.experiment) {
    case Experiment::Simulate:
      read_initial();
      exp.real("t_end", cfg.t_end);
      exp.integer("sample_every", cfg.sample_every);
      exp.boolean("averaged", cfg.averaged);
      if (!(cfg.t_end > 0.0)) exp.error("t_end", "must be > 0");
      break;
    case Experiment::Compare:
      read_initial();
      exp.real("T", cfg.T);
      exp.reals("epsilons", cfg.epsilons);
      exp.integer("sample_every", cfg.sample_every);
      if (!(cfg.T > 0.0)) exp.error("T", "must be > 0");
      detail::check(errors, [&] { check_epsilons(cfg.epsilons, "[experiment] epsilons"); });
      break;
    case Experiment::AuxV:
      exp.reals("epsilons", cfg.epsilons);
      exp.real("alpha", cfg.alpha);
      if (!(cfg.alpha >= -1.0 && cfg.alpha <= 1.0)) exp.error("alpha", "must lie in [-1, 1]");
      detail::check(errors, [&] { check_epsilons(cfg.epsilons, "[experiment] epsilons"); });
      break;
    case Experiment::Stationary:
    case Experiment::Spectrum:
      break;
    case Experiment::Decay:
      cfg.eps = default_eps;
      exp.real("eps", cfg.eps);
      exp.modes("perturbation", g, cfg.perturbation);
      exp.real("duration", cfg.duration);
      in_unit("eps", cfg.eps);
      break;
    case Experiment::Bounded:
      exp.reals("epsilons", cfg.epsilons);
      exp.real("horizon", cfg.horizon);
      exp.integer("sample_every", cfg.sample_every);
      detail::check(errors, [&] { check_epsilons(cfg.epsilons, "[experiment] epsilons"); });
      break;
    case Experiment::Frequencies:
      cfg.eps = default_eps;
      exp.real("eps", cfg.eps);
      exp.real("periods", cfg.periods);
      exp.modes("probe", g, cfg.probe);
      exp.integer("order", cfg.order);
      in_unit("eps", cfg.eps);
      if (!(cfg.periods >= 50.0)) exp.error("periods", "must be >= 50");
      if (cfg.order < 1 || cfg.order > 6) exp.error("order", "must lie in [1, 6]");
      break;
    case Experiment::Attractor:
      exp.reals("eta_list", cfg.eta_list);
      exp.integer("n_initial", cfg.n_initial);
      exp.integer("seed", cfg.seed);
      exp.real("t_transient", cfg.window.t_transient);
      exp.real("t_window", cfg.window.t_window);
      exp.integer("samples_per_member", cfg.window.samples_per_member);
      if (cfg.eta_list.empty()) exp.error("eta_list", "must list at least one eta");
      for (double e : cfg.eta_list)
        if (!(e >= 1.0)) exp.error("eta_list", "every eta must be >= 1");
      if (cfg.n_initial < 1) exp.error("n_initial", "must be >= 1");
      if (!(cfg.window.t_transient >= 0.0)) exp.error("t_transient", "must be >= 0");
      if (!(cfg.window.t_window > 0.0)) exp.error("t_window", "must be > 0");
      if (cfg.window.samples_per_member < 1) exp.error("samples_per_member", "must be >= 1");
      break;
  }
  if (cfg.experiment == Experiment::Stationary || cfg.experiment == Experiment::Spectrum ||
      cfg.experiment == Experiment::Decay || cfg.experiment == Experiment::Bounded ||
      cfg.experiment == Experiment::Frequencies) {
    exp.real("tol", cfg.newton.tol);
    exp.integer("max_iters", cfg.newton.max_iters);
    if (!(cfg.newton.tol > 0.0)) exp.error("tol", "must be > 0");
    if (cfg.newton.max_iters < 1) exp.error("max_iters", "must be >= 1");
  }
  if (cfg.experiment == Experiment::Spectrum || cfg.experiment == Experiment::Decay ||
      cfg.experiment == Experiment::Bounded || cfg.experiment == Experiment::Frequencies) {
    cfg.truncation = std::min(16, max_truncation(g));
    exp.integer("truncation", cfg.truncation);
    if (grid_ok && (cfg.truncation < 1 || cfg.truncation > max_truncation(g)))
      exp.error("truncation", "must lie in [1, " + std::to_string(max_truncation(g)) + "] for a " +
                                  std::to_string(g.nx) + "x" + std::to_string(g.ny) + " grid");
  }
  if (cfg.sample_every < 1) exp.error("sample_every", "must be >= 1");
  exp.reject_unused("not used by experiment '" + to_string(cfg.experiment) + "'");

  if (cfg.experiment != Experiment::Simulate && grid_ok) {
    const auto gap = spectral_gap_condition(cfg.model);
    if (!gap.holds)
      errors.push_back("[model] spectral-gap condition 4*nu*r > beta^2*|D|^2/pi^2 fails (lambda1 = " +
                       std::to_string(gap.lambda1) + "); experiment '" + to_string(cfg.experiment) + "' requires it");
  }

  if (!errors.empty()) throw ParseError(std::move(errors));
  return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path, std::optional<Experiment> forced = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ParseError({"config: cannot open '" + path.string() + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config_text(buf.str(), path.parent_path(), forced);
  cfg.source = path;
  return cfg;
}

}  // namespace qg::harness
