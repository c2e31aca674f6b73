#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qg/model.hpp"

namespace qg {

enum class Scheme {
  ImexCnAb2,  // Crank-Nicolson on the diagonal part, AB2 on the rest
  EtdRk2,     // exponential time differencing RK2 (Cox-Matthews)
};

inline const char* to_string(Scheme s) {
  return s == Scheme::ImexCnAb2 ? "imex-cn-ab2" : "etd-rk2";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "imex-cn-ab2") return Scheme::ImexCnAb2;
  if (name == "etd-rk2") return Scheme::EtdRk2;
  throw PreconditionError("unknown scheme '" + name + "' (expected imex-cn-ab2 or etd-rk2)");
}

struct StepperConfig {
  double dt = 0.05;
  Scheme scheme = Scheme::EtdRk2;
  int osc_resolution = 32;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("stepper: dt must be > 0");
    if (osc_resolution < 8) throw PreconditionError("stepper: osc_resolution must be >= 8");
  }

  /// Reject dt that would under-resolve a forcing oscillation of the given period.
  void check_resolution(double fastest_period) const {
    if (fastest_period <= 0.0) return;
    const double limit = fastest_period / osc_resolution;
    if (dt > limit * (1.0 + 1e-12))
      throw ResolutionViolation("stepper: dt = " + std::to_string(dt) +
                                " exceeds fastest forcing period / osc_resolution = " +
                                std::to_string(limit));
  }
};

/// Time-dependent forcing in the integrator's own time variable.
struct TimeForcing {
  std::function<SpectralField(double)> eval;
  double fastest_period = 0.0;  // 0 for steady forcing

  static TimeForcing steady(SpectralField f) {
    return {[f = std::move(f)](double) { return f; }, 0.0};
  }
};

/// u' = -rate .* u + explicit_part(t, u); rate is diagonal in the sine basis.
struct SplitProblem {
  Eigen::MatrixXd rate;
  std::function<SpectralField(double, const SpectralField&)> explicit_part;
};

/// Split problem of the vorticity equation scaled by `time_scale`:
/// w' = time_scale * (-A w - J(Lap^{-1} w, w) + f(t)).
inline SplitProblem vorticity_problem(const ModelParams& p, TimeForcing forcing, double time_scale = 1.0) {
  SplitProblem prob;
  prob.rate = time_scale * (p.nu * laplacian_eigenvalues(p.grid).array() + p.r).matrix();
  prob.explicit_part = [p, forcing = std::move(forcing), time_scale](double t, const SpectralField& w) {
    SpectralField n = forcing.eval(t);
    n -= jacobian(inverse_laplacian(w), w);
    if (p.beta != 0.0) n -= beta_term(p, w);
    n *= time_scale;
    return n;
  };
  return prob;
}

class Stepper {
public:
  Stepper(SplitProblem problem, Scheme scheme) : problem_(std::move(problem)), scheme_(scheme) {}

  Scheme scheme() const { return scheme_; }

  /// Forget multistep history; the next step uses the one-step startup.
  void reset() { history_.reset(); }

  SpectralField step(const SpectralField& u, double t, double dt) {
    prepare(dt);
    return scheme_ == Scheme::EtdRk2 ? step_etd(u, t, dt) : step_imex(u, t, dt);
  }

private:
  struct History {
    SpectralField n_prev;
    double dt;
  };

  void prepare(double dt) {
    if (dt == prepared_dt_) return;
    prepared_dt_ = dt;
    history_.reset();
    const Eigen::ArrayXXd z = -problem_.rate.array() * dt;
    if (scheme_ == Scheme::EtdRk2) {
      expz_ = z.exp();
      phi1_.resize(z.rows(), z.cols());
      phi2_.resize(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double x = z(i);
        if (std::abs(x) < 0.1) {
          // Taylor series avoids cancellation in (e^x - 1 - x)/x^2.
          double term1 = 1.0, term2 = 0.5, sum1 = 1.0, sum2 = 0.5;
          for (int k = 2; k < 12; ++k) {
            term1 *= x / k;
            term2 *= x / (k + 1);
            sum1 += term1;
            sum2 += term2;
          }
          phi1_(i) = sum1;
          phi2_(i) = sum2;
        } else {
          const double em1 = std::expm1(x);
          phi1_(i) = em1 / x;
          phi2_(i) = (em1 - x) / (x * x);
        }
      }
    } else {
      cn_num_ = 1.0 + z / 2.0;
      cn_den_inv_ = 1.0 / (1.0 - z / 2.0);
    }
  }

  SpectralField step_etd(const SpectralField& u, double t, double dt) {
    const SpectralField nu = problem_.explicit_part(t, u);
    SpectralField a(u.grid(), (expz_ * u.coeffs().array() + dt * phi1_ * nu.coeffs().array()).matrix());
    const SpectralField na = problem_.explicit_part(t + dt, a);
    a.coeffs().array() += dt * phi2_ * (na.coeffs().array() - nu.coeffs().array());
    return a;
  }

  SpectralField step_imex(const SpectralField& u, double t, double dt) {
    const SpectralField nu = problem_.explicit_part(t, u);
    SpectralField out(u.grid());
    if (history_ && history_->dt == dt) {
      const Eigen::ArrayXXd n = 1.5 * nu.coeffs().array() - 0.5 * history_->n_prev.coeffs().array();
      out.coeffs() = ((cn_num_ * u.coeffs().array() + dt * n) * cn_den_inv_).matrix();
    } else {
      // Crank-Nicolson / Heun predictor-corrector start.
      SpectralField pred(u.grid(), ((cn_num_ * u.coeffs().array() + dt * nu.coeffs().array()) * cn_den_inv_).matrix());
      const SpectralField np = problem_.explicit_part(t + dt, pred);
      const Eigen::ArrayXXd n = 0.5 * (nu.coeffs().array() + np.coeffs().array());
      out.coeffs() = ((cn_num_ * u.coeffs().array() + dt * n) * cn_den_inv_).matrix();
    }
    history_ = History{nu, dt};
    return out;
  }

  SplitProblem problem_;
  Scheme scheme_;
  double prepared_dt_ = -1.0;
  Eigen::ArrayXXd expz_, phi1_, phi2_, cn_num_, cn_den_inv_;
  std::optional<History> history_;
};

/// Number of equal steps of size <= dt_max covering [t0, t1].
inline long step_count(double t0, double t1, double dt_max) {
  const double ratio = (t1 - t0) / dt_max;
  long n = static_cast<long>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  return std::max(1L, n);
}

/// Advance u from t0 to t1 with equal steps no longer than dt_max, calling
/// observer(step_index, t, state) at step 0 and after every step. Times are computed as
/// t0 + i*dt so repeated runs land on identical forcing phases.
template <typename Observer>
SpectralField march(Stepper& stepper, SpectralField u, double t0, double t1, double dt_max,
                    Observer&& observer) {
  if (!(t1 > t0)) throw PreconditionError("integrate: t1 must exceed t0");
  const long n = step_count(t0, t1, dt_max);
  const double dt = (t1 - t0) / static_cast<double>(n);
  if (!u.all_finite()) throw BlowUp("integrate: initial state is not finite", t0);
  observer(0L, t0, u);
  double last_valid = t0;
  for (long i = 1; i <= n; ++i) {
    const double t_prev = t0 + static_cast<double>(i - 1) * dt;
    const double t = (i == n) ? t1 : t0 + static_cast<double>(i) * dt;
    u = stepper.step(u, t_prev, dt);
    if (!u.all_finite())
      throw BlowUp("integrate: non-finite coefficient after t = " + std::to_string(last_valid),
                   last_valid);
    last_valid = t;
    observer(i, t, u);
  }
  return u;
}

inline SpectralField march(Stepper& stepper, SpectralField u, double t0, double t1, double dt_max) {
  return march(stepper, std::move(u), t0, t1, dt_max, [](long, double, const SpectralField&) {});
}

/// Sampled solution; times strictly increase and all states share one grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  ModelParams params;

  std::size_t size() const { return times.size(); }
};

/// Integrate w' = time_scale * (-A w - J(Lap^{-1} w, w) + f(t)) over [t0, t1], keeping every
/// `sample_every`-th step plus both endpoints.
inline Trajectory integrate(const ModelParams& p, const SpectralField& w0, const TimeForcing& forcing,
                            double t0, double t1, const StepperConfig& cfg, long sample_every = 1,
                            double time_scale = 1.0) {
  p.validate();
  cfg.validate();
  require_same_grid(p.grid, w0.grid(), "integrate");
  if (sample_every < 1) throw PreconditionError("integrate: sample_every must be >= 1");
  cfg.check_resolution(forcing.fastest_period);
  Stepper stepper(vorticity_problem(p, forcing, time_scale), cfg.scheme);
  Trajectory traj;
  traj.params = p;
  const long n = step_count(t0, t1, cfg.dt);
  march(stepper, w0, t0, t1, cfg.dt, [&](long i, double t, const SpectralField& u) {
    if (i % sample_every == 0 || i == n) {
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  });
  return traj;
}

}  // namespace qg
