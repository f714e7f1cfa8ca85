#pragma once

// Vorticity-current form of the 2D MHD system with nonlocal velocity dissipation:
//
//   omega_t + u.grad omega + L omega = b.grad j
//   j_t     + u.grad j - lap j       = b.grad omega + T(grad u, grad b)
//
// advanced with an integrating-factor RK4 scheme that integrates the diagonal
// linear parts (sigma(|k|) for omega, |k|^2 for j) exactly.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "spectral.hpp"

namespace gmhd {

struct SimState {
  double t = 0.0;
  SpectralField omega;
  SpectralField j;
};

/// Switches used by tests to isolate parts of the system.
struct DynamicsHooks {
  bool nonlinear = true;    // advection, Lorentz and stretching terms
  bool t_term = true;       // T(grad u, grad b) in the current equation
  bool dissipation = true;  // L omega and -lap j
  bool dealias = true;      // two-thirds truncation of products
};

enum class Scheme { IFRK4 };

struct StepperConfig {
  double cfl = 0.5;
  double dt_max = 0.01;
  Scheme scheme = Scheme::IFRK4;
  DynamicsHooks hooks;
};

/// Time integrals accumulated alongside the state.
struct LedgerIntegrals {
  double diss_u = 0.0;  // int 2 <u, L u> dt
  double diss_b = 0.0;  // int 2 ||grad b||^2 dt
  double grad_j = 0.0;  // int ||grad j||^2 dt
};

struct BlowUpReport {
  double t = 0.0;
  double max_abs_omega = 0.0;
  double tail_ratio = 0.0;
  std::string reason;
};

class BlowUpError : public Error {
 public:
  explicit BlowUpError(BlowUpReport report)
      : Error(errc::cfl_violation, report.reason), report_(std::move(report)) {}
  const BlowUpReport& report() const { return report_; }

 private:
  BlowUpReport report_;
};

/// (u, b) from (omega, j) by Biot-Savart.
inline std::pair<SpectralVector, SpectralVector> reconstruct(const SimState& state) {
  return {biot_savart(state.omega), biot_savart(state.j)};
}

/// T(grad u, grad b) = 2 d1b1 (d1u2 + d2u1) + 2 d2u2 (d1b2 + d2b1).
inline SpectralField t_term(const SpectralVector& u, const SpectralVector& b, bool dealiased = true) {
  const RealField d1b1 = inverse(derivative(b.x1, 1));
  const RealField u_shear = inverse(derivative(u.x2, 1) + derivative(u.x1, 2));
  const RealField d2u2 = inverse(derivative(u.x2, 2));
  const RealField b_shear = inverse(derivative(b.x2, 1) + derivative(b.x1, 2));
  RealField prod(u.x1.grid());
  auto& p = prod.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = 2.0 * d1b1.values()[i] * u_shear.values()[i] + 2.0 * d2u2.values()[i] * b_shear.values()[i];
  }
  SpectralField out = forward(prod);
  return dealiased ? dealias(out) : out;
}

/// Fraction of the energy (|u_hat|^2 + |b_hat|^2) carried by retained modes with
/// max(|k1|, |k2|) above two thirds of the retained band.
inline double energy_tail_ratio(const SpectralField& omega, const SpectralField& j) {
  const auto& g = *omega.grid();
  const int band = g.n() / 3;
  double total = 0.0;
  double tail = 0.0;
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) {
      const auto ksq = g.ksq(row, col);
      if (ksq == 0 || !g.retained(row, col)) continue;
      const double e = g.weight(col) * (std::norm(omega(row, col)) + std::norm(j(row, col))) /
                       static_cast<double>(ksq);
      total += e;
      const int kmax = std::max(std::abs(g.k1(col)), std::abs(g.k2(row)));
      if (3 * kmax > 2 * band) tail += e;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

class Dynamics {
 public:
  Dynamics(GridPtr grid, const DissipationSymbol& symbol, StepperConfig config)
      : grid_(std::move(grid)), config_(config) {
    sigma_ = mode_multiplier(*grid_, symbol);
    ksq_.resize(grid_->spectral_size());
    for (int row = 0; row < grid_->n(); ++row) {
      for (int col = 0; col < grid_->half(); ++col) {
        ksq_[grid_->index(row, col)] = static_cast<double>(grid_->ksq(row, col));
      }
    }
    if (!config_.hooks.dissipation) {
      std::fill(sigma_.begin(), sigma_.end(), 0.0);
      std::fill(ksq_.begin(), ksq_.end(), 0.0);
    }
    if (!(config_.cfl > 0.0 && config_.cfl <= 1.0)) {
      throw Error(errc::invalid_config, "cfl must lie in (0, 1]");
    }
    if (!(config_.dt_max > 0.0)) throw Error(errc::invalid_config, "dt_max must be positive");
  }

  const GridPtr& grid() const { return grid_; }
  const StepperConfig& config() const { return config_; }
  /// sigma(|k|) per stored mode (zero when dissipation is switched off).
  const std::vector<double>& sigma() const { return sigma_; }

  /// Nonlinear right-hand sides; the linear terms live in the integrating factor.
  std::pair<SpectralField, SpectralField> rhs(const SimState& s) const {
    SpectralField domega(grid_);
    SpectralField dj(grid_);
    const auto& hooks = config_.hooks;
    if (!hooks.nonlinear) return {domega, dj};

    const auto [u, b] = reconstruct(s);
    const RealVector ur = inverse(u);
    const RealVector br = inverse(b);
    const RealField wr = inverse(s.omega);
    const RealField jr = inverse(s.j);

    // u.grad s - b.grad r = div(u s - b r) for divergence-free u, b.
    auto flux_divergence = [&](const RealField& s1, const RealField& r1) {
      RealVector f{RealField(grid_), RealField(grid_)};
      for (std::size_t i = 0; i < f.x1.values().size(); ++i) {
        f.x1.values()[i] = ur.x1.values()[i] * s1.values()[i] - br.x1.values()[i] * r1.values()[i];
        f.x2.values()[i] = ur.x2.values()[i] * s1.values()[i] - br.x2.values()[i] * r1.values()[i];
      }
      SpectralVector fs = forward(f);
      if (hooks.dealias) fs = {dealias(fs.x1), dealias(fs.x2)};
      return divergence(fs);
    };

    domega = flux_divergence(wr, jr);
    domega *= -1.0;
    dj = flux_divergence(jr, wr);
    dj *= -1.0;
    if (hooks.t_term) dj += t_term(u, b, hooks.dealias);
    domega(0, 0) = 0.0;
    dj(0, 0) = 0.0;
    return {domega, dj};
  }

  /// dt = min(dt_max, cfl dx / max(|u|_inf, |b|_inf, 1e-12)).
  double choose_dt(const SimState& s) const {
    const auto [u, b] = reconstruct(s);
    const double speed = std::max({sup_norm(magnitude(inverse(u))), sup_norm(magnitude(inverse(b))), 1e-12});
    const double dt = std::min(config_.dt_max, config_.cfl * grid_->dx() / speed);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw Error(errc::cfl_violation, "time step is not positive and finite");
    }
    return dt;
  }

  /// Instantaneous ledger rates at a state.
  LedgerIntegrals rates(const SimState& s) const {
    const auto& g = *grid_;
    double du = 0.0;
    double db = 0.0;
    double gj = 0.0;
    for (int row = 0; row < g.n(); ++row) {
      for (int col = 0; col < g.half(); ++col) {
        const std::size_t i = g.index(row, col);
        const double k2 = static_cast<double>(g.ksq(row, col));
        if (k2 == 0.0) continue;
        const double w = g.weight(col);
        const double wo = std::norm(s.omega.coeffs()[i]);
        const double jo = std::norm(s.j.coeffs()[i]);
        du += w * sigma_[i] * wo / k2;
        db += w * (ksq_[i] > 0.0 ? jo : 0.0);
        gj += w * k2 * jo;
      }
    }
    const double area = g.length() * g.length();
    return {2.0 * area * du, 2.0 * area * db, area * gj};
  }

  /// Ledger increment over one step. Each mode's |c(t)|^2 is split into the free
  /// decay e^{-2 lambda t}|c(0)|^2, integrated exactly, and a remainder that
  /// vanishes for unforced modes, integrated with the RK4 stage weights.
  void accumulate_ledger(const SimState& y, const SimState& y2, const SimState& y3, const SimState& y4,
                         double dt, const std::vector<double>& ew_full, const std::vector<double>& ej_full,
                         LedgerIntegrals& ledger) const {
    const auto& g = *grid_;
    auto free_decay = [dt](double lambda) {
      const double z = 2.0 * lambda * dt;
      return z == 0.0 ? dt : -std::expm1(-z) / (2.0 * lambda);
    };
    double du = 0.0;
    double db = 0.0;
    double gj = 0.0;
    for (int row = 0; row < g.n(); ++row) {
      for (int col = 0; col < g.half(); ++col) {
        const std::size_t i = g.index(row, col);
        const double k2 = static_cast<double>(g.ksq(row, col));
        if (k2 == 0.0) continue;
        const double w = g.weight(col);
        auto integral = [&](const SpectralField SimState::*f, double lambda, double e1) {
          const double c0 = std::norm((y.*f).coeffs()[i]);
          const double r2 = std::norm((y2.*f).coeffs()[i]) - e1 * c0;
          const double r3 = std::norm((y3.*f).coeffs()[i]) - e1 * c0;
          const double r4 = std::norm((y4.*f).coeffs()[i]) - e1 * e1 * c0;
          return c0 * free_decay(lambda) + dt / 6.0 * (2.0 * (r2 + r3) + r4);
        };
        const double iw = integral(&SimState::omega, sigma_[i], ew_full[i]);
        const double ij = integral(&SimState::j, ksq_[i], ej_full[i]);
        du += w * sigma_[i] * iw / k2;
        db += w * (ksq_[i] > 0.0 ? ij : 0.0);
        gj += w * k2 * ij;
      }
    }
    const double area = g.length() * g.length();
    ledger.diss_u += 2.0 * area * du;
    ledger.diss_b += 2.0 * area * db;
    ledger.grad_j += area * gj;
  }

  /// One integrating-factor RK4 step of size dt; adds the step's ledger
  /// integrals to `ledger` when given.
  SimState step(const SimState& y, double dt, LedgerIntegrals* ledger = nullptr) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw Error(errc::cfl_violation, "time step is not positive and finite");
    }
    const std::size_t m = grid_->spectral_size();
    std::vector<double> ew_half(m), ew_full(m), ej_half(m), ej_full(m);
    for (std::size_t i = 0; i < m; ++i) {
      ew_half[i] = std::exp(-0.5 * dt * sigma_[i]);
      ew_full[i] = ew_half[i] * ew_half[i];
      ej_half[i] = std::exp(-0.5 * dt * ksq_[i]);
      ej_full[i] = ej_half[i] * ej_half[i];
    }
    auto combine = [&](auto&& f) {
      SimState out{y.t, SpectralField(grid_), SpectralField(grid_)};
      auto& wo = out.omega.coeffs();
      auto& jo = out.j.coeffs();
      for (std::size_t i = 0; i < m; ++i) f(i, wo[i], jo[i]);
      return out;
    };

    const auto [a_w, a_j] = rhs(y);
    SimState y2 = combine([&](std::size_t i, Complex& w, Complex& jj) {
      w = ew_half[i] * (y.omega.coeffs()[i] + 0.5 * dt * a_w.coeffs()[i]);
      jj = ej_half[i] * (y.j.coeffs()[i] + 0.5 * dt * a_j.coeffs()[i]);
    });
    y2.t = y.t + 0.5 * dt;
    const auto [b_w, b_j] = rhs(y2);
    SimState y3 = combine([&](std::size_t i, Complex& w, Complex& jj) {
      w = ew_half[i] * y.omega.coeffs()[i] + 0.5 * dt * b_w.coeffs()[i];
      jj = ej_half[i] * y.j.coeffs()[i] + 0.5 * dt * b_j.coeffs()[i];
    });
    y3.t = y2.t;
    const auto [c_w, c_j] = rhs(y3);
    SimState y4 = combine([&](std::size_t i, Complex& w, Complex& jj) {
      w = ew_full[i] * y.omega.coeffs()[i] + dt * ew_half[i] * c_w.coeffs()[i];
      jj = ej_full[i] * y.j.coeffs()[i] + dt * ej_half[i] * c_j.coeffs()[i];
    });
    y4.t = y.t + dt;
    const auto [d_w, d_j] = rhs(y4);
    SimState next = combine([&](std::size_t i, Complex& w, Complex& jj) {
      w = ew_full[i] * y.omega.coeffs()[i] +
          dt / 6.0 *
              (ew_full[i] * a_w.coeffs()[i] + 2.0 * ew_half[i] * (b_w.coeffs()[i] + c_w.coeffs()[i]) +
               d_w.coeffs()[i]);
      jj = ej_full[i] * y.j.coeffs()[i] +
           dt / 6.0 *
               (ej_full[i] * a_j.coeffs()[i] + 2.0 * ej_half[i] * (b_j.coeffs()[i] + c_j.coeffs()[i]) +
                d_j.coeffs()[i]);
    });
    next.t = y.t + dt;
    next.omega(0, 0) = 0.0;
    next.j(0, 0) = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
      const Complex w = next.omega.coeffs()[i];
      const Complex jj = next.j.coeffs()[i];
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag()) || !std::isfinite(jj.real()) ||
          !std::isfinite(jj.imag())) {
        throw Error(errc::cfl_violation, "non-finite spectral coefficient after step");
      }
    }

    if (ledger != nullptr) accumulate_ledger(y, y2, y3, y4, dt, ew_full, ej_full, *ledger);
    return next;
  }

 private:
  GridPtr grid_;
  StepperConfig config_;
  std::vector<double> sigma_;
  std::vector<double> ksq_;
};

/// Free-function form of the right-hand side.
inline std::pair<SpectralField, SpectralField> rhs(const SimState& state, const DissipationSymbol& sym,
                                                   DynamicsHooks hooks = {}) {
  StepperConfig cfg;
  cfg.hooks = hooks;
  return Dynamics(state.omega.grid(), sym, cfg).rhs(state);
}

/// One step with dt chosen from the CFL rule.
inline SimState step(const SimState& state, const DissipationSymbol& sym, const StepperConfig& cfg) {
  Dynamics dyn(state.omega.grid(), sym, cfg);
  return dyn.step(state, dyn.choose_dt(state));
}

struct Sample {
  const SimState& state;
  const LedgerIntegrals& ledger;
  long step;
};

struct RunCallbacks {
  std::function<void(const Sample&)> diagnostics;
  std::function<void(const Sample&)> snapshot;
  int sample_every = 1;
};

struct RunResult {
  SimState final_state;
  LedgerIntegrals ledger;
  long steps = 0;
};

/// Advances to t_end, sampling at step 0, every `sample_every` steps and at
/// the final step, which is shortened to land on t_end. A failed step raises
/// BlowUpError carrying the last good state's report.
inline RunResult run(const SimState& initial, const Dynamics& dyn, double t_end,
                     const RunCallbacks& callbacks = {}) {
  RunResult result{initial, {}, 0};
  if (!(t_end > initial.t)) return result;
  const int every = std::max(1, callbacks.sample_every);
  auto emit = [&](const SimState& s, long step) {
    const Sample sample{s, result.ledger, step};
    if (callbacks.diagnostics) callbacks.diagnostics(sample);
    if (callbacks.snapshot) callbacks.snapshot(sample);
  };

  SimState state = initial;
  emit(state, 0);
  long step = 0;
  for (bool last = false; !last;) {
    try {
      double dt = dyn.choose_dt(state);
      const double remaining = t_end - state.t;
      if (dt >= remaining || remaining - dt <= 1e-12 * std::max(1.0, t_end)) {
        dt = remaining;
        last = true;
      }
      SimState next = dyn.step(state, dt, &result.ledger);
      if (last) next.t = t_end;
      state = std::move(next);
    } catch (const Error& e) {
      if (e.code() != errc::cfl_violation) throw;
      BlowUpReport report;
      report.t = state.t;
      report.max_abs_omega = sup_norm(inverse(state.omega));
      report.tail_ratio = energy_tail_ratio(state.omega, state.j);
      report.reason = e.what();
      throw BlowUpError(report);
    }
    ++step;
    if (step % every == 0 || last) emit(state, step);
  }
  result.final_state = std::move(state);
  result.steps = step;
  return result;
}

}  // namespace gmhd
