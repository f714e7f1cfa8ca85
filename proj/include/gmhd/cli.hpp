#pragma once

// Subcommands behind the gmhd2d executable. Each returns the process exit
// code: 0 success/admissible, 1 warning/weak-only, 2 error/rejected,
// 3 blow-up abort.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "presets.hpp"
#include "spectral.hpp"

namespace gmhd {

enum ExitCode : int { kExitOk = 0, kExitWarn = 1, kExitError = 2, kExitBlowUp = 3 };

namespace cli_detail {

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cli_detail

inline SimState initial_state(const RunConfig& cfg, const GridPtr& grid) {
  switch (cfg.init.preset) {
    case Preset::OrszagTang: return orszag_tang(grid, cfg.init.amplitude, cfg.init.beta);
    case Preset::SingleMode: return single_mode(grid, cfg.init.amplitude);
    case Preset::RandomBand:
      return random_band(grid, cfg.init.seed.value_or(0), cfg.init.k_min, cfg.init.k_max, cfg.init.amplitude);
  }
  throw Error(errc::invalid_config, "unknown preset");
}

inline StepperConfig stepper_config(const RunConfig& cfg) {
  StepperConfig s;
  s.cfl = cfg.cfl;
  s.dt_max = cfg.dt_max;
  return s;
}

inline int cmd_validate_kernel(const RunConfig& cfg, std::ostream& out) {
  const ValidationReport report = validate_profile(cfg.kernel);
  out << report.to_key_values();
  switch (report.verdict) {
    case Verdict::Admissible: return kExitOk;
    case Verdict::WeakOnly: return kExitWarn;
    case Verdict::Rejected: return kExitError;
  }
  return kExitError;
}

/// `kappa,sigma` rows for every distinct lattice magnitude <= kappa_max.
inline int cmd_symbol(const RunConfig& cfg, std::optional<double> kappa_max, std::ostream& out) {
  const SpectralGrid grid(cfg.n);
  std::vector<double> kappas;
  for (double k : grid.distinct_kappas()) {
    if (!kappa_max || k <= *kappa_max * (1.0 + 1e-12)) kappas.push_back(k);
  }
  const DissipationSymbol sym = compute_symbol(cfg.kernel, kappas);
  out << "kappa,sigma\n";
  for (std::size_t i = 0; i < sym.kappas.size(); ++i) {
    out << cli_detail::real(sym.kappas[i]) << ',' << cli_detail::real(sym.sigmas[i]) << '\n';
  }
  return kExitOk;
}

/// Runs the configured simulation into `out_dir` (diagnostics.csv plus
/// optional snapshots) and prints a summary.
inline int cmd_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(errc::io_failure, "cannot create " + out_dir + ": " + ec.message());

  const GridPtr grid = make_grid(cfg.n);
  const DissipationSymbol sym = grid_symbol(cfg.kernel, *grid);
  const Dynamics dyn(grid, sym, stepper_config(cfg));
  const SimState initial = initial_state(cfg, grid);

  CsvWriter csv((fs::path(out_dir) / "diagnostics.csv").string());
  Recorder recorder(dyn.sigma());
  RunCallbacks callbacks;
  callbacks.sample_every = cfg.sample_every;
  callbacks.diagnostics = [&](const Sample& s) { csv.write(recorder.add(s.state, s.ledger)); };
  if (cfg.snapshots) {
    callbacks.snapshot = [&](const Sample& s) {
      write_snapshot((fs::path(out_dir) / snapshot_name(s.step)).string(), s.state);
    };
  }

  RunResult result;
  try {
    result = run(initial, dyn, cfg.t_end, callbacks);
  } catch (const BlowUpError& e) {
    csv.close();
    const auto& r = e.report();
    err << "blow-up at t=" << cli_detail::real(r.t) << " max_abs_omega=" << cli_detail::real(r.max_abs_omega)
        << " tail_ratio=" << cli_detail::real(r.tail_ratio) << " (" << r.reason << ")\n";
    return kExitBlowUp;
  }
  csv.close();

  const auto& recs = recorder.records();
  out << "steps=" << result.steps << '\n';
  out << "samples=" << recs.size() << '\n';
  if (recs.empty()) {
    out << "energy_budget=n/a\nenstrophy_budget=n/a\n";
    return kExitOk;
  }
  double max_w = 0.0;
  for (const auto& r : recs) max_w = std::max(max_w, r.lp_omega.inf);
  const BkmResult bkm = bkm_monitor(recs);
  out << "final_energy=" << cli_detail::real(recs.back().energy()) << '\n';
  out << "max_omega_inf=" << cli_detail::real(max_w) << '\n';
  out << "bkm_integral=" << cli_detail::real(bkm.integral) << '\n';
  out << "blowup_flag=" << (bkm.blowup_flag ? "true" : "false") << '\n';

  bool ok = true;
  if (recs.size() >= 2) {
    const BudgetVerdict e = energy_budget(recs);
    out << "energy_budget=" << (e.pass ? "pass" : "fail") << " max_residual=" << cli_detail::real(e.max_residual)
        << '\n';
    ok = ok && e.pass;
  } else {
    out << "energy_budget=n/a\n";
  }
  if (recs.size() >= 3) {
    const BudgetVerdict s = enstrophy_budget(recs);
    out << "enstrophy_budget=" << (s.pass ? "pass" : "fail") << " c_fit=" << cli_detail::real(s.c_fit) << '\n';
    ok = ok && s.pass;
  } else {
    out << "enstrophy_budget=n/a\n";
  }
  return ok ? kExitOk : kExitWarn;
}

/// Recomputes diagnostics from snapshots (in the given order) and writes the
/// CSV to `out`. Instantaneous columns and the BKM integral follow the run's
/// code path; the cumulative dissipation columns are trapezoid integrals over
/// the snapshot times, since the stage values used in-run are not stored.
inline int cmd_diag(const RunConfig& cfg, const std::vector<std::string>& snapshots, std::ostream& out) {
  const GridPtr grid = make_grid(cfg.n);
  const DissipationSymbol sym = grid_symbol(cfg.kernel, *grid);
  const Dynamics dyn(grid, sym, stepper_config(cfg));
  Recorder recorder(dyn.sigma());
  LedgerIntegrals ledger;
  std::optional<std::pair<double, LedgerIntegrals>> prev;  // (t, rates)
  out << DiagnosticsRecord::csv_header() << '\n';
  for (const auto& path : snapshots) {
    const SimState s = read_snapshot(path, grid);
    if (s.omega.grid()->n() != cfg.n) {
      throw Error(errc::corrupt_snapshot, path + " has n=" + std::to_string(s.omega.grid()->n()) +
                                              ", config has n=" + std::to_string(cfg.n));
    }
    const LedgerIntegrals rate = dyn.rates(s);
    if (prev) {
      const double h = 0.5 * (s.t - prev->first);
      ledger.diss_u += h * (rate.diss_u + prev->second.diss_u);
      ledger.diss_b += h * (rate.diss_b + prev->second.diss_b);
      ledger.grad_j += h * (rate.grad_j + prev->second.grad_j);
    }
    prev = {s.t, rate};
    out << recorder.add(s, ledger).csv_row() << '\n';
  }
  return kExitOk;
}

}  // namespace gmhd
