#pragma once

// Budget quantities, norms and blow-up monitors computed from simulation
// samples, plus the ledgers that check them over a run.

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace gmhd {

struct LpNorms {
  double p2 = 0.0;
  double p4 = 0.0;
  double p8 = 0.0;
  double inf = 0.0;
};

inline LpNorms lp_norms(const RealField& f) {
  return {lp_norm(f, 2.0), lp_norm(f, 4.0), lp_norm(f, 8.0), sup_norm(f)};
}

struct DiagnosticsRecord {
  double t = 0.0;
  double energy_u = 0.0;
  double energy_b = 0.0;
  double diss_u_cum = 0.0;
  double diss_b_cum = 0.0;
  double enstrophy = 0.0;
  double current_sq = 0.0;
  double grad_j_cum = 0.0;
  LpNorms lp_omega;
  LpNorms lp_j;
  double b_inf = 0.0;
  double grad_b_lp = 0.0;  // ||grad b||_{L^4}, Frobenius norm pointwise
  double g_l2 = 0.0;
  double g_inf = 0.0;
  double f_inf = 0.0;
  double d_total = 0.0;
  double bkm_integral = 0.0;
  double tail_ratio = 0.0;

  static constexpr int kColumns = 24;

  static const std::string& csv_header() {
    static const std::string header =
        "t,energy_u,energy_b,diss_u_cum,diss_b_cum,enstrophy,current_sq,grad_j_cum,"
        "lp_omega_2,lp_omega_4,lp_omega_8,lp_omega_inf,lp_j_2,lp_j_4,lp_j_8,lp_j_inf,"
        "b_inf,grad_b_lp,g_l2,g_inf,f_inf,d_total,bkm_integral,tail_ratio";
    return header;
  }

  std::array<double, kColumns> values() const {
    return {t,          energy_u,   energy_b,   diss_u_cum, diss_b_cum, enstrophy,
            current_sq, grad_j_cum, lp_omega.p2, lp_omega.p4, lp_omega.p8, lp_omega.inf,
            lp_j.p2,    lp_j.p4,    lp_j.p8,    lp_j.inf,   b_inf,      grad_b_lp,
            g_l2,       g_inf,      f_inf,      d_total,    bkm_integral, tail_ratio};
  }

  static DiagnosticsRecord from_values(const std::array<double, kColumns>& v) {
    DiagnosticsRecord r;
    r.t = v[0];
    r.energy_u = v[1];
    r.energy_b = v[2];
    r.diss_u_cum = v[3];
    r.diss_b_cum = v[4];
    r.enstrophy = v[5];
    r.current_sq = v[6];
    r.grad_j_cum = v[7];
    r.lp_omega = {v[8], v[9], v[10], v[11]};
    r.lp_j = {v[12], v[13], v[14], v[15]};
    r.b_inf = v[16];
    r.grad_b_lp = v[17];
    r.g_l2 = v[18];
    r.g_inf = v[19];
    r.f_inf = v[20];
    r.d_total = v[21];
    r.bkm_integral = v[22];
    r.tail_ratio = v[23];
    return r;
  }

  /// One CSV line (no newline), 17 significant digits.
  std::string csv_row() const {
    std::string out;
    char buf[40];
    for (double v : values()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (!out.empty()) out += ',';
      out += buf;
    }
    return out;
  }

  double energy() const { return energy_u + energy_b; }
};

// ---------------------------------------------------------------------------
// Structural quantities

struct StructuralG {
  RealVector field;  // G = lap b + (b.grad) u
  double l2 = 0.0;
  double l4 = 0.0;
  double l8 = 0.0;
  double inf = 0.0;
};

namespace diag_detail {

// (b.grad) v for one component v, with b and grad v in real space.
inline RealField advect(const RealVector& b, const SpectralField& v) {
  const RealField d1 = inverse(derivative(v, 1));
  const RealField d2 = inverse(derivative(v, 2));
  RealField out(v.grid());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out.values()[i] = b.x1.values()[i] * d1.values()[i] + b.x2.values()[i] * d2.values()[i];
  }
  return out;
}

}  // namespace diag_detail

inline StructuralG structural_g(const SpectralVector& u, const SpectralVector& b) {
  const RealVector br = inverse(b);
  StructuralG g;
  g.field.x1 = inverse(laplacian(b.x1));
  g.field.x2 = inverse(laplacian(b.x2));
  const RealField a1 = diag_detail::advect(br, u.x1);
  const RealField a2 = diag_detail::advect(br, u.x2);
  for (std::size_t i = 0; i < a1.values().size(); ++i) {
    g.field.x1.values()[i] += a1.values()[i];
    g.field.x2.values()[i] += a2.values()[i];
  }
  const RealField mag = magnitude(g.field);
  g.l2 = lp_norm(mag, 2.0);
  g.l4 = lp_norm(mag, 4.0);
  g.l8 = lp_norm(mag, 8.0);
  g.inf = sup_norm(mag);
  return g;
}

struct ForcingF {
  RealField field;  // f = b1 G2 - b2 G1
  double inf = 0.0;
};

/// f from an already computed G.
inline ForcingF forcing_f(const SpectralVector& b, const StructuralG& g) {
  const RealVector br = inverse(b);
  ForcingF f{RealField(b.x1.grid()), 0.0};
  for (std::size_t i = 0; i < f.field.values().size(); ++i) {
    f.field.values()[i] = br.x1.values()[i] * g.field.x2.values()[i] - br.x2.values()[i] * g.field.x1.values()[i];
  }
  f.inf = sup_norm(f.field);
  return f;
}

inline ForcingF forcing_f(const SpectralVector& u, const SpectralVector& b) {
  return forcing_f(b, structural_g(u, b));
}

/// int D dx = 2 <omega, L omega> = 2 * 4 pi^2 sum_k sigma(|k|) |omega_hat|^2.
inline double d_total(const SpectralField& omega, const std::vector<double>& sigma_modes) {
  const auto& g = *omega.grid();
  return 2.0 * weighted_norm_sq(omega, [&](int row, int col) { return sigma_modes[g.index(row, col)]; });
}

/// ||grad b||_{L^4} with the Frobenius norm of the gradient matrix.
inline double grad_b_l4(const SpectralVector& b) {
  const RealField a = inverse(derivative(b.x1, 1));
  const RealField c = inverse(derivative(b.x1, 2));
  const RealField d = inverse(derivative(b.x2, 1));
  const RealField e = inverse(derivative(b.x2, 2));
  RealField frob(b.x1.grid());
  for (std::size_t i = 0; i < frob.values().size(); ++i) {
    frob.values()[i] = std::sqrt(a.values()[i] * a.values()[i] + c.values()[i] * c.values()[i] +
                                 d.values()[i] * d.values()[i] + e.values()[i] * e.values()[i]);
  }
  return lp_norm(frob, 4.0);
}

/// Instantaneous record; cumulative columns come from the caller.
inline DiagnosticsRecord compute_record(const SimState& s, const std::vector<double>& sigma_modes,
                                        const LedgerIntegrals& ledger, double bkm_integral) {
  const auto& g = *s.omega.grid();
  const auto inv_ksq = [&](int row, int col) {
    const auto k2 = g.ksq(row, col);
    return k2 == 0 ? 0.0 : 1.0 / static_cast<double>(k2);
  };
  DiagnosticsRecord r;
  r.t = s.t;
  r.energy_u = weighted_norm_sq(s.omega, inv_ksq);
  r.energy_b = weighted_norm_sq(s.j, inv_ksq);
  r.diss_u_cum = ledger.diss_u;
  r.diss_b_cum = ledger.diss_b;
  r.grad_j_cum = ledger.grad_j;
  r.enstrophy = l2_norm_sq(s.omega);
  r.current_sq = l2_norm_sq(s.j);
  r.lp_omega = lp_norms(inverse(s.omega));
  r.lp_j = lp_norms(inverse(s.j));

  const auto [u, b] = reconstruct(s);
  r.b_inf = sup_norm(magnitude(inverse(b)));
  r.grad_b_lp = grad_b_l4(b);
  const StructuralG gg = structural_g(u, b);
  const ForcingF f = forcing_f(b, gg);
  r.g_l2 = gg.l2;
  r.g_inf = gg.inf;
  r.f_inf = f.inf;
  r.d_total = d_total(s.omega, sigma_modes);
  r.bkm_integral = bkm_integral;
  r.tail_ratio = energy_tail_ratio(s.omega, s.j);
  return r;
}

/// Builds records from run samples, trapezoid-accumulating int ||omega||_inf dt.
class Recorder {
 public:
  explicit Recorder(std::vector<double> sigma_modes) : sigma_(std::move(sigma_modes)) {}

  const DiagnosticsRecord& add(const SimState& s, const LedgerIntegrals& ledger) {
    DiagnosticsRecord r = compute_record(s, sigma_, ledger, 0.0);
    if (!records_.empty()) {
      const auto& prev = records_.back();
      bkm_ += 0.5 * (r.t - prev.t) * (r.lp_omega.inf + prev.lp_omega.inf);
    }
    r.bkm_integral = bkm_;
    records_.push_back(r);
    return records_.back();
  }

  const std::vector<DiagnosticsRecord>& records() const { return records_; }

 private:
  std::vector<double> sigma_;
  std::vector<DiagnosticsRecord> records_;
  double bkm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Ledgers

struct BudgetVerdict {
  bool pass = false;
  double max_residual = 0.0;
  double c_fit = 0.0;  // enstrophy ledger only
  std::string detail;
};

/// E(t) + D_cum(t) <= E(0)(1 + tol) at every sample; residual
/// max |E(0) - E(t) - D_cum(t)|.
inline BudgetVerdict energy_budget(const std::vector<DiagnosticsRecord>& records, double tol = 1e-6) {
  if (records.size() < 2) throw Error(errc::insufficient_samples, "energy budget needs >= 2 records");
  const double e0 = records.front().energy();
  BudgetVerdict v;
  v.pass = true;
  for (const auto& r : records) {
    const double lhs = r.energy() + r.diss_u_cum + r.diss_b_cum;
    v.max_residual = std::max(v.max_residual, std::fabs(e0 - lhs));
    if (!(lhs <= e0 * (1.0 + tol))) {
      if (v.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "E + D_cum = %.17g exceeds E(0)(1+tol) at t = %.17g", lhs, r.t);
        v.detail = buf;
      }
      v.pass = false;
    }
  }
  return v;
}

/// Residual ratio between a run and the same run at half the step; the
/// ledger is time-integration limited when the ratio is >= 8.
inline double residual_reduction(const BudgetVerdict& coarse, const BudgetVerdict& fine) {
  if (fine.max_residual == 0.0) return coarse.max_residual == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return coarse.max_residual / fine.max_residual;
}

namespace diag_detail {

// Second-order derivative of y(t) on a nonuniform grid (three-point stencils).
inline std::vector<double> derivative3(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t m = t.size();
  std::vector<double> d(m);
  auto stencil = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t at) {
    // Lagrange derivative through (t_a, t_b, t_c) evaluated at t_at.
    const double x = t[at];
    const double la = ((x - t[b]) + (x - t[c])) / ((t[a] - t[b]) * (t[a] - t[c]));
    const double lb = ((x - t[a]) + (x - t[c])) / ((t[b] - t[a]) * (t[b] - t[c]));
    const double lc = ((x - t[a]) + (x - t[b])) / ((t[c] - t[a]) * (t[c] - t[b]));
    return la * y[a] + lb * y[b] + lc * y[c];
  };
  d[0] = stencil(0, 1, 2, 0);
  for (std::size_t i = 1; i + 1 < m; ++i) d[i] = stencil(i - 1, i, i + 1, i);
  d[m - 1] = stencil(m - 3, m - 2, m - 1, m - 1);
  return d;
}

// First-order (two-point) derivative; only used to bound the error of derivative3.
inline std::vector<double> derivative2(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t m = t.size();
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = i + 1 < m ? i : i - 1;
    d[i] = (y[a + 1] - y[a]) / (t[a + 1] - t[a]);
  }
  return d;
}

struct CumulativeIntegral {
  std::vector<double> value;  // trapezoid
  // Sampling-error credit. Per interval three estimates are formed (trapezoid,
  // local parabola, exponential fit h (y0 - y1) / log(y0 / y1), exact for pure
  // decay); the credit is |trapezoid - lowest| + (highest - lowest), so
  // value -/+ error brackets every estimate with one spread to spare.
  std::vector<double> error;
};

inline CumulativeIntegral integrate_samples(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t m = t.size();
  CumulativeIntegral out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 1; i < m; ++i) {
    const double h = t[i] - t[i - 1];
    const double trap = 0.5 * h * (y[i] + y[i - 1]);
    double quad = trap;
    if (m >= 3) {
      // Exact integral over [t_{i-1}, t_i] of the parabola through three neighbours.
      const std::size_t a = (i + 1 < m) ? i - 1 : i - 2;
      const double x0 = t[a], x1 = t[a + 1], x2 = t[a + 2];
      auto prim = [&](double x) {
        // integral of the Lagrange basis, expanded around x0.
        const double l0 = (x * x * x / 3.0 - (x1 + x2) * x * x / 2.0 + x1 * x2 * x) / ((x0 - x1) * (x0 - x2));
        const double l1 = (x * x * x / 3.0 - (x0 + x2) * x * x / 2.0 + x0 * x2 * x) / ((x1 - x0) * (x1 - x2));
        const double l2 = (x * x * x / 3.0 - (x0 + x1) * x * x / 2.0 + x0 * x1 * x) / ((x2 - x0) * (x2 - x1));
        return l0 * y[a] + l1 * y[a + 1] + l2 * y[a + 2];
      };
      quad = prim(t[i]) - prim(t[i - 1]);
    }
    double lo = std::min(trap, quad);
    double hi = std::max(trap, quad);
    const double y0 = y[i - 1], y1 = y[i];
    if (y0 > 0.0 && y1 > 0.0 && y0 != y1) {
      const double expfit = h * (y0 - y1) / std::log(y0 / y1);
      lo = std::min(lo, expfit);
      hi = std::max(hi, expfit);
    }
    const double err = std::max(trap - lo, hi - trap) + (hi - lo);
    out.value[i] = out.value[i - 1] + trap;
    out.error[i] = out.error[i - 1] + err;
  }
  return out;
}

}  // namespace diag_detail

/// d/dt(||omega||^2 + ||j||^2) + d_total + 2||grad j||^2 <= C ||omega||^2 ||j||^2.
/// Derivatives come from the sampled ledger by three-point differences and C_fit
/// is the smallest constant consistent with every sample. Where the product
/// vanishes the left side only has to stay below the gap between the three- and
/// two-point estimates (a conservative bound on the sampling error). The Gronwall form
///   Y(t) + int_0^t (d_total + 2||grad j||^2) <= Y(0) exp(C_fit int_0^t ||j||^2)
/// is then checked at each sample, crediting the integrals' sampling error likewise.
inline BudgetVerdict enstrophy_budget(const std::vector<DiagnosticsRecord>& records) {
  const std::size_t m = records.size();
  if (m < 3) throw Error(errc::insufficient_samples, "enstrophy budget needs >= 3 records");
  std::vector<double> t(m), y(m), gj(m), dt(m), jsq(m), prod(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = records[i];
    t[i] = r.t;
    y[i] = r.enstrophy + r.current_sq;
    gj[i] = 2.0 * r.grad_j_cum;
    dt[i] = r.d_total;
    jsq[i] = r.current_sq;
    prod[i] = r.enstrophy * r.current_sq;
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (!(t[i] > t[i - 1])) throw Error(errc::insufficient_samples, "record times must increase");
  }
  // Y + 2 int ||grad j||^2 is differenced as one sequence.
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = y[i] + gj[i];
  const auto d3 = diag_detail::derivative3(t, z);
  const auto d2 = diag_detail::derivative2(t, z);

  BudgetVerdict v;
  v.pass = true;
  double c_fit = 0.0;
  const double scale = std::max(y[0], std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < m; ++i) {
    const double lhs = d3[i] + dt[i];
    if (prod[i] > 0.0) {
      c_fit = std::max(c_fit, lhs / prod[i]);
    } else if (lhs > std::fabs(d3[i] - d2[i]) + 1e-12 * scale) {
      c_fit = std::numeric_limits<double>::infinity();
    }
  }
  v.c_fit = c_fit;
  if (!std::isfinite(c_fit)) {
    v.pass = false;
    v.detail = "left side positive where ||omega||^2 ||j||^2 vanishes";
    return v;
  }

  const auto diss = diag_detail::integrate_samples(t, dt);
  const auto jint = diag_detail::integrate_samples(t, jsq);
  for (std::size_t i = 0; i < m; ++i) {
    const double lhs = z[i] + diss.value[i] - diss.error[i];
    const double rhs = y[0] * std::exp(c_fit * (jint.value[i] + jint.error[i]));
    v.max_residual = std::max(v.max_residual, lhs - rhs);
    if (!(lhs <= rhs * (1.0 + 1e-9) + 1e-12 * scale)) {
      if (v.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "Gronwall bound fails at t = %.17g (%.17g > %.17g)", t[i], lhs, rhs);
        v.detail = buf;
      }
      v.pass = false;
    }
  }
  return v;
}

struct BkmResult {
  double integral = 0.0;
  bool blowup_flag = false;
};

/// Trapezoid integral of ||omega||_inf; flags tail_ratio > 0.1 or a tenfold
/// jump of ||omega||_inf between consecutive samples.
inline BkmResult bkm_monitor(const std::vector<DiagnosticsRecord>& records) {
  BkmResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.tail_ratio > 0.1) out.blowup_flag = true;
    if (i == 0) continue;
    const auto& p = records[i - 1];
    out.integral += 0.5 * (r.t - p.t) * (r.lp_omega.inf + p.lp_omega.inf);
    if (p.lp_omega.inf > 0.0 && r.lp_omega.inf > 10.0 * p.lp_omega.inf) out.blowup_flag = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonlocal dissipation in real space

/// Grid sum of |omega|^{p-2} omega L omega (p even, >= 2).
inline double positivity_check(const SpectralField& omega, const DissipationSymbol& sym, int p) {
  if (p < 2 || p % 2 != 0) throw Error(errc::odd_p, "p must be an even integer >= 2, got " + std::to_string(p));
  const RealField w = inverse(omega);
  const RealField lw = inverse(apply_symbol(omega, sym));
  const double h = omega.grid()->dx();
  double sum = 0.0;
  for (std::size_t i = 0; i < w.values().size(); ++i) {
    const double a = w.values()[i];
    sum += std::pow(a * a, 0.5 * (p - 2)) * a * lw.values()[i];
  }
  return sum * h * h;
}

struct GridPoint {
  int i1 = 0;
  int i2 = 0;
};

inline constexpr std::size_t kMaxPointwiseD = 16;

namespace diag_detail {

// Lattice offsets y = h (a, b) with 0 < |y| <= pi and weights h^2 / (|y|^2 m(|y|)),
// plus the origin cell replaced by the equal-area disk of radius h / sqrt(pi):
// with (omega(x) - omega(x - y))^2 ~ (grad omega . y)^2 there, its contribution
// is pi |grad omega(x)|^2 int_0^rho r / m(r) dr.
struct DStencil {
  std::vector<int> da;
  std::vector<int> db;
  std::vector<double> weight;
  double disk = 0.0;
};

inline DStencil d_stencil(const SpectralGrid& g, const KernelProfile& profile) {
  DStencil st;
  const double h = g.dx();
  const int half = g.n() / 2;
  const double pi = std::numbers::pi;
  for (int b = -half; b <= half; ++b) {
    for (int a = -half; a <= half; ++a) {
      if (a == 0 && b == 0) continue;
      const double r = h * std::hypot(static_cast<double>(a), static_cast<double>(b));
      if (r > pi * (1.0 + 1e-12)) continue;
      st.da.push_back(a);
      st.db.push_back(b);
      st.weight.push_back(h * h / (r * r * kernel_detail::m_extended(profile, r)));
    }
  }
  const double rho = h / std::sqrt(pi);
  // int_0^rho r/m(r) dr in t = log r: integrand r^2 / m(r).
  const auto est = quadrature::integrate(
      [&](double t) {
        const double r = std::exp(t);
        return r * r / kernel_detail::m_extended(profile, r);
      },
      std::log(rho) - 60.0, std::log(rho), 0.0, 1e-12);
  st.disk = pi * est.value;
  return st;
}

inline double d_at(const RealField& w, const RealField& gx, const RealField& gy, const DStencil& st,
                   int i1, int i2) {
  const int n = w.grid()->n();
  const double center = w(i2, i1);
  double sum = 0.0;
  for (std::size_t s = 0; s < st.weight.size(); ++s) {
    const int j1 = ((i1 - st.da[s]) % n + n) % n;
    const int j2 = ((i2 - st.db[s]) % n + n) % n;
    const double diff = center - w(j2, j1);
    sum += diff * diff * st.weight[s];
  }
  const double g2 = gx(i2, i1) * gx(i2, i1) + gy(i2, i1) * gy(i2, i1);
  return sum + st.disk * g2;
}

}  // namespace diag_detail

/// D(x) = P.V. int_{|y| <= pi} (omega(x) - omega(x - y))^2 / (|y|^2 m(|y|)) dy at grid nodes.
inline std::vector<double> pointwise_d(const SpectralField& omega, const KernelProfile& profile,
                                       const std::vector<GridPoint>& points) {
  if (points.size() > kMaxPointwiseD) {
    throw Error(errc::too_many_points, "pointwise_d takes at most 16 points");
  }
  const auto& g = *omega.grid();
  const auto st = diag_detail::d_stencil(g, profile);
  const RealField w = inverse(omega);
  const RealField gx = inverse(derivative(omega, 1));
  const RealField gy = inverse(derivative(omega, 2));
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (p.i1 < 0 || p.i2 < 0 || p.i1 >= g.n() || p.i2 >= g.n()) {
      throw Error(errc::evaluation_failure, "grid point outside the grid");
    }
    out.push_back(diag_detail::d_at(w, gx, gy, st, p.i1, p.i2));
  }
  return out;
}

/// h^2 sum over every grid node of D(x); O(n^4), meant for small grids.
inline double pointwise_d_total(const SpectralField& omega, const KernelProfile& profile) {
  const auto& g = *omega.grid();
  const auto st = diag_detail::d_stencil(g, profile);
  const RealField w = inverse(omega);
  const RealField gx = inverse(derivative(omega, 1));
  const RealField gy = inverse(derivative(omega, 2));
  double sum = 0.0;
  for (int i2 = 0; i2 < g.n(); ++i2) {
    for (int i1 = 0; i1 < g.n(); ++i1) sum += diag_detail::d_at(w, gx, gy, st, i1, i2);
  }
  return sum * g.dx() * g.dx();
}

}  // namespace gmhd
