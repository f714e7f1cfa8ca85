#pragma once

// Radial kernel profiles m(r), their admissibility checks, and the Fourier
// multiplier of the nonlocal operator
//
//   L u(x) = P.V. int (u(x) - u(x - y)) / (|y|^2 m(|y|)) dy,
//
// whose symbol on plane waves e^{i k.x} reduces to
//
//   sigma(kappa) = 2 pi int_0^inf (1 - J0(kappa r)) / (r m(r)) dr,  kappa = |k|.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bessel.hpp"
#include "error.hpp"
#include "quadrature.hpp"

namespace gmhd {

/// m(r) = r^{2 alpha}.
struct PowerLaw {
  double alpha = 0.5;
};

/// m(r) = [log(e + 1/r)]^{-(1+eps1)} [1 + log(1 + r)]^{1+eps2}: decays like
/// (-log r)^{-(1+eps1)} at the origin and grows like (log r)^{1+eps2} at infinity.
struct LogWeak {
  double eps1 = 1.0;
  double eps2 = 1.0;
};

/// Samples of m interpolated linearly in log-log space.
struct Tabulated {
  std::vector<double> radii;
  std::vector<double> values;
};

using ProfileFamily = std::variant<PowerLaw, LogWeak, Tabulated>;

struct KernelProfile {
  ProfileFamily family;
  bool override_weak = false;

  static KernelProfile power_law(double alpha, bool override_weak = false);
  static KernelProfile log_weak(double eps1, double eps2, bool override_weak = false);
  static KernelProfile tabulated(std::vector<double> radii, std::vector<double> values,
                                 bool override_weak = false);

  std::string id() const;
};

enum class Verdict { Admissible, WeakOnly, Rejected };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Admissible: return "Admissible";
    case Verdict::WeakOnly: return "WeakOnly";
    case Verdict::Rejected: return "Rejected";
  }
  return "Rejected";
}

struct ValidationReport {
  bool monotone_ok = false;
  std::optional<double> doubling_constant;
  double dini_integral = std::numeric_limits<double>::infinity();
  bool limit_zero_ok = false;
  Verdict verdict = Verdict::Rejected;

  /// Flat `key=value` listing, one entry per line.
  std::string to_key_values() const;
};

/// Symbol values sigma(kappa) for an explicit list of wavenumber magnitudes.
struct DissipationSymbol {
  std::string profile_id;
  std::vector<double> kappas;
  std::vector<double> sigmas;

  /// Exact lookup of a tabulated magnitude (relative match 1e-12).
  double at(double kappa) const;
};

// ---------------------------------------------------------------------------

inline KernelProfile KernelProfile::power_law(double alpha, bool override_weak) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(errc::invalid_config, "power_law alpha must be positive");
  }
  return {PowerLaw{alpha}, override_weak};
}

inline KernelProfile KernelProfile::log_weak(double eps1, double eps2, bool override_weak) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2)) {
    throw Error(errc::invalid_config, "log_weak eps1 and eps2 must be positive");
  }
  return {LogWeak{eps1, eps2}, override_weak};
}

inline KernelProfile KernelProfile::tabulated(std::vector<double> radii, std::vector<double> values,
                                              bool override_weak) {
  if (radii.size() < 2 || radii.size() != values.size()) {
    throw Error(errc::invalid_config, "tabulated profile needs >= 2 matching radii/values");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) {
      throw Error(errc::invalid_config, "tabulated radii must be positive");
    }
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw Error(errc::invalid_config, "tabulated radii must be strictly ascending");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(errc::invalid_config, "tabulated values must be positive");
    }
  }
  return {Tabulated{std::move(radii), std::move(values)}, override_weak};
}

namespace kernel_detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_m_log_weak(const LogWeak& p, double t) {
  // log(e + e^{-t})
  const double a = t < -1.0 ? -t + std::log1p(std::exp(1.0 + t)) : 1.0 + std::log1p(std::exp(-t - 1.0));
  const double b = 1.0 + softplus(t);
  return -(1.0 + p.eps1) * std::log(a) + (1.0 + p.eps2) * std::log(b);
}

// Log-log interpolation with the end slopes continued outside the table.
inline double log_m_tabulated(const Tabulated& p, double t) {
  const auto& r = p.radii;
  const std::size_t n = r.size();
  std::size_t lo;
  if (t <= std::log(r.front())) {
    lo = 0;
  } else if (t >= std::log(r.back())) {
    lo = n - 2;
  } else {
    const double x = std::exp(t);
    lo = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), x) - r.begin()) - 1;
    lo = std::min(lo, n - 2);
  }
  const double t0 = std::log(r[lo]);
  const double t1 = std::log(r[lo + 1]);
  const double y0 = std::log(p.values[lo]);
  const double y1 = std::log(p.values[lo + 1]);
  return y0 + (y1 - y0) * (t - t0) / (t1 - t0);
}

/// log m(e^t); total for every profile, including tables outside their range.
inline double log_m(const KernelProfile& profile, double t) {
  return std::visit(
      [t](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return 2.0 * p.alpha * t;
        } else if constexpr (std::is_same_v<T, LogWeak>) {
          return log_m_log_weak(p, t);
        } else {
          return log_m_tabulated(p, t);
        }
      },
      profile.family);
}

}  // namespace kernel_detail

inline std::string KernelProfile::id() const {
  using kernel_detail::format_real;
  std::string base = std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return "power_law(alpha=" + format_real(p.alpha) + ")";
        } else if constexpr (std::is_same_v<T, LogWeak>) {
          return "log_weak(eps1=" + format_real(p.eps1) + ",eps2=" + format_real(p.eps2) + ")";
        } else {
          return "tabulated(samples=" + std::to_string(p.radii.size()) + ",r=[" +
                 format_real(p.radii.front()) + "," + format_real(p.radii.back()) + "])";
        }
      },
      family);
  return override_weak ? base + "+override_weak" : base;
}

/// m(r) for r > 0. Tables are evaluable on [min radius / 2, 2 * max radius].
inline double evaluate_m(const KernelProfile& profile, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(errc::non_positive_radius, "m(r) needs a finite r > 0, got " +
                                               kernel_detail::format_real(r));
  }
  double value;
  if (const auto* p = std::get_if<PowerLaw>(&profile.family)) {
    value = std::pow(r, 2.0 * p->alpha);
  } else if (const auto* tab = std::get_if<Tabulated>(&profile.family)) {
    if (r < 0.5 * tab->radii.front() || r > 2.0 * tab->radii.back()) {
      throw Error(errc::tabulated_out_of_range,
                  "r=" + kernel_detail::format_real(r) + " outside the tabulated range");
    }
    value = std::exp(kernel_detail::log_m_tabulated(*tab, std::log(r)));
  } else {
    value = std::exp(kernel_detail::log_m(profile, std::log(r)));
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(errc::evaluation_failure,
                "m(" + kernel_detail::format_real(r) + ") is not positive and finite");
  }
  return value;
}

// ---------------------------------------------------------------------------
// Admissibility

namespace kernel_detail {

inline constexpr int kDiniShells = 61;  // shells n = 0..60
inline constexpr int kDecayWindow = 10;

struct DiniResult {
  double value = std::numeric_limits<double>::infinity();
  bool finite = false;
};

// int_0^1 m(r)/r dr over dyadic shells [2^{-n-1}, 2^{-n}], integrated in t = log r.
// m(r) with tables continued by their end slopes, as in the symbol.
inline double m_extended(const KernelProfile& profile, double r) {
  if (std::holds_alternative<Tabulated>(profile.family)) {
    return std::exp(log_m_tabulated(std::get<Tabulated>(profile.family), std::log(r)));
  }
  return evaluate_m(profile, r);
}

inline DiniResult dini_integral(const KernelProfile& profile) {
  std::vector<double> shells(kDiniShells);
  double partial = 0.0;
  const double ln2 = std::numbers::ln2;
  for (int n = 0; n < kDiniShells; ++n) {
    auto integrand = [&](double t) { return m_extended(profile, std::exp(t)); };
    const auto est = quadrature::integrate(integrand, -(n + 1) * ln2, -n * ln2, 0.0, 1e-12);
    shells[n] = est.value;
    partial += est.value;
  }
  const int last = kDiniShells - 1;
  bool ratios_ok = true;
  for (int n = last - kDecayWindow + 1; n <= last; ++n) {
    if (!(shells[n] < 0.999 * shells[n - 1])) ratios_ok = false;
  }
  if (!ratios_ok || !std::isfinite(partial)) return {};

  // Geometric tail from the last successive ratio.
  const double q = shells[last] / shells[last - 1];
  const double geometric_tail = shells[last] * q / (1.0 - q);
  if (geometric_tail < 1e-6 * partial) return {partial + geometric_tail, true};

  // Algebraic decay c_n ~ (n + 1/2)^{-p}: summable iff p > 1. The margin keeps
  // c_n ~ 1/n (borderline divergent) on the divergent side.
  const double n_hi = last + 0.5;
  const double n_lo = last - kDecayWindow + 0.5;
  const double p = -std::log(shells[last] / shells[last - kDecayWindow]) / std::log(n_hi / n_lo);
  if (p > 1.01) {
    const double tail = shells[last] * std::pow(n_hi, p) * std::pow(n_hi + 0.5, 1.0 - p) / (p - 1.0);
    return {partial + tail, true};
  }
  return {};
}

inline bool limit_is_zero(const KernelProfile& profile) {
  const double m1 = m_extended(profile, 1.0);
  std::vector<double> v(61);
  for (int k = 1; k <= 60; ++k) v[k] = m_extended(profile, std::ldexp(1.0, -k));
  for (int k = 2; k <= 60; ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  if (v[60] < 1e-6 * m1) return true;
  // Logarithmic approach to zero: m(2^{-k}) ~ k^{-q}. Require q >= 1/2 over k in [40, 60].
  const double slope = std::log(v[60] / v[40]) / std::log(60.0 / 40.0);
  return slope <= -0.5;
}

}  // namespace kernel_detail

/// Checks monotonicity, the doubling condition, the Dini-type integrability
/// at the origin and (for the weak regime) lim_{r->0+} m(r) = 0. Tables are
/// probed beyond their range with the end-slope continuation the symbol uses.
inline ValidationReport validate_profile(const KernelProfile& profile) {
  using kernel_detail::m_extended;
  ValidationReport report;

  // Monotonicity on 8 points per octave across [2^-61, 2^11].
  report.monotone_ok = true;
  double prev = m_extended(profile, std::ldexp(1.0, -61));
  for (int j = -61 * 8 + 1; j <= 11 * 8; ++j) {
    const double cur = m_extended(profile, std::exp2(j / 8.0));
    if (cur < prev * (1.0 - 1e-12)) report.monotone_ok = false;
    prev = cur;
  }
  if (const auto* tab = std::get_if<Tabulated>(&profile.family)) {
    for (std::size_t i = 1; i < tab->values.size(); ++i) {
      if (tab->values[i] < tab->values[i - 1] * (1.0 - 1e-12)) report.monotone_ok = false;
    }
  }

  double doubling = 0.0;
  bool doubling_finite = true;
  for (int k = -40; k <= 10; ++k) {
    const double r = std::ldexp(1.0, k);
    const double ratio = m_extended(profile, 2.0 * r) / m_extended(profile, r);
    if (!std::isfinite(ratio)) doubling_finite = false;
    doubling = std::max(doubling, ratio);
  }
  if (doubling_finite) report.doubling_constant = doubling;

  const auto dini = kernel_detail::dini_integral(profile);
  report.dini_integral = dini.finite ? dini.value : std::numeric_limits<double>::infinity();
  report.limit_zero_ok = kernel_detail::limit_is_zero(profile);

  if (report.monotone_ok && report.doubling_constant && dini.finite) {
    report.verdict = Verdict::Admissible;
  } else if (profile.override_weak && report.monotone_ok && report.limit_zero_ok) {
    report.verdict = Verdict::WeakOnly;
  } else {
    report.verdict = Verdict::Rejected;
  }
  return report;
}

inline std::string ValidationReport::to_key_values() const {
  using kernel_detail::format_real;
  std::ostringstream out;
  out << "monotone_ok=" << (monotone_ok ? "true" : "false") << '\n';
  out << "doubling_constant=" << (doubling_constant ? format_real(*doubling_constant) : "absent")
      << '\n';
  out << "dini_integral=" << (std::isfinite(dini_integral) ? format_real(dini_integral) : "inf")
      << '\n';
  out << "limit_zero_ok=" << (limit_zero_ok ? "true" : "false") << '\n';
  out << "verdict=" << to_string(verdict) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Symbol

namespace kernel_detail {

// Sums a sequence of non-negative panel contributions whose tail decays at
// least geometrically; the tail is closed with the observed ratio.
class GeometricTailSum {
 public:
  GeometricTailSum(double rel_tol, int max_terms) : rel_tol_(rel_tol), max_terms_(max_terms) {}

  /// Adds a term; returns true once the sum is converged.
  bool add(double term) {
    sum_ += term;
    ++count_;
    const double ratio = prev_ > 0.0 ? term / prev_ : 0.0;
    prev_ = term;
    if (term == 0.0 && count_ > 1) {
      done_ = true;
      return true;
    }
    if (count_ >= 4 && ratio < 1.0) {
      const double tail = term * ratio / (1.0 - ratio);
      const bool stable = std::fabs(ratio - prev_ratio_) < 1e-10 * ratio;
      if (tail < rel_tol_ * sum_ || (stable && ratio < 0.9999 && count_ >= 12)) {
        sum_ += tail;
        done_ = true;
      }
    }
    stalled_ = ratio > 0.9999 ? stalled_ + 1 : 0;
    prev_ratio_ = ratio;
    return done_;
  }

  /// True when the terms have stopped shrinking (ratio pinned near 1), or the
  /// term budget is spent.
  bool exhausted() const {
    return count_ >= max_terms_ || (count_ >= 64 && stalled_ >= 32);
  }
  double sum() const { return sum_; }

 private:
  double rel_tol_;
  int max_terms_;
  double sum_ = 0.0;
  double prev_ = 0.0;
  double prev_ratio_ = -1.0;
  int count_ = 0;
  int stalled_ = 0;
  bool done_ = false;
};

// log(1 - J0(e^t)); the small-argument branch avoids underflow of s^2/4.
inline double log_one_minus_j0(double t) {
  if (t < -12.0) {
    const double s2 = std::exp(2.0 * t);
    return 2.0 * t - std::log(4.0) + std::log1p(-s2 / 16.0);
  }
  return std::log(bessel::one_minus_j0(std::exp(t)));
}

inline double sigma(const KernelProfile& profile, double kappa) {
  if (kappa == 0.0) return 0.0;
  const double log_kappa = std::log(kappa);
  // m evaluated at r = s / kappa, with s = e^t.
  auto log_m_s = [&](double t) { return log_m(profile, t - log_kappa); };
  const double s0 = bessel::kFirstZero;
  const double t0 = std::log(s0);
  const double ln2 = std::numbers::ln2;
  constexpr double kPanelTol = 1e-14;

  // (0, s0]: int (1 - J0(s)) / m(s/kappa) d(log s), dyadic shells toward 0.
  GeometricTailSum head(1e-15, 20000);
  for (int k = 0;; ++k) {
    if (head.exhausted()) {
      throw Error(errc::quadrature_non_convergent,
                  "small-r part of the symbol integral is not summable for " + profile.id());
    }
    auto f = [&](double t) { return std::exp(log_one_minus_j0(t) - log_m_s(t)); };
    const auto est = quadrature::integrate(f, t0 - (k + 1) * ln2, t0 - k * ln2, 0.0, kPanelTol);
    if (!std::isfinite(est.value)) {
      throw Error(errc::quadrature_non_convergent, "non-finite small-r shell for " + profile.id());
    }
    if (head.add(est.value)) break;
  }

  // [s0, inf): int 1 / m(s/kappa) d(log s) on panels of doubling length.
  GeometricTailSum flat(1e-15, 1000);
  for (int k = 0;; ++k) {
    const double a = t0 + std::ldexp(1.0, k) - 1.0;
    const double b = t0 + std::ldexp(1.0, k + 1) - 1.0;
    if (flat.exhausted() || !std::isfinite(b)) {
      throw Error(errc::quadrature_non_convergent,
                  "large-r tail of the symbol integral is not summable for " + profile.id());
    }
    auto f = [&](double t) { return std::exp(-log_m_s(t)); };
    const auto est = quadrature::integrate(f, a, b, 0.0, kPanelTol);
    if (!std::isfinite(est.value)) {
      throw Error(errc::quadrature_non_convergent, "non-finite large-r panel for " + profile.id());
    }
    if (flat.add(est.value)) break;
  }

  // [s0, inf): int J0(s) / (s m(s/kappa)) ds between consecutive zeros of J0,
  // partial sums accelerated by repeated averaging.
  constexpr int kAveraging = 12;
  std::vector<double> partial;
  partial.reserve(256);
  double running = 0.0;
  double previous_estimate = std::numeric_limits<double>::quiet_NaN();
  double oscillatory = 0.0;
  const double scale = head.sum() + flat.sum();
  for (int i = 1;; ++i) {
    if (i > 20000) {
      throw Error(errc::quadrature_non_convergent,
                  "oscillatory part of the symbol integral did not settle for " + profile.id());
    }
    const double a = bessel::zero(i);
    const double b = bessel::zero(i + 1);
    auto f = [&](double s) { return bessel::j0(s) * std::exp(-log_m_s(std::log(s))) / s; };
    const auto est = quadrature::integrate(f, a, b, 1e-17 * scale, kPanelTol);
    running += est.value;
    partial.push_back(running);
    if (static_cast<int>(partial.size()) < kAveraging + 1) continue;
    std::vector<double> avg(partial.end() - kAveraging - 1, partial.end());
    for (int level = 0; level < kAveraging; ++level) {
      for (std::size_t j = 0; j + 1 < avg.size(); ++j) avg[j] = 0.5 * (avg[j] + avg[j + 1]);
      avg.pop_back();
    }
    const double estimate = avg.front();
    if (std::fabs(estimate - previous_estimate) < 1e-14 * scale) {
      oscillatory = estimate;
      break;
    }
    previous_estimate = estimate;
  }

  const double value = 2.0 * std::numbers::pi * (head.sum() + flat.sum() - oscillatory);
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(errc::quadrature_non_convergent,
                "symbol value is not positive at kappa=" + format_real(kappa));
  }
  return value;
}

}  // namespace kernel_detail

/// sigma(kappa) for every requested magnitude; sigma(0) = 0 exactly.
inline DissipationSymbol compute_symbol(const KernelProfile& profile,
                                        const std::vector<double>& kappas) {
  DissipationSymbol symbol;
  symbol.profile_id = profile.id();
  symbol.kappas = kappas;
  symbol.sigmas.reserve(kappas.size());
  for (double kappa : kappas) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
      throw Error(errc::evaluation_failure, "wavenumber magnitudes must be finite and >= 0");
    }
    symbol.sigmas.push_back(kernel_detail::sigma(profile, kappa));
  }
  return symbol;
}

/// Symbol of c_alpha^{-1} Lambda^{2 alpha}: the power-law kernel |y|^{-2-2alpha}
/// has multiplier pi Gamma(1-alpha) / (alpha 4^alpha Gamma(1+alpha)) kappa^{2 alpha},
/// which coincides with compute_symbol(PowerLaw{alpha}) at kappa = 1.
inline double closed_form_fractional_symbol(double alpha, double kappa) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(errc::alpha_out_of_range, "alpha must lie in (0, 1)");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw Error(errc::evaluation_failure, "kappa must be finite and >= 0");
  }
  if (kappa == 0.0) return 0.0;
  const double constant = std::numbers::pi * std::tgamma(1.0 - alpha) /
                          (alpha * std::pow(4.0, alpha) * std::tgamma(1.0 + alpha));
  return constant * std::pow(kappa, 2.0 * alpha);
}

inline double DissipationSymbol::at(double kappa) const {
  const auto it = std::find_if(kappas.begin(), kappas.end(), [kappa](double k) {
    return std::fabs(k - kappa) <= 1e-12 * std::max(1.0, kappa);
  });
  if (it == kappas.end()) {
    throw Error(errc::symbol_grid_mismatch,
                "kappa=" + kernel_detail::format_real(kappa) + " is not tabulated in the symbol");
  }
  return sigmas[static_cast<std::size_t>(it - kappas.begin())];
}

}  // namespace gmhd
