#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace gmhd::quadrature {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Estimate kronrod15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half), true};
}

template <class F>
Estimate adaptive(F& f, double a, double b, double abs_tol, int depth) {
  Estimate whole = kronrod15(f, a, b);
  // Below ~50 ulp of the panel value the estimate is roundoff, not truncation.
  const double noise = 50.0 * std::numeric_limits<double>::epsilon() * std::fabs(whole.value);
  if (whole.error <= std::max(abs_tol, noise) || depth == 0 || !std::isfinite(whole.value)) {
    whole.converged = whole.error <= std::max(abs_tol, noise) && std::isfinite(whole.value);
    return whole;
  }
  const double mid = 0.5 * (a + b);
  Estimate left = adaptive(f, a, mid, 0.5 * abs_tol, depth - 1);
  Estimate right = adaptive(f, mid, b, 0.5 * abs_tol, depth - 1);
  return {left.value + right.value, left.error + right.error, left.converged && right.converged};
}

}  // namespace detail

/// Adaptive bisection with the G7/K15 pair. The tolerance is
/// max(abs_tol, rel_tol * |first estimate|).
template <class F>
Estimate integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                   int max_depth = 24) {
  const Estimate first = detail::kronrod15(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::fabs(first.value));
  if (first.error <= tol) return first;
  return detail::adaptive(f, a, b, tol, max_depth);
}

}  // namespace gmhd::quadrature
