#pragma once

#include <stdexcept>
#include <string>

namespace gmhd {

enum class errc {
  non_positive_radius,
  tabulated_out_of_range,
  evaluation_failure,
  quadrature_non_convergent,
  bessel_eval_failure,
  alpha_out_of_range,
  non_zero_mean,
  symbol_grid_mismatch,
  cfl_violation,
  insufficient_samples,
  odd_p,
  too_many_points,
  invalid_config,
  rejected_odd_n,
  corrupt_snapshot,
  io_failure,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::non_positive_radius: return "NonPositiveRadius";
    case errc::tabulated_out_of_range: return "TabulatedOutOfRange";
    case errc::evaluation_failure: return "EvaluationFailure";
    case errc::quadrature_non_convergent: return "QuadratureNonConvergent";
    case errc::bessel_eval_failure: return "BesselEvalFailure";
    case errc::alpha_out_of_range: return "AlphaOutOfRange";
    case errc::non_zero_mean: return "NonZeroMean";
    case errc::symbol_grid_mismatch: return "SymbolGridMismatch";
    case errc::cfl_violation: return "CflViolation";
    case errc::insufficient_samples: return "InsufficientSamples";
    case errc::odd_p: return "OddP";
    case errc::too_many_points: return "TooManyPoints";
    case errc::invalid_config: return "InvalidConfig";
    case errc::rejected_odd_n: return "RejectedOddN";
    case errc::corrupt_snapshot: return "CorruptSnapshot";
    case errc::io_failure: return "IoFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace gmhd
