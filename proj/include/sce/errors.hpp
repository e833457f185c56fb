#pragma once

#include <stdexcept>
#include <string>

namespace sce {

enum class errc {
  non_positive_scale_factor,
  non_positive_initial_frequency,
  gronwall_violation,
  scale_factor_vanishes,
  truncation_bound_too_large,
  normalization_violation,
  energy_below_heisenberg_bound,
  inconsistent_derivative,
  quadrature_not_converged,
  nonzero_initial_value,
  tail_not_converged,
  dyson_order_insufficient,
  negative_w_squared,
  constraint_unreachable,
  out_of_ball,
  frequency_not_positive,
  interval_underflow,
  max_iter_exceeded,
  state_not_regular,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_scale_factor: return "NonPositiveScaleFactor";
    case errc::non_positive_initial_frequency: return "NonPositiveInitialFrequency";
    case errc::gronwall_violation: return "GronwallViolation";
    case errc::scale_factor_vanishes: return "ScaleFactorVanishes";
    case errc::truncation_bound_too_large: return "TruncationBoundTooLarge";
    case errc::normalization_violation: return "NormalizationViolation";
    case errc::energy_below_heisenberg_bound: return "EnergyBelowHeisenbergBound";
    case errc::inconsistent_derivative: return "InconsistentDerivative";
    case errc::quadrature_not_converged: return "QuadratureNotConverged";
    case errc::nonzero_initial_value: return "NonzeroInitialValue";
    case errc::tail_not_converged: return "TailNotConverged";
    case errc::dyson_order_insufficient: return "DysonOrderInsufficient";
    case errc::negative_w_squared: return "NegativeWSquared";
    case errc::constraint_unreachable: return "ConstraintUnreachable";
    case errc::out_of_ball: return "OutOfBall";
    case errc::frequency_not_positive: return "FrequencyNotPositive";
    case errc::interval_underflow: return "IntervalUnderflow";
    case errc::max_iter_exceeded: return "MaxIterExceeded";
    case errc::state_not_regular: return "StateNotRegular";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace sce
