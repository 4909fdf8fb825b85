#ifndef FMCW_ESTIMATE_HPP
#define FMCW_ESTIMATE_HPP

#include <stdexcept>
#include <string>

namespace fmcw {

enum class Method {
  Periodogram,
  Lorentzian,
  Tsuchida,
  MatchedFilter,
  MatchedFilterJoint,
  Iff,
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct Estimate {
  double tau_hat = 0.0;  // s, in (0, 2T]
  double f_hat = 0.0;    // Hz, in (-fs/2, fs/2]
  double d_hat = 0.0;    // m
  double v_hat = 0.0;    // m/s
  double objective = 0.0;
  Method method = Method::Iff;
  bool converged = true;
  int starts_tried = 0;
};

/// Raised when an estimator is asked to process a waveform it does not
/// support (e.g. the sinusoidal-only average-frequency method on a
/// triangular waveform).
struct UnsupportedCombination : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a required calibration artifact (the additive-noise
/// variance table) has not been generated yet.
struct MissingCalibration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised on degenerate numeric input (all-zero segments, zero-variance
/// auxiliary channel, ...).
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fmcw

#endif
