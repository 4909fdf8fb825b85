#ifndef FMCW_WAVEFORM_HPP
#define FMCW_WAVEFORM_HPP

#include <string>
#include <utility>
#include <vector>

namespace fmcw {

enum class WaveKind { Triangular, Sinusoidal, SmoothStair, Tabulated };

std::string to_string(WaveKind k);
WaveKind wave_kind_from_string(const std::string& s);

/// Frequency modulation waveform a(t). The waveform is 2T-periodic; B is
/// the sweep bandwidth, T the chirp duration, and f_c the optical center
/// frequency. Tabulated waveforms are defined by (t, a) samples covering
/// one full period [0, 2T].
class Waveform {
 public:
  static Waveform triangular(double bandwidth, double chirp_duration,
                             double center_frequency);
  static Waveform sinusoidal(double bandwidth, double chirp_duration,
                             double center_frequency);
  static Waveform smooth_stair(double bandwidth, double chirp_duration,
                               double center_frequency);
  /// Table rows are (t, a(t)) with strictly increasing t covering
  /// [0, 2T]; the step must be at most 1/(4B).
  static Waveform tabulated(std::vector<std::pair<double, double>> table,
                            double bandwidth, double chirp_duration,
                            double center_frequency);

  WaveKind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }
  double chirp_duration() const { return chirp_; }
  double center_frequency() const { return fc_; }

  /// a(t), reduced mod 2T.
  double eval(double t) const;

  /// a(t) minus its period average mean_freq(); zero-mean and 2T-periodic.
  double baseband(double t) const;

  /// Period average of a(t): f_c plus the mean frequency deviation.
  double mean_freq() const;

  /// Right-sided derivative da/dt.
  double slope(double t) const;

  /// Integral of baseband(s) from 0 to t; 2T-periodic by construction.
  /// Units: cycles (the 2*pi factor is applied by callers).
  double phase_integral(double t) const;

  /// Transmitted phase phi0(t) = 2*pi * integral of a from 0 to t, in
  /// radians. Dominated by mean_freq()*t for optical center frequencies;
  /// prefer phase_integral for precision-critical baseband work.
  double transmitted_phase(double t) const;

  /// Normalized wrapped instantaneous frequency
  /// (1/f_s) * Omega_{f_s}[a(t) - a(t - tau) + f], in (-1/2, 1/2].
  double wrapped_if(double tau, double f, double fs, double t) const;

 private:
  Waveform() = default;
  double baseband_raw(double t_reduced) const;  // a - f_c at t in [0, 2T)
  double integral_raw(double t_reduced) const;  // integral of (a - f_c)

  WaveKind kind_ = WaveKind::Triangular;
  double bandwidth_ = 0.0;
  double chirp_ = 0.0;
  double fc_ = 0.0;
  double mean_dev_ = 0.0;  // period average of a - f_c
  // tabulated support
  std::vector<double> tab_t_;
  std::vector<double> tab_a_;    // a - f_c
  std::vector<double> tab_int_;  // cumulative trapezoid of tab_a_
};

}  // namespace fmcw

#endif
