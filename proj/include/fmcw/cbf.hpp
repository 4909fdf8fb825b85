#ifndef FMCW_CBF_HPP
#define FMCW_CBF_HPP

#include <span>
#include <utility>

#include "fmcw/estimate.hpp"
#include "fmcw/numerics.hpp"
#include "fmcw/signal_model.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

/// Wrapped beat-frequency pair, both in (-fs/2, fs/2].
struct BeatFrequencies {
  double fb1 = 0.0;
  double fb2 = 0.0;
};

enum class FreqEstimator { Periodogram, Lorentzian };

/// Frequency in (-fs/2, fs/2] maximizing |sum exp(-j 2 pi f t_n) u_n|^2:
/// DFT-bin argmax followed by bounded scalar refinement within one bin.
double max_periodogram(std::span<const cplx> segment, double fs);

/// Center frequency of a three-parameter Lorentzian fit to the
/// periodogram, initialized at the max_periodogram output. Falls back to
/// the periodogram value on divergence (flag reported via fell_back).
double lorentzian_fit(std::span<const cplx> segment, double fs,
                      bool* fell_back = nullptr);

/// Four-case torus remapping of wrapped beat frequencies followed by the
/// linear (tau, f) recovery. Total on the wrapped CBF square.
std::pair<double, double> cbf_to_params_complex(const BeatFrequencies& bf,
                                                double bandwidth, double chirp,
                                                double fs);

/// Real-signal recovery from nonnegative beat-frequency magnitudes.
std::pair<double, double> cbf_to_params_real(double fb1, double fb2,
                                             double bandwidth, double chirp);

/// Constant-beat-frequency estimation for triangular modulation: beat
/// frequencies from the two half-period segments of each period, mapped to
/// (tau, f) and averaged across periods.
Estimate estimate_cbf(const Measurement& m, const Waveform& w,
                      FreqEstimator estimator);

/// Average-instantaneous-frequency estimation for sinusoidal modulation:
/// Doppler from the mean extracted IF, delay from the mean absolute
/// detrended unwrapped phase.
Estimate tsuchida_estimate(const Measurement& m, const Waveform& w);

}  // namespace fmcw

#endif
