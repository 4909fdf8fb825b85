#ifndef FMCW_MATCHED_FILTER_HPP
#define FMCW_MATCHED_FILTER_HPP

#include <span>

#include "fmcw/estimate.hpp"
#include "fmcw/numerics.hpp"
#include "fmcw/signal_model.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

/// Squared-magnitude correlation |sum_n u_n exp(-j phi(t_n; tau, f))|^2
/// with phi(t; tau, f) = phi0(t) - phi0(t - tau) + 2 pi f t.
double mf_objective(std::span<const cplx> u, const Waveform& w, double fs,
                    double tau, double f);

/// Delay-only matched filtering (zero Doppler assumed): Fourier-domain
/// correlation over the upsampled delay grid tau = m/(M fs) with
/// M = ceil(B/fs), refined by bounded scalar search within one fine cell.
Estimate mf_distance(const Measurement& m, const Waveform& w);

/// Joint delay-Doppler matched filtering over the full
/// MN^2 grid (Doppler candidates l/(2T)), refined by simplex search boxed
/// by the adjacent grid points. Throws std::length_error if the grid
/// exceeds the evaluation cap.
Estimate mf_joint(const Measurement& m, const Waveform& w);

}  // namespace fmcw

#endif
