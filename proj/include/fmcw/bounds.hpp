#ifndef FMCW_BOUNDS_HPP
#define FMCW_BOUNDS_HPP

#include <utility>
#include <vector>

#include "fmcw/signal_model.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

/// Correlation coefficient between adjacent IF-noise samples induced by
/// the additive channel: -1/2 in the high-SNR regime (>= 10 dB), 0 below
/// -10 dB, linear in dB between.
double adjacent_noise_correlation(double snr_linear);

/// Banded covariance of the extracted IF sequence at distance d:
/// white additive part p on the diagonal with lag-1 coupling q = rho * p,
/// phase-noise floor L/(pi fs) on the diagonal, and two delay-dependent
/// phase-noise bands at lags floor(tau fs) and floor(tau fs)+1.
/// Overlapping contributions are summed. Row-major, size (N-1)^2.
std::vector<double> covariance_matrix(const Waveform& w, const AcquisitionConfig& cfg,
                                      double distance_m, std::size_t* dim = nullptr);

/// Sensitivity of the mean IF sequence to distance,
/// J_n = (2/(c fs)) da/dt evaluated at t'_n - tau.
std::vector<double> if_jacobian(const Waveform& w, const AcquisitionConfig& cfg,
                                double distance_m);

/// Cramer-Rao bound on distance (m^2) from the Gaussian IF model,
/// including the covariance-derivative trace term.
double crb_distance(const Waveform& w, const AcquisitionConfig& cfg, double distance_m);

/// Misspecified CRB on distance (m^2): (J' Sigma J) / (J' J)^2.
double mcrb_distance(const Waveform& w, const AcquisitionConfig& cfg, double distance_m);

/// Distance-averaged MCRB over d in (0, cT]: midpoint quadrature starting
/// at 512 nodes, doubled until the value changes by less than 0.5%.
double mmcrb(const Waveform& w, const AcquisitionConfig& cfg);

/// Closed-band approximation of the distance-averaged MCRB: the
/// covariance is integrated over the delay cell analytically, additive
/// terms numerically, with the Jacobian frozen at zero delay.
double mmcrb_approx(const Waveform& w, const AcquisitionConfig& cfg);

/// CRBs on (tau, f) for the two-segment constant-beat-frequency model in
/// additive white Gaussian noise: amplitude alpha, per-quadrature noise
/// variance sigma2, slope magnitude gamma_slope, N samples per segment.
/// Built by inverting the Fisher information of (tau, f, phase) with the
/// amplitude block decoupled.
std::pair<double, double> crb_awgn_cbf(long n_half, double fs, double gamma_slope,
                                       double alpha, double sigma2);

/// Closed forms for the same bounds.
double awgn_cbf_var_tau(long n_half, double fs, double gamma_slope, double alpha,
                        double sigma2);
double awgn_cbf_var_f(long n_half, double fs, double alpha, double sigma2);

}  // namespace fmcw

#endif
