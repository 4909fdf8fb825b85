#include "fmcw/bounds.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmcw {

namespace {

constexpr double kC = AcquisitionConfig::kSpeedOfLight;

struct BandModel {
  std::size_t n1 = 0;   // covariance dimension, N - 1
  double diag = 0.0;    // phase-noise floor plus additive variance p
  double q = 0.0;       // lag-1 additive coupling
  long m = 0;           // lower delay band index floor(tau * fs)
  double v_m = 0.0;     // band value at lag m
  double v_m1 = 0.0;    // band value at lag m + 1
};

BandModel band_model(const AcquisitionConfig& cfg, double distance_m) {
  if (cfg.num_samples < 3) throw std::invalid_argument("bounds: need at least 3 samples");
  const double fs = cfg.fs;
  const double L = cfg.linewidth;
  const double tau = 2.0 * distance_m / kC;

  BandModel b;
  b.n1 = static_cast<std::size_t>(cfg.num_samples - 1);
  const double snr = snr_eta(cfg, distance_m);
  const double p = 1.0 / (4.0 * M_PI * M_PI * snr);
  b.diag = L / (M_PI * fs) + p;
  b.q = adjacent_noise_correlation(snr) * p;
  b.m = static_cast<long>(std::floor(tau * fs));
  b.v_m = (L / (2.0 * M_PI)) * (tau - static_cast<double>(b.m + 1) / fs);
  b.v_m1 = (L / (2.0 * M_PI)) * (static_cast<double>(b.m) / fs - tau);
  return b;
}

// Lagged self-product sum_i x_i x_{i+k}.
double lag_dot(const std::vector<double>& x, long k) {
  if (k < 0) k = -k;
  if (static_cast<std::size_t>(k) >= x.size()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(k) < x.size(); ++i) {
    acc += x[i] * x[i + static_cast<std::size_t>(k)];
  }
  return acc;
}

// J' Sigma J for the banded covariance without materializing Sigma.
double quad_form(const BandModel& b, const std::vector<double>& j) {
  double val = b.diag * lag_dot(j, 0) + 2.0 * b.q * lag_dot(j, 1);
  for (auto [lag, v] : {std::pair<long, double>{b.m, b.v_m}, {b.m + 1, b.v_m1}}) {
    if (lag == 0) {
      val += v * lag_dot(j, 0);
    } else {
      val += 2.0 * v * lag_dot(j, lag);
    }
  }
  return val;
}

Eigen::MatrixXd dense_covariance(const BandModel& b) {
  const auto n = static_cast<Eigen::Index>(b.n1);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s.diagonal().setConstant(b.diag);
  if (n > 1) {
    s.diagonal(1).setConstant(b.q);
    s.diagonal(-1).setConstant(b.q);
  }
  for (auto [lag, v] : {std::pair<long, double>{b.m, b.v_m}, {b.m + 1, b.v_m1}}) {
    if (lag >= n) continue;
    if (lag == 0) {
      s.diagonal().array() += v;
    } else {
      s.diagonal(lag).array() += v;
      s.diagonal(-lag).array() += v;
    }
  }
  return s;
}

double average_distance_limit(const Waveform& w) { return kC * w.chirp_duration(); }

}  // namespace

double adjacent_noise_correlation(double snr_linear) {
  if (!(snr_linear > 0.0)) return 0.0;
  const double db = 10.0 * std::log10(snr_linear);
  if (db >= 10.0) return -0.5;
  if (db <= -10.0) return 0.0;
  return -0.5 * (db + 10.0) / 20.0;
}

std::vector<double> covariance_matrix(const Waveform& w, const AcquisitionConfig& cfg,
                                      double distance_m, std::size_t* dim) {
  (void)w;
  BandModel b = band_model(cfg, distance_m);
  Eigen::MatrixXd s = dense_covariance(b);
  if (dim) *dim = b.n1;
  std::vector<double> out(b.n1 * b.n1);
  for (std::size_t i = 0; i < b.n1; ++i) {
    for (std::size_t k = 0; k < b.n1; ++k) {
      out[i * b.n1 + k] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

std::vector<double> if_jacobian(const Waveform& w, const AcquisitionConfig& cfg,
                                double distance_m) {
  const double fs = cfg.fs;
  const double tau = 2.0 * distance_m / kC;
  std::vector<double> j(static_cast<std::size_t>(cfg.num_samples - 1));
  for (std::size_t n = 0; n < j.size(); ++n) {
    double t_mid = (static_cast<double>(n) + 0.5) / fs;
    j[n] = (2.0 / (kC * fs)) * w.slope(t_mid - tau);
  }
  return j;
}

double crb_distance(const Waveform& w, const AcquisitionConfig& cfg, double distance_m) {
  BandModel b = band_model(cfg, distance_m);
  std::vector<double> jv = if_jacobian(w, cfg, distance_m);
  const auto n = static_cast<Eigen::Index>(b.n1);
  Eigen::Map<const Eigen::VectorXd> j(jv.data(), n);

  Eigen::MatrixXd sigma = dense_covariance(b);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("crb_distance: covariance not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  double fisher = j.dot(inv * j);

  // d(Sigma)/dd carries only the delay bands, with slope +-(L/2pi)(2/c).
  const double dv = (cfg.linewidth / (2.0 * M_PI)) * (2.0 / kC);
  Eigen::MatrixXd dsig = Eigen::MatrixXd::Zero(n, n);
  for (auto [lag, v] : {std::pair<long, double>{b.m, dv}, {b.m + 1, -dv}}) {
    if (lag >= n) continue;
    if (lag == 0) {
      dsig.diagonal().array() += v;
    } else {
      dsig.diagonal(lag).array() += v;
      dsig.diagonal(-lag).array() += v;
    }
  }
  Eigen::MatrixXd c = dsig * inv;
  fisher += 0.5 * (c * c).trace();
  return 1.0 / fisher;
}

double mcrb_distance(const Waveform& w, const AcquisitionConfig& cfg, double distance_m) {
  BandModel b = band_model(cfg, distance_m);
  std::vector<double> j = if_jacobian(w, cfg, distance_m);
  double jj = lag_dot(j, 0);
  if (!(jj > 0.0)) throw std::runtime_error("mcrb_distance: zero sensitivity");
  return quad_form(b, j) / (jj * jj);
}

double mmcrb(const Waveform& w, const AcquisitionConfig& cfg) {
  const double dmax = average_distance_limit(w);
  double prev = 0.0;
  for (long nq = 512; nq <= 8192; nq *= 2) {
    double acc = 0.0;
    for (long i = 0; i < nq; ++i) {
      double d = (static_cast<double>(i) + 0.5) * dmax / static_cast<double>(nq);
      acc += mcrb_distance(w, cfg, d);
    }
    double val = acc / static_cast<double>(nq);
    if (nq > 512 && std::abs(val - prev) < 5e-3 * std::abs(prev)) return val;
    prev = val;
  }
  return prev;
}

double mmcrb_approx(const Waveform& w, const AcquisitionConfig& cfg) {
  const double fs = cfg.fs;
  const double L = cfg.linewidth;
  const double dmax = average_distance_limit(w);
  const double tau_max = 2.0 * w.chirp_duration();
  const std::size_t n1 = static_cast<std::size_t>(cfg.num_samples - 1);

  std::vector<double> j = if_jacobian(w, cfg, 0.0);
  const double jj = lag_dot(j, 0);

  // Distance integral of the additive variance p(d), trapezoid rule.
  const long nq = 4000;
  double p_int = 0.0;
  double prev_d = 1e-3, prev_p = 1.0 / (4.0 * M_PI * M_PI * snr_eta(cfg, prev_d));
  for (long i = 1; i <= nq; ++i) {
    double d = 1e-3 + (dmax - 1e-3) * static_cast<double>(i) / static_cast<double>(nq);
    double p = 1.0 / (4.0 * M_PI * M_PI * snr_eta(cfg, d));
    p_int += 0.5 * (p + prev_p) * (d - prev_d);
    prev_d = d;
    prev_p = p;
  }
  const double q_int = -0.5 * p_int;

  // Band-integrated covariance: the two delay bands contribute
  // -c L / (8 pi fs^2) per delay cell they occupy.
  std::vector<double> band(n1, 0.0);
  band[0] = dmax * L / (M_PI * fs) + p_int;
  if (n1 > 1) band[1] = q_int;
  for (std::size_t k = 0; k < n1; ++k) {
    // lower band: tau in [k/fs, (k+1)/fs], integrand (L/2pi)(tau - (k+1)/fs)
    double lo = static_cast<double>(k) / fs;
    double hi = std::min(static_cast<double>(k + 1) / fs, tau_max);
    double i3 = 0.0;
    if (hi > lo) {
      double a = hi - static_cast<double>(k + 1) / fs;
      double b2 = lo - static_cast<double>(k + 1) / fs;
      i3 = 0.5 * (a * a - b2 * b2);
    }
    // upper band: tau in [(k-1)/fs, k/fs], integrand (L/2pi)((k-1)/fs - tau)
    double i4 = 0.0;
    if (k >= 1) {
      double lo4 = std::max(static_cast<double>(k - 1) / fs, 0.0);
      double hi4 = std::min(static_cast<double>(k) / fs, tau_max);
      if (hi4 > lo4) {
        double a = hi4 - static_cast<double>(k - 1) / fs;
        double b2 = lo4 - static_cast<double>(k - 1) / fs;
        i4 = -0.5 * (a * a - b2 * b2);
      }
    }
    band[k] += (kC / 2.0) * (L / (2.0 * M_PI)) * (i3 + i4);
  }

  double val = band[0] * lag_dot(j, 0);
  for (std::size_t k = 1; k < n1; ++k) {
    if (band[k] != 0.0) val += 2.0 * band[k] * lag_dot(j, static_cast<long>(k));
  }
  return (1.0 / dmax) * val / (jj * jj);
}

std::pair<double, double> crb_awgn_cbf(long n_half, double fs, double gamma_slope,
                                       double alpha, double sigma2) {
  if (n_half < 2) throw std::invalid_argument("crb_awgn_cbf: need at least 2 samples per segment");
  const double two_pi = 2.0 * M_PI;

  // Fisher information of (tau, f, phase); the amplitude block is
  // orthogonal and drops out.
  double st2 = 0.0, st2s = 0.0, sts = 0.0, st = 0.0;
  const long total = 2 * n_half;
  for (long n = 0; n < total; ++n) {
    double t = static_cast<double>(n) / fs;
    double sgn = (n < n_half) ? 1.0 : -1.0;
    st2 += t * t;
    st2s += sgn * t * t;
    st += t;
    sts += sgn * t;
  }
  const double a2s = alpha * alpha / sigma2;
  Eigen::Matrix3d fim;
  fim << a2s * two_pi * two_pi * gamma_slope * gamma_slope * st2,
         a2s * two_pi * two_pi * gamma_slope * st2s,
         a2s * two_pi * gamma_slope * sts,
         a2s * two_pi * two_pi * gamma_slope * st2s,
         a2s * two_pi * two_pi * st2,
         a2s * two_pi * st,
         a2s * two_pi * gamma_slope * sts,
         a2s * two_pi * st,
         a2s * static_cast<double>(total);
  Eigen::Matrix3d inv = fim.inverse();
  return {inv(0, 0), inv(1, 1)};
}

double awgn_cbf_var_tau(long n_half, double fs, double gamma_slope, double alpha,
                        double sigma2) {
  const double N = static_cast<double>(n_half);
  return sigma2 * 3.0 * fs * fs * (2.0 * N + 1.0) /
         (4.0 * N * gamma_slope * gamma_slope * M_PI * M_PI * alpha * alpha *
          (N - 1.0) * (N + 1.0) * (4.0 * N - 1.0));
}

double awgn_cbf_var_f(long n_half, double fs, double alpha, double sigma2) {
  const double N = static_cast<double>(n_half);
  return sigma2 * 3.0 * fs * fs * (13.0 * N * N - 12.0 * N + 2.0) /
         (4.0 * N * M_PI * M_PI * alpha * alpha * (N - 1.0) * (N + 1.0) *
          (2.0 * N - 1.0) * (4.0 * N - 1.0));
}

}  // namespace fmcw
