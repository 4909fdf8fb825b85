#include "fmcw/matched_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fmcw {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// exp(-j 2 pi x) for x in cycles.
cplx cis_neg(double cycles) {
  double ph = -kTwoPi * cycles;
  return {std::cos(ph), std::sin(ph)};
}

int upsample_factor(const Waveform& w, double fs) {
  return std::max(1, static_cast<int>(std::ceil(w.bandwidth() / fs)));
}

bool window_is_periodic(const Waveform& w, double fs, std::size_t n) {
  double periods = static_cast<double>(n) / fs / (2.0 * w.chirp_duration());
  return std::abs(periods - std::round(periods)) < 1e-9 && periods >= 1.0 - 1e-9;
}

// |corr(m)|^2 for tau = m/(M fs), m = 0..MN-1, where
// corr(m) = sum_n s_n exp(j 2 pi Psi0(t_n - tau)). s must already be
// demodulated by exp(-j 2 pi [Psi0(t_n) + f t_n]).
std::vector<double> delay_spectrum(std::span<const cplx> s, const Waveform& w,
                                   double fs, int m_up) {
  const std::size_t n = s.size();
  const std::size_t fine = n * static_cast<std::size_t>(m_up);
  const double fine_dt = 1.0 / (static_cast<double>(m_up) * fs);
  std::vector<double> out(fine);

  if (window_is_periodic(w, fs, n)) {
    // Circular correlation via FFT; exact because the template
    // exp(j 2 pi Psi0) is periodic on the observation window.
    std::vector<cplx> zero_ins(fine, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) zero_ins[i * m_up] = s[i];
    std::vector<cplx> h(fine);
    for (std::size_t k = 0; k < fine; ++k) {
      std::size_t neg = (fine - k) % fine;
      double psi = w.phase_integral(static_cast<double>(neg) * fine_dt);
      h[k] = cplx(std::cos(kTwoPi * psi), std::sin(kTwoPi * psi));
    }
    std::vector<cplx> a = fft_forward(zero_ins);
    std::vector<cplx> b = fft_forward(h);
    for (std::size_t k = 0; k < fine; ++k) a[k] *= b[k];
    std::vector<cplx> corr = fft_inverse(a);
    for (std::size_t k = 0; k < fine; ++k) out[k] = std::norm(corr[k]);
    return out;
  }

  // Direct evaluation for windows that do not cover whole periods.
  for (std::size_t m = 0; m < fine; ++m) {
    double tau = static_cast<double>(m) * fine_dt;
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      double psi = w.phase_integral(static_cast<double>(i) / fs - tau);
      acc += s[i] * cplx(std::cos(kTwoPi * psi), std::sin(kTwoPi * psi));
    }
    out[m] = std::norm(acc);
  }
  return out;
}

double wrap_tau(double tau, double period) {
  double r = std::fmod(tau, period);
  if (r <= 0.0) r += period;
  return r;
}

}  // namespace

double mf_objective(std::span<const cplx> u, const Waveform& w, double fs,
                    double tau, double f) {
  cplx acc{0.0, 0.0};
  for (std::size_t n = 0; n < u.size(); ++n) {
    double t = static_cast<double>(n) / fs;
    double cycles = w.phase_integral(t) - w.phase_integral(t - tau) + f * t;
    acc += u[n] * cis_neg(cycles);
  }
  return std::norm(acc);
}

Estimate mf_distance(const Measurement& m, const Waveform& w) {
  const double fs = m.config.fs;
  const std::size_t n = m.u.size();
  const int up = upsample_factor(w, fs);
  const double fine_dt = 1.0 / (up * fs);

  std::vector<cplx> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = m.u[i] * cis_neg(w.phase_integral(static_cast<double>(i) / fs));
  }
  std::vector<double> grid = delay_spectrum(s, w, fs, up);
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] > grid[best]) best = i;
  }

  double tau0 = static_cast<double>(best) * fine_dt;
  auto obj = [&](double tau) { return mf_objective(m.u, w, fs, tau, 0.0); };
  OptimResult r = maximize_scalar_bounded(obj, tau0 - fine_dt, tau0 + fine_dt,
                                          tau0, 1e-14, 200);

  Estimate e;
  e.method = Method::MatchedFilter;
  e.tau_hat = wrap_tau(r.point[0], 2.0 * w.chirp_duration());
  e.f_hat = 0.0;
  e.objective = r.value;
  e.converged = r.converged;
  e.d_hat = 0.5 * e.tau_hat * AcquisitionConfig::kSpeedOfLight;
  e.v_hat = 0.0;
  return e;
}

Estimate mf_joint(const Measurement& m, const Waveform& w) {
  const double fs = m.config.fs;
  const std::size_t n = m.u.size();
  const int up = upsample_factor(w, fs);
  const double fine_dt = 1.0 / (up * fs);
  const double df = 1.0 / (2.0 * w.chirp_duration());

  if (static_cast<double>(up) * static_cast<double>(n) * static_cast<double>(n) > 2e9) {
    throw std::length_error(
        "mf_joint: grid exceeds evaluation cap; use distance-only matched filtering");
  }

  std::vector<cplx> s(n), rot(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / fs;
    s[i] = m.u[i] * cis_neg(w.phase_integral(t));
    rot[i] = cis_neg(df * t);
  }

  double best_val = -1.0;
  std::size_t best_m = 0, best_l = 0;
  for (std::size_t l = 0; l < n; ++l) {
    if (l > 0) {
      for (std::size_t i = 0; i < n; ++i) s[i] *= rot[i];
    }
    std::vector<double> grid = delay_spectrum(s, w, fs, up);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] > best_val) { best_val = grid[i]; best_m = i; best_l = l; }
    }
  }

  const double tau0 = static_cast<double>(best_m) * fine_dt;
  const double f0 = static_cast<double>(best_l) * df;
  auto obj = [&](std::span<const double> x) {
    return mf_objective(m.u, w, fs, x[0] * fine_dt, x[1] * df);
  };
  // Refinement in grid units, boxed by the adjacent grid points.
  std::vector<double> x0 = {static_cast<double>(best_m), static_cast<double>(best_l)};
  std::vector<double> lo = {x0[0] - 1.0, x0[1] - 1.0};
  std::vector<double> hi = {x0[0] + 1.0, x0[1] + 1.0};
  OptimResult r = maximize_simplex(obj, x0, lo, hi, 1e-12, 500);

  Estimate e;
  e.method = Method::MatchedFilterJoint;
  e.tau_hat = wrap_tau(r.point[0] * fine_dt, 2.0 * w.chirp_duration());
  e.f_hat = centered_modulo(r.point[1] * df, fs);
  e.objective = r.value;
  e.converged = r.converged;
  e.d_hat = 0.5 * e.tau_hat * AcquisitionConfig::kSpeedOfLight;
  e.v_hat = e.f_hat * AcquisitionConfig::kSpeedOfLight / (2.0 * w.center_frequency());
  (void)tau0; (void)f0;
  return e;
}

}  // namespace fmcw
