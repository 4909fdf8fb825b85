#include "fmcw/cbf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace fmcw {

std::string to_string(Method m) {
  switch (m) {
    case Method::Periodogram: return "periodogram";
    case Method::Lorentzian: return "lorentzian";
    case Method::Tsuchida: return "tsuchida";
    case Method::MatchedFilter: return "mf";
    case Method::MatchedFilterJoint: return "mf-joint";
    case Method::Iff: return "iff";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "periodogram") return Method::Periodogram;
  if (s == "lorentzian") return Method::Lorentzian;
  if (s == "tsuchida") return Method::Tsuchida;
  if (s == "mf") return Method::MatchedFilter;
  if (s == "mf-joint") return Method::MatchedFilterJoint;
  if (s == "iff") return Method::Iff;
  throw std::invalid_argument("unknown method: " + s);
}

namespace {

double periodogram_power(std::span<const cplx> seg, double fs, double f) {
  cplx acc{0.0, 0.0};
  const double w = -2.0 * M_PI * f / fs;
  for (std::size_t n = 0; n < seg.size(); ++n) {
    double ph = w * static_cast<double>(n);
    acc += seg[n] * cplx(std::cos(ph), std::sin(ph));
  }
  return std::norm(acc);
}

}  // namespace

double max_periodogram(std::span<const cplx> segment, double fs) {
  if (segment.size() < 4) throw std::invalid_argument("max_periodogram: segment too short");
  bool all_zero = true;
  for (const cplx& v : segment) {
    if (v != cplx{0.0, 0.0}) { all_zero = false; break; }
  }
  if (all_zero) throw DegenerateInput("max_periodogram: all-zero segment");

  std::vector<cplx> spec = fft_forward(segment);
  const std::size_t n = spec.size();
  std::size_t kmax = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    double p = std::norm(spec[k]);
    if (p > best) { best = p; kmax = k; }
  }
  double f0 = static_cast<double>(kmax) / static_cast<double>(n) * fs;
  if (f0 > 0.5 * fs) f0 -= fs;

  const double bin = fs / static_cast<double>(n);
  auto obj = [&](double f) { return periodogram_power(segment, fs, f); };
  OptimResult r = maximize_scalar_bounded(obj, f0 - bin, f0 + bin, f0, 1e-12, 200);
  return centered_modulo(r.point[0], fs);
}

double lorentzian_fit(std::span<const cplx> segment, double fs, bool* fell_back) {
  if (segment.size() < 16) throw std::invalid_argument("lorentzian_fit: segment too short");
  if (fell_back) *fell_back = false;

  const double f_init = max_periodogram(segment, fs);
  std::vector<cplx> spec = fft_forward(segment);
  const std::size_t n = spec.size();
  const double bin = fs / static_cast<double>(n);

  // Fit over +-10 bins of log power around the peak (cyclic indexing,
  // frequency axis unwrapped around the peak).
  long kpeak = std::lround(f_init / bin);
  constexpr long kHalfWindow = 10;
  std::vector<double> freqs, logp;
  double pmax = 0.0;
  for (long dk = -kHalfWindow; dk <= kHalfWindow; ++dk) {
    long k = ((kpeak + dk) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
    pmax = std::max(pmax, std::norm(spec[static_cast<std::size_t>(k)]));
  }
  const double floor_p = pmax * 1e-12;
  for (long dk = -kHalfWindow; dk <= kHalfWindow; ++dk) {
    long k = ((kpeak + dk) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
    freqs.push_back(static_cast<double>(kpeak + dk) * bin);
    logp.push_back(std::log(std::max(std::norm(spec[static_cast<std::size_t>(k)]), floor_p)));
  }

  // Parameters: (f0, log gamma, log amplitude); model
  // log A - log(1 + ((f - f0)/gamma)^2), maximized as -SSE.
  auto objective = [&](std::span<const double> th) {
    ValueGrad out;
    out.grad.assign(3, 0.0);
    const double f0 = th[0], g = std::exp(th[1]), la = th[2];
    double sse = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      double s = (freqs[i] - f0) / g;
      double denom = 1.0 + s * s;
      double model = la - std::log(denom);
      double r = logp[i] - model;
      sse += r * r;
      out.grad[0] += 2.0 * r * (2.0 * s / (g * denom));
      out.grad[1] += 2.0 * r * (2.0 * s * s / denom);
      out.grad[2] += 2.0 * r;
    }
    out.value = -sse;
    return out;
  };

  // f0 scaled by the bin width for conditioning.
  auto scaled = [&](std::span<const double> x) {
    double th[3] = {x[0] * bin, x[1], x[2]};
    ValueGrad vg = objective(std::span<const double>(th, 3));
    vg.grad[0] *= bin;
    return vg;
  };
  std::vector<double> x0 = {f_init / bin, std::log(2.0 * bin), std::log(pmax)};
  OptimResult r = maximize_quasi_newton(scaled, x0, 1e-10, 500);
  double f_fit = r.point[0] * bin;
  if (!std::isfinite(f_fit) || std::abs(f_fit - f_init) > kHalfWindow * bin) {
    if (fell_back) *fell_back = true;
    return f_init;
  }
  return centered_modulo(f_fit, fs);
}

std::pair<double, double> cbf_to_params_complex(const BeatFrequencies& bf,
                                                double bandwidth, double chirp,
                                                double fs) {
  double g1 = bf.fb1, g2 = bf.fb2;
  const double sum = g1 + g2;
  if (sum > 0.5 * fs) {
    g2 -= fs;
  } else if (sum < -0.5 * fs) {
    g1 += fs;
  } else if (g1 <= g2) {
    g1 += fs;
    g2 -= fs;
  }
  double tau = 0.5 * (chirp / bandwidth) * (g1 - g2);
  double f = 0.5 * (g1 + g2);
  return {tau, f};
}

std::pair<double, double> cbf_to_params_real(double fb1, double fb2,
                                             double bandwidth, double chirp) {
  if (fb1 < 0.0 || fb2 < 0.0) {
    throw std::invalid_argument("cbf_to_params_real: magnitudes must be nonnegative");
  }
  return {0.5 * (chirp / bandwidth) * (fb1 + fb2), 0.5 * (fb1 - fb2)};
}

Estimate estimate_cbf(const Measurement& m, const Waveform& w,
                      FreqEstimator estimator) {
  if (w.kind() != WaveKind::Triangular) {
    throw UnsupportedCombination("estimate_cbf requires triangular modulation");
  }
  const double fs = m.config.fs;
  const double T = w.chirp_duration();
  const long half = std::lround(T * fs);
  const long periods = static_cast<long>(m.u.size()) / (2 * half);
  if (periods < 1) throw std::invalid_argument("estimate_cbf: observation shorter than one period");

  auto freq_of = [&](std::span<const cplx> seg) {
    return estimator == FreqEstimator::Periodogram ? max_periodogram(seg, fs)
                                                   : lorentzian_fit(seg, fs);
  };

  double tau_acc = 0.0, f_acc = 0.0;
  for (long p = 0; p < periods; ++p) {
    std::span<const cplx> s1(m.u.data() + 2 * p * half, static_cast<std::size_t>(half));
    std::span<const cplx> s2(m.u.data() + (2 * p + 1) * half, static_cast<std::size_t>(half));
    BeatFrequencies bf{freq_of(s1), freq_of(s2)};
    auto [tau, f] = cbf_to_params_complex(bf, w.bandwidth(), T, fs);
    tau_acc += tau;
    f_acc += f;
  }
  Estimate e;
  e.method = estimator == FreqEstimator::Periodogram ? Method::Periodogram : Method::Lorentzian;
  e.tau_hat = tau_acc / static_cast<double>(periods);
  e.f_hat = f_acc / static_cast<double>(periods);
  e.d_hat = 0.5 * e.tau_hat * AcquisitionConfig::kSpeedOfLight;
  e.v_hat = e.f_hat * AcquisitionConfig::kSpeedOfLight / (2.0 * w.center_frequency());
  return e;
}

Estimate tsuchida_estimate(const Measurement& m, const Waveform& w) {
  if (w.kind() != WaveKind::Sinusoidal) {
    throw UnsupportedCombination("tsuchida_estimate requires sinusoidal modulation");
  }
  const double fs = m.config.fs;
  const std::size_t N = m.u.size();
  if (N < 2) throw std::invalid_argument("tsuchida_estimate: too few samples");

  // Doppler from the mean extracted IF.
  double zeta_sum = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    zeta_sum += std::arg(m.u[i + 1] * std::conj(m.u[i])) / (2.0 * M_PI);
  }
  const double f_hat = fs * zeta_sum / static_cast<double>(N - 1);

  // Delay from the mean absolute detrended unwrapped phase. A constant
  // phase offset carries no delay information, so the residual is
  // centered before taking absolute values.
  std::vector<double> phase(N);
  phase[0] = std::arg(m.u[0]);
  for (std::size_t i = 1; i < N; ++i) {
    double d = std::arg(m.u[i]) - std::arg(m.u[i - 1]);
    d -= 2.0 * M_PI * std::round(d / (2.0 * M_PI));
    phase[i] = phase[i - 1] + d;
  }
  double mean_resid = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    phase[i] -= 2.0 * M_PI * f_hat * (static_cast<double>(i) / fs);
    mean_resid += phase[i];
  }
  mean_resid /= static_cast<double>(N);
  double abs_acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) abs_acc += std::abs(phase[i] - mean_resid);
  abs_acc /= static_cast<double>(N);

  // Normalizer (pi/T) * integral over one period of the absolute
  // frequency deviation; closed form 2*B*T/pi for the sinusoid.
  const double T = w.chirp_duration();
  const double norm = (M_PI / T) * (2.0 * w.bandwidth() * T / M_PI);

  Estimate e;
  e.method = Method::Tsuchida;
  e.tau_hat = abs_acc / norm;
  e.f_hat = f_hat;
  e.d_hat = 0.5 * e.tau_hat * AcquisitionConfig::kSpeedOfLight;
  e.v_hat = e.f_hat * AcquisitionConfig::kSpeedOfLight / (2.0 * w.center_frequency());
  return e;
}

}  // namespace fmcw
