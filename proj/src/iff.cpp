#include "fmcw/iff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fmcw {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double complex_variance(std::span<const cplx> v) {
  cplx mean{0.0, 0.0};
  for (const cplx& x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (const cplx& x : v) acc += std::norm(x - mean);
  return acc / static_cast<double>(v.size());
}

// Pool-adjacent-violators projection onto non-increasing sequences.
void isotonic_nonincreasing(std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> level(n), weight(n);
  std::vector<std::size_t> count(n);
  std::size_t blocks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    level[blocks] = y[i];
    weight[blocks] = 1.0;
    count[blocks] = 1;
    ++blocks;
    while (blocks > 1 && level[blocks - 2] < level[blocks - 1]) {
      double w = weight[blocks - 2] + weight[blocks - 1];
      level[blocks - 2] =
          (level[blocks - 2] * weight[blocks - 2] + level[blocks - 1] * weight[blocks - 1]) / w;
      weight[blocks - 2] = w;
      count[blocks - 2] += count[blocks - 1];
      --blocks;
    }
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t k = 0; k < count[b]; ++k) y[pos++] = level[b];
  }
}

}  // namespace

IfSequence extract_if(std::span<const cplx> u, double fs) {
  if (u.size() < 2) throw std::invalid_argument("extract_if: need at least two samples");
  IfSequence z;
  z.zeta.resize(u.size() - 1);
  z.t_mid.resize(u.size() - 1);
  for (std::size_t n = 0; n + 1 < u.size(); ++n) {
    if (u[n] == cplx{0.0, 0.0} || u[n + 1] == cplx{0.0, 0.0}) {
      throw DegenerateInput("extract_if: zero-magnitude sample");
    }
    z.zeta[n] = std::arg(u[n + 1] * std::conj(u[n])) / kTwoPi;
    z.t_mid[n] = (static_cast<double>(n) + 0.5) / fs;
  }
  return z;
}

double estimate_snr(std::span<const cplx> u, std::span<const cplx> v_aux) {
  if (u.empty() || v_aux.empty()) throw std::invalid_argument("estimate_snr: empty input");
  double var_v = complex_variance(v_aux);
  if (!(var_v > 0.0)) throw DegenerateInput("estimate_snr: auxiliary channel has zero variance");
  double mean_pow = 0.0;
  for (const cplx& x : u) mean_pow += std::norm(x);
  mean_pow /= static_cast<double>(u.size());
  return (mean_pow - var_v) / var_v;
}

HTable::HTable(std::vector<double> snr_db, std::vector<double> variance,
               long samples_per_point, std::uint64_t seed)
    : snr_db_(std::move(snr_db)),
      var_(std::move(variance)),
      samples_(samples_per_point),
      seed_(seed) {
  if (snr_db_.size() != var_.size()) {
    throw std::invalid_argument("HTable: grid/value size mismatch");
  }
  if (!std::is_sorted(snr_db_.begin(), snr_db_.end())) {
    throw std::invalid_argument("HTable: SNR grid must be increasing");
  }
  isotonic_nonincreasing(var_);
}

double HTable::operator()(double snr_linear) const {
  if (std::isinf(snr_linear)) return 0.0;
  if (!(snr_linear > 0.0)) return 1.0 / 12.0;
  if (empty()) throw MissingCalibration("HTable: empty calibration table");
  const double db = 10.0 * std::log10(snr_linear);
  if (db <= snr_db_.front()) return std::min(1.0 / 12.0, var_.front());
  if (db >= snr_db_.back()) {
    return std::min(var_.back(), 1.0 / (kTwoPi * kTwoPi * snr_linear));
  }
  auto it = std::upper_bound(snr_db_.begin(), snr_db_.end(), db);
  std::size_t hi = static_cast<std::size_t>(it - snr_db_.begin());
  std::size_t lo = hi - 1;
  double t = (db - snr_db_[lo]) / (snr_db_[hi] - snr_db_[lo]);
  return var_[lo] + t * (var_[hi] - var_[lo]);
}

HTable h_fit(std::span<const double> snr_grid_db, long samples_per_point,
             std::uint64_t seed) {
  if (snr_grid_db.empty()) throw std::invalid_argument("h_fit: empty SNR grid");
  if (samples_per_point < 16) throw std::invalid_argument("h_fit: too few samples per point");

  std::vector<double> grid(snr_grid_db.begin(), snr_grid_db.end());
  std::vector<double> var(grid.size(), 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double snr = std::pow(10.0, grid[p] / 10.0);
    const double scale = std::sqrt(1.0 / (2.0 * snr));
    std::mt19937_64 rng(derive_seed(seed, p));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // IF increments of a unit phasor perturbed by complex Gaussian noise.
    auto draw_angle = [&]() {
      cplx z(gauss(rng), gauss(rng));
      return std::arg(cplx(1.0, 0.0) + scale * z);
    };
    const long n = samples_per_point;
    std::vector<double> eps(static_cast<std::size_t>(n));
    double prev = draw_angle();
    double mean = 0.0;
    for (long i = 0; i < n; ++i) {
      double next = draw_angle();
      double d = next - prev;
      d -= kTwoPi * std::round(d / kTwoPi);
      eps[static_cast<std::size_t>(i)] = d / kTwoPi;
      mean += eps[static_cast<std::size_t>(i)];
      prev = next;
    }
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (double e : eps) acc += (e - mean) * (e - mean);
    var[p] = acc / static_cast<double>(n - 1);
  }
  return HTable(std::move(grid), std::move(var), samples_per_point, seed);
}

double sigma_hat(double linewidth, double fs, double snr_linear, const HTable& h) {
  if (linewidth < 0.0 || !(fs > 0.0)) {
    throw std::invalid_argument("sigma_hat: invalid linewidth or sampling rate");
  }
  double add = std::isinf(snr_linear) ? 0.0 : h(snr_linear);
  return linewidth / (M_PI * fs) + add;
}

double wrapped_normal_loglik(const IfSequence& z, const Waveform& w, double fs,
                             double tau, double f, double sigma2, int k_wrap,
                             double* grad_tau, double* grad_f) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("wrapped_normal_loglik: sigma2 must be positive");
  if (k_wrap < 0) throw std::invalid_argument("wrapped_normal_loglik: negative wrap count");

  double ll = 0.0, gt = 0.0, gf = 0.0;
  const double inv_s2 = 1.0 / sigma2;
  for (std::size_t n = 0; n < z.zeta.size(); ++n) {
    const double t = z.t_mid[n];
    const double g = w.wrapped_if(tau, f, fs, t);
    const double r = z.zeta[n] - g;

    // log-sum-exp over wrap hypotheses k = -K..K.
    double emax = -std::numeric_limits<double>::infinity();
    for (int k = -k_wrap; k <= k_wrap; ++k) {
      double d = r - static_cast<double>(k);
      emax = std::max(emax, -0.5 * d * d * inv_s2);
    }
    double sum = 0.0, wsum = 0.0;
    for (int k = -k_wrap; k <= k_wrap; ++k) {
      double d = r - static_cast<double>(k);
      double e = std::exp(-0.5 * d * d * inv_s2 - emax);
      sum += e;
      wsum += e * d;
    }
    ll += emax + std::log(sum);

    if (grad_tau || grad_f) {
      // d(loglik_n)/d(g) = sum_k w_k (r - k) / sigma^2 with softmax w_k.
      double dg = (wsum / sum) * inv_s2;
      if (grad_tau) gt += dg * w.slope(t - tau) / fs;
      if (grad_f) gf += dg / fs;
    }
  }
  if (grad_tau) *grad_tau = gt;
  if (grad_f) *grad_f = gf;
  return ll;
}

double deterministic_distance(const Waveform& w, double fs, double tau1, double f1,
                              double tau2, double f2, std::span<const double> t_mid) {
  double acc = 0.0;
  for (double t : t_mid) {
    double d = centered_modulo(
        w.wrapped_if(tau1, f1, fs, t) - w.wrapped_if(tau2, f2, fs, t), 1.0);
    acc += d * d;
  }
  return acc;
}

std::pair<double, double> rhombus_numeric(const Waveform& w, double fs,
                                          std::span<const double> t_mid) {
  if (t_mid.empty()) throw std::invalid_argument("rhombus_numeric: empty time grid");
  const double T = w.chirp_duration();
  const double tau0 = T;  // interior reference point of the fundamental cell

  std::vector<double> ref(t_mid.size());
  for (std::size_t i = 0; i < t_mid.size(); ++i) {
    ref[i] = w.wrapped_if(tau0, 0.0, fs, t_mid[i]);
  }

  // Largest wrapped residual as a function of the offset along one axis.
  auto max_residual = [&](double dtau, double df) {
    double worst = 0.0;
    for (std::size_t i = 0; i < t_mid.size(); ++i) {
      double d = centered_modulo(
          w.wrapped_if(tau0 + dtau, df, fs, t_mid[i]) - ref[i], 1.0);
      worst = std::max(worst, std::abs(d));
    }
    return worst;
  };

  // Scan outward until the residual saturates at the wrap boundary 1/2
  // or starts folding back; the half-extent is doubled into a full side.
  auto scan = [&](double step, double limit, bool along_tau) {
    double prev = 0.0, prev2 = 0.0;
    double delta = 0.0;
    for (long k = 1; static_cast<double>(k) * step <= limit; ++k) {
      double off = static_cast<double>(k) * step;
      double m = along_tau ? max_residual(off, 0.0) : max_residual(0.0, off);
      delta = off;
      if (m >= 0.5 - 1e-3) {
        // close to the wrap boundary: extrapolate the ascending branch to
        // the exact 0.5 crossing for sub-step accuracy
        double slope_up = (k >= 3) ? (prev - prev2) / step : 0.0;
        if (slope_up > 0.0) {
          double x = off - step + (0.5 - prev) / slope_up;
          delta = std::clamp(x, off - step, off + step);
        }
        break;
      }
      if (m < prev - 1e-12) {
        delta = off - step;  // residual folded back between samples
        break;
      }
      prev2 = prev;
      prev = m;
    }
    return 2.0 * delta;
  };

  double dtau = scan(T / 2000.0, 2.0 * T, true);
  double df = scan(fs / 2000.0, fs, false);
  return {dtau, df};
}

std::vector<std::pair<double, double>> initial_lattice(const Waveform& w, double fs,
                                                       double gamma,
                                                       bool estimate_doppler,
                                                       std::span<const double> t_mid) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("initial_lattice: gamma must lie in (0, 1]");
  }
  const double T = w.chirp_duration();
  const double B = w.bandwidth();

  double dtau = 0.0, df = fs;
  switch (w.kind()) {
    case WaveKind::Triangular:
      dtau = fs * T / B;
      break;
    case WaveKind::Sinusoidal:
      dtau = (4.0 * T / M_PI) * std::asin(std::min(1.0, 0.5 * fs / B));
      break;
    default: {
      auto [dt, dfn] = rhombus_numeric(w, fs, t_mid);
      dtau = dt;
      df = dfn;
      break;
    }
  }
  dtau = std::min(dtau, 2.0 * T);
  df = std::min(df, fs);

  const long ncols = std::max<long>(1, static_cast<long>(std::ceil(2.0 * T / (gamma * dtau))));
  std::vector<double> fr;
  if (estimate_doppler) {
    const long nrows = std::max<long>(1, static_cast<long>(std::ceil(fs / (gamma * df))));
    for (long j = 0; j < nrows; ++j) {
      fr.push_back(-0.5 * fs + (static_cast<double>(j) + 0.5) * fs / static_cast<double>(nrows));
    }
  } else {
    fr.push_back(0.0);
  }

  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(ncols) * fr.size());
  for (long i = 0; i < ncols; ++i) {
    double tau = (static_cast<double>(i) + 0.5) * 2.0 * T / static_cast<double>(ncols);
    for (double f : fr) pts.emplace_back(tau, f);
  }
  return pts;
}

Estimate iff_estimate(const Measurement& m, const Waveform& w, const IffOptions& opt) {
  const double fs = m.config.fs;
  const double T = w.chirp_duration();
  IfSequence z = extract_if(m.u, fs);

  // Noise-scale estimate: phase-noise floor plus the calibrated
  // additive-noise contribution at the estimated SNR.
  double s2_final;
  if (opt.sigma2_override > 0.0) {
    s2_final = opt.sigma2_override;
  } else {
    double var_v = complex_variance(m.v_aux);
    double mean_sq = 0.0;
    for (const cplx& x : m.v_aux) mean_sq += std::norm(x);
    mean_sq /= static_cast<double>(m.v_aux.size());
    double snr = std::numeric_limits<double>::infinity();
    // Relative threshold: a constant channel is noiseless even when the
    // sample mean rounds a final ulp away from the samples.
    if (var_v > 1e-20 * mean_sq) {
      snr = estimate_snr(m.u, m.v_aux);
      if (!opt.h_table || opt.h_table->empty()) {
        throw MissingCalibration("iff_estimate: calibration table required for noisy data");
      }
    }
    const HTable empty_table;
    const HTable& h = (opt.h_table && !opt.h_table->empty()) ? *opt.h_table : empty_table;
    s2_final = sigma_hat(m.config.linewidth, fs, snr, h);
  }
  s2_final = std::max(s2_final, 1e-12);

  // Annealing schedule: widened, geometric midpoint, final.
  const double s2_1 = std::max(s2_final, 1e-2);
  const double s2_2 = std::sqrt(s2_1 * s2_final);
  const double stages[3] = {s2_1, s2_2, s2_final};

  auto wrap_count = [&](double s2) {
    return std::max(opt.k_wrap, static_cast<int>(std::ceil(3.0 * std::sqrt(s2))));
  };

  const auto starts = initial_lattice(w, fs, opt.gamma, opt.estimate_doppler, z.t_mid);

  Estimate best;
  best.method = Method::Iff;
  best.objective = -std::numeric_limits<double>::infinity();
  best.starts_tried = static_cast<int>(starts.size());

  for (const auto& [tau0, f0] : starts) {
    // Scaled coordinates x = (tau/T, f/fs) for balanced curvature.
    std::vector<double> x = {tau0 / T};
    if (opt.estimate_doppler) x.push_back(f0 / fs);
    bool converged = true;

    for (double s2 : stages) {
      const int K = wrap_count(s2);
      auto vg = [&](std::span<const double> xs) {
        ValueGrad out;
        double gt = 0.0, gf = 0.0;
        out.value = wrapped_normal_loglik(z, w, fs, xs[0] * T,
                                          opt.estimate_doppler ? xs[1] * fs : 0.0,
                                          s2, K, &gt, &gf);
        out.grad = {gt * T};
        if (opt.estimate_doppler) out.grad.push_back(gf * fs);
        return out;
      };
      OptimResult r = maximize_quasi_newton(vg, x, 1e-12, 200);
      x = r.point;
      converged = converged && r.converged;
      if (s2 == s2_final && s2_1 == s2_final) break;  // single effective stage
    }

    double tau_hat = x[0] * T;
    double f_hat = opt.estimate_doppler ? x[1] * fs : 0.0;
    double val = wrapped_normal_loglik(z, w, fs, tau_hat, f_hat, s2_final,
                                       wrap_count(s2_final));

    // Reduce into the fundamental cell before comparison so ties resolve
    // to the smallest delay, then the smallest |Doppler|.
    double tw = std::fmod(tau_hat, 2.0 * T);
    if (tw <= 0.0) tw += 2.0 * T;
    double fw = centered_modulo(f_hat, fs);

    if (!std::isfinite(val)) continue;
    const bool first = !std::isfinite(best.objective);
    const double rel = first ? 0.0 : 1e-10 * (std::abs(best.objective) + 1.0);
    bool better = first || val > best.objective + rel;
    bool tie = !first && std::abs(val - best.objective) <= rel;
    if (better || (tie && (tw < best.tau_hat ||
                           (tw == best.tau_hat && std::abs(fw) < std::abs(best.f_hat))))) {
      best.tau_hat = tw;
      best.f_hat = fw;
      best.objective = val;
      best.converged = converged;
    }
  }

  best.d_hat = 0.5 * best.tau_hat * AcquisitionConfig::kSpeedOfLight;
  best.v_hat = best.f_hat * AcquisitionConfig::kSpeedOfLight / (2.0 * w.center_frequency());
  return best;
}

}  // namespace fmcw
