#include "fmcw/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fmcw {

void AcquisitionConfig::validate() const {
  if (!(fs > 0.0)) throw std::invalid_argument("acq.fs_hz must be positive");
  if (num_samples < 2) throw std::invalid_argument("acq.num_samples must be at least 2");
  if (linewidth < 0.0) throw std::invalid_argument("acq.linewidth_hz must be nonnegative");
  if (p_tx < 0.0 || p_lo < 0.0) throw std::invalid_argument("optical powers must be nonnegative");
  if (aperture_m2 < 0.0) throw std::invalid_argument("acq.aperture_m2 must be nonnegative");
  if (reflectivity < 0.0 || reflectivity > 1.0) {
    throw std::invalid_argument("acq.reflectivity must lie in [0, 1]");
  }
  if (responsivity < 0.0) throw std::invalid_argument("acq.responsivity must be nonnegative");
}

double received_power(const AcquisitionConfig& cfg, double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("target.d_m must be positive");
  return cfg.p_tx * cfg.responsivity * cfg.aperture_m2 * cfg.reflectivity /
         (M_PI * distance_m * distance_m);
}

double snr_eta(const AcquisitionConfig& cfg, double distance_m) {
  double prx = received_power(cfg, distance_m);
  return 2.0 * cfg.responsivity * cfg.p_lo * prx /
         (AcquisitionConfig::kElectronCharge * (cfg.p_lo + prx));
}

double amplitude_a1(const AcquisitionConfig& cfg, double distance_m) {
  return 2.0 * cfg.responsivity * std::sqrt(cfg.p_lo * received_power(cfg, distance_m));
}

double amplitude_a2(const AcquisitionConfig& cfg, double distance_m) {
  return cfg.responsivity * (cfg.p_lo + received_power(cfg, distance_m));
}

std::vector<double> simulate_phase_noise(double linewidth, double tau, double fs,
                                         long n, std::uint64_t seed) {
  if (linewidth < 0.0 || tau < 0.0) {
    throw std::invalid_argument("simulate_phase_noise: L and tau must be nonnegative");
  }
  std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
  if (linewidth == 0.0 || tau == 0.0 || n == 0) return xi;

  // Wiener process evaluated on the merged grid {t_n} U {t_n - tau} with
  // exact Gaussian increments per gap; no interpolation.
  const std::size_t N = static_cast<std::size_t>(n);
  struct Node { double t; std::size_t idx; };  // idx < N: t_n - tau; else t_n
  std::vector<Node> nodes(2 * N);
  for (std::size_t i = 0; i < N; ++i) {
    double tn = static_cast<double>(i) / fs;
    nodes[i] = {tn - tau, i};
    nodes[N + i] = {tn, N + i};
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const Node& a, const Node& b) { return a.t < b.t; });

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> omega(2 * N, 0.0);
  double w = 0.0;
  double prev_t = nodes.front().t;
  for (const Node& node : nodes) {
    double dt = node.t - prev_t;
    if (dt > 0.0) {
      w += gauss(rng) * std::sqrt(2.0 * M_PI * linewidth * dt);
      prev_t = node.t;
    }
    omega[node.idx] = w;
  }
  for (std::size_t i = 0; i < N; ++i) xi[i] = omega[N + i] - omega[i];
  return xi;
}

Measurement synth_measurement(const Waveform& w, const AcquisitionConfig& cfg,
                              const Target& target, std::uint64_t seed,
                              bool noiseless) {
  cfg.validate();
  if (!(target.distance_m > 0.0)) throw std::invalid_argument("target.d_m must be positive");

  const std::size_t N = static_cast<std::size_t>(cfg.num_samples);
  const double tau = target.delay();
  const double f = target.doppler(w.center_frequency());
  const double a1 = amplitude_a1(cfg, target.distance_m);
  const double a2 = amplitude_a2(cfg, target.distance_m);
  const double sigma_shot = noiseless ? 0.0
      : std::sqrt(AcquisitionConfig::kElectronCharge * a2);

  std::vector<double> xi;
  if (!noiseless) {
    xi = simulate_phase_noise(cfg.linewidth, tau, cfg.fs,
                              cfg.num_samples, derive_seed(seed, 0));
  }

  // phi(t; tau, f) = 2*pi*[mean_freq*tau + Psi0(t) - Psi0(t-tau) + f*t].
  // The constant carrier term is reduced mod 1 cycle once, so that the
  // optical center frequency costs no precision in the per-sample phase.
  const double carrier_cycles = std::fmod(w.mean_freq() * tau, 1.0);

  Measurement m;
  m.config = cfg;
  m.seed = seed;
  m.u.resize(N);
  m.v_aux.resize(N);

  std::mt19937_64 rng_u(derive_seed(seed, 1));
  std::mt19937_64 rng_v(derive_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t i = 0; i < N; ++i) {
    double t = static_cast<double>(i) / cfg.fs;
    double cycles = carrier_cycles + w.phase_integral(t) - w.phase_integral(t - tau) + f * t;
    double phase = 2.0 * M_PI * cycles + (noiseless ? 0.0 : xi[i]);
    cplx signal = a1 * cplx(std::cos(phase), std::sin(phase));
    if (noiseless) {
      m.u[i] = signal;
      m.v_aux[i] = cplx(a2, 0.0);
    } else {
      m.u[i] = signal + cplx(sigma_shot * gauss(rng_u), sigma_shot * gauss(rng_u));
      m.v_aux[i] = cplx(a2 + sigma_shot * gauss(rng_v), sigma_shot * gauss(rng_v));
    }
  }
  return m;
}

}  // namespace fmcw
