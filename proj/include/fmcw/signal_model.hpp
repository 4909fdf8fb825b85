#ifndef FMCW_SIGNAL_MODEL_HPP
#define FMCW_SIGNAL_MODEL_HPP

#include <cstdint>
#include <vector>

#include "fmcw/numerics.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

struct AcquisitionConfig {
  double fs = 0.0;          // sampling rate, Hz
  long num_samples = 0;     // N
  double linewidth = 0.0;   // laser linewidth L, Hz
  double p_tx = 1e-3;       // transmit power, W
  double p_lo = 1e-3;       // local oscillator power, W
  double aperture_m2 = 1e-6;
  double reflectivity = 0.01;
  double responsivity = 1.0;  // A/W

  static constexpr double kElectronCharge = 1.602176634e-19;
  static constexpr double kSpeedOfLight = 299792458.0;

  void validate() const;  // throws std::invalid_argument
};

struct Target {
  double distance_m = 0.0;
  double velocity_mps = 0.0;

  double delay() const { return 2.0 * distance_m / AcquisitionConfig::kSpeedOfLight; }
  double doppler(double center_frequency) const {
    return 2.0 * velocity_mps * center_frequency / AcquisitionConfig::kSpeedOfLight;
  }
};

struct Measurement {
  std::vector<cplx> u;      // interference samples
  std::vector<cplx> v_aux;  // sum-channel samples A2 + shot noise
  AcquisitionConfig config;
  std::uint64_t seed = 0;

  double time_at(std::size_t n) const { return static_cast<double>(n) / config.fs; }
};

/// Two-way lidar equation with zero atmospheric absorption and a
/// fronto-parallel target.
double received_power(const AcquisitionConfig& cfg, double distance_m);

/// Closed-form amplitude signal-to-noise ratio
/// 2 R P_LO P_RX / (q_e (P_LO + P_RX)).
double snr_eta(const AcquisitionConfig& cfg, double distance_m);

/// A1 = 2 R sqrt(P_LO P_RX) and A2 = R (P_LO + P_RX).
double amplitude_a1(const AcquisitionConfig& cfg, double distance_m);
double amplitude_a2(const AcquisitionConfig& cfg, double distance_m);

/// Differenced Wiener phase noise xi_n = omega(t_n) - omega(t_n - tau),
/// radians; omega has increment variance 2*pi*L*dt. Deterministic in seed.
std::vector<double> simulate_phase_noise(double linewidth, double tau, double fs,
                                         long n, std::uint64_t seed);

/// Synthesizes a complex measurement u and the auxiliary sum channel
/// v_aux. When noiseless is set, both phase and shot noise are disabled.
Measurement synth_measurement(const Waveform& w, const AcquisitionConfig& cfg,
                              const Target& target, std::uint64_t seed,
                              bool noiseless = false);

}  // namespace fmcw

#endif
