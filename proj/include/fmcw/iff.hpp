#ifndef FMCW_IFF_HPP
#define FMCW_IFF_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fmcw/estimate.hpp"
#include "fmcw/numerics.hpp"
#include "fmcw/signal_model.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

/// Extracted instantaneous-frequency sequence: zeta_n in cycles per
/// sample, each in (-1/2, 1/2], attached to midpoint times.
struct IfSequence {
  std::vector<double> zeta;
  std::vector<double> t_mid;
};

/// zeta_n = (1/2 pi) arg(u_{n+1} conj(u_n)); throws DegenerateInput on a
/// zero-magnitude sample.
IfSequence extract_if(std::span<const cplx> u, double fs);

/// Amplitude SNR estimate (mean|u|^2 - var(v)) / var(v); throws
/// DegenerateInput when the auxiliary channel has zero variance.
double estimate_snr(std::span<const cplx> u, std::span<const cplx> v_aux);

/// Monte Carlo regression of the additive-noise IF variance over SNR.
/// Lookup clamps to 1/12 below the grid and to the high-SNR asymptote
/// 1/((2 pi)^2 SNR) above it; interior interpolation is monotone
/// non-increasing.
class HTable {
 public:
  HTable() = default;
  HTable(std::vector<double> snr_db, std::vector<double> variance,
         long samples_per_point, std::uint64_t seed);

  double operator()(double snr_linear) const;
  bool empty() const { return snr_db_.empty(); }

  const std::vector<double>& grid_db() const { return snr_db_; }
  const std::vector<double>& variance() const { return var_; }
  long samples_per_point() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<double> snr_db_;
  std::vector<double> var_;
  long samples_ = 0;
  std::uint64_t seed_ = 0;
};

/// Simulates projected-normal IF noise at each grid SNR and regresses its
/// variance (monotone non-increasing in SNR).
HTable h_fit(std::span<const double> snr_grid_db, long samples_per_point,
             std::uint64_t seed);

/// sigma^2 = L/(pi fs) + h(SNR). Pass snr_linear = infinity for the
/// noiseless limit.
double sigma_hat(double linewidth, double fs, double snr_linear, const HTable& h);

/// Wrapped-normal log-likelihood of the extracted IF under parameters
/// (tau, f), plus its analytic gradient when grad_tau/grad_f are non-null.
double wrapped_normal_loglik(const IfSequence& z, const Waveform& w, double fs,
                             double tau, double f, double sigma2, int k_wrap,
                             double* grad_tau = nullptr, double* grad_f = nullptr);

/// Deterministic distance between two wrapped IF trajectories on the
/// midpoint grid: sum of squared wrapped differences.
double deterministic_distance(const Waveform& w, double fs, double tau1, double f1,
                              double tau2, double f2, std::span<const double> t_mid);

/// Numeric rhombus dimensions (delta_tau, delta_f): axis scans of the
/// deterministic distance around the basin at (T, 0) until the wrapped
/// residual first reaches the modulo boundary 1/2.
std::pair<double, double> rhombus_numeric(const Waveform& w, double fs,
                                          std::span<const double> t_mid);

/// Initial-point lattice over (0, 2T] x (-fs/2, fs/2] with delay spacing
/// gamma * delta_tau and frequency spacing gamma * delta_f. For known
/// waveforms the rhombus dimensions are closed-form; otherwise they come
/// from rhombus_numeric. With estimate_doppler = false a single f = 0 row
/// is produced.
std::vector<std::pair<double, double>> initial_lattice(const Waveform& w, double fs,
                                                       double gamma,
                                                       bool estimate_doppler,
                                                       std::span<const double> t_mid);

struct IffOptions {
  int k_wrap = 2;            // enforced >= ceil(3 sigma)
  double gamma = 0.9;        // lattice densification, in (0, 1]
  bool estimate_doppler = true;
  const HTable* h_table = nullptr;  // required for noisy data
  double sigma2_override = -1.0;    // used instead of the estimate if > 0
};

/// Multi-start annealed maximization of the wrapped-normal likelihood
/// (sigma_1 > sigma_2 > sigma_3 = sigma_hat), initial points on the
/// rhombus lattice, quasi-Newton ascent per stage; final delay reduced
/// into (0, 2T] and Doppler into (-fs/2, fs/2].
Estimate iff_estimate(const Measurement& m, const Waveform& w,
                      const IffOptions& opt = {});

}  // namespace fmcw

#endif
