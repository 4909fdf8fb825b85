#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fmcw/cbf.hpp"

using namespace fmcw;

namespace {

constexpr double kB = 500e6;
constexpr double kT = 2e-6;
constexpr double kFs = 200e6;
constexpr double kFc = AcquisitionConfig::kSpeedOfLight / 1.55e-6;

AcquisitionConfig cfg(long n = 800) {
  AcquisitionConfig c;
  c.fs = kFs;
  c.num_samples = n;
  c.linewidth = 1e5;
  return c;
}

std::vector<cplx> tone(double f, std::size_t n, double fs) {
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ph = 2.0 * M_PI * f * static_cast<double>(i) / fs;
    x[i] = cplx(std::cos(ph), std::sin(ph));
  }
  return x;
}

}  // namespace

TEST_CASE("beat-frequency remapping: worked cases") {
  // identity case
  auto [tau1, f1] = cbf_to_params_complex({30e6, -20e6}, kB, kT, kFs);
  CHECK(tau1 == doctest::Approx(0.1e-6).epsilon(1e-12));
  CHECK(f1 == doctest::Approx(5e6).epsilon(1e-12));
  // sum below -fs/2: fb1 shifted up a full fs
  auto [tau2, f2] = cbf_to_params_complex({-80e6, 60e6}, kB, kT, kFs);
  CHECK(tau2 == doctest::Approx(0.52e-6).epsilon(1e-12));
  CHECK(f2 == doctest::Approx(-10e6).epsilon(1e-12));
}

TEST_CASE("beat-frequency remapping round-trips the unambiguous cell") {
  std::mt19937_64 rng(11);
  const double tau_max = kT * kFs / kB;  // 0.8 us
  std::uniform_real_distribution<double> taus(1e-9, tau_max * 0.999);
  std::uniform_real_distribution<double> fr(-kFs / 4 * 0.999, kFs / 4 * 0.999);
  for (int i = 0; i < 2000; ++i) {
    double tau = taus(rng), f = fr(rng);
    BeatFrequencies bf{centered_modulo((kB / kT) * tau + f, kFs),
                       centered_modulo(-(kB / kT) * tau + f, kFs)};
    auto [tau_r, f_r] = cbf_to_params_complex(bf, kB, kT, kFs);
    CHECK(tau_r == doctest::Approx(tau).epsilon(1e-9));
    CHECK(f_r == doctest::Approx(f).epsilon(1e-9).scale(kFs));
  }
}

TEST_CASE("real-signal recovery from magnitudes") {
  auto [tau, f] = cbf_to_params_real(30e6, 20e6, kB, kT);
  CHECK(tau == doctest::Approx((kT / (2 * kB)) * 50e6));
  CHECK(f == doctest::Approx(5e6));
  CHECK_THROWS_AS(cbf_to_params_real(-1.0, 1.0, kB, kT), std::invalid_argument);
}

TEST_CASE("periodogram peak refinement on off-bin tones") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> fr(-kFs / 2 * 0.98, kFs / 2 * 0.98);
  for (int i = 0; i < 20; ++i) {
    double f = fr(rng);
    auto x = tone(f, 400, kFs);
    CHECK(std::abs(max_periodogram(x, kFs) - f) < 1.0);
  }
  std::vector<cplx> zeros(64, cplx{0.0, 0.0});
  CHECK_THROWS_AS(max_periodogram(zeros, kFs), DegenerateInput);
  std::vector<cplx> tiny(2, cplx{1.0, 0.0});
  CHECK_THROWS_AS(max_periodogram(tiny, kFs), std::invalid_argument);
}

TEST_CASE("lorentzian fit at least matches the periodogram on a clean tone") {
  auto x = tone(37.3e6, 400, kFs);
  bool fell_back = false;
  double f = lorentzian_fit(x, kFs, &fell_back);
  CHECK(f == doctest::Approx(37.3e6).epsilon(1e-5));
}

TEST_CASE("lorentzian fit centers a phase-noise-broadened line") {
  Waveform w = Waveform::triangular(kB, kT, kFc);
  AcquisitionConfig c = cfg();
  // 60 m is well inside the conventional unambiguous range
  Target t{60.0, 0.0};
  double err_acc = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Measurement m = synth_measurement(w, c, t, 300 + s);
    Estimate e = estimate_cbf(m, w, FreqEstimator::Lorentzian);
    err_acc += (e.d_hat - 60.0) * (e.d_hat - 60.0);
  }
  CHECK(std::sqrt(err_acc / 10.0) < 0.1);
}

TEST_CASE("CBF estimation requires triangular modulation") {
  Waveform sin_w = Waveform::sinusoidal(kB, kT, kFc);
  Measurement m = synth_measurement(sin_w, cfg(), Target{30.0, 0.0}, 1, true);
  CHECK_THROWS_AS(estimate_cbf(m, sin_w, FreqEstimator::Periodogram), UnsupportedCombination);
}

TEST_CASE("noiseless CBF recovers in-range targets") {
  Waveform w = Waveform::triangular(kB, kT, kFc);
  AcquisitionConfig c = cfg();
  for (double d : {10.0, 60.0, 110.0}) {
    Measurement m = synth_measurement(w, c, Target{d, 2.0}, 5, true);
    Estimate e = estimate_cbf(m, w, FreqEstimator::Periodogram);
    CHECK(e.d_hat == doctest::Approx(d).epsilon(1e-3));
    CHECK(e.v_hat == doctest::Approx(2.0).epsilon(2e-2));
  }
}

TEST_CASE("average-IF method on sinusoidal modulation") {
  Waveform w = Waveform::sinusoidal(kB, kT, kFc);
  AcquisitionConfig c = cfg();
  // small delay: the mean-absolute-phase relation is exact in the limit
  Measurement m = synth_measurement(w, c, Target{5.0, 1.0}, 3, true);
  Estimate e = tsuchida_estimate(m, w);
  CHECK(e.d_hat == doctest::Approx(5.0).epsilon(2e-2));
  CHECK(e.v_hat == doctest::Approx(1.0).epsilon(2e-2));

  Waveform tri = Waveform::triangular(kB, kT, kFc);
  Measurement m2 = synth_measurement(tri, c, Target{5.0, 0.0}, 3, true);
  CHECK_THROWS_AS(tsuchida_estimate(m2, tri), UnsupportedCombination);
}
