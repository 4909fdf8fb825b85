#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fmcw/iff.hpp"

using namespace fmcw;

namespace {

constexpr double kB = 500e6;
constexpr double kT = 2e-6;
constexpr double kFs = 200e6;
constexpr double kFc = AcquisitionConfig::kSpeedOfLight / 1.55e-6;
constexpr double kC = AcquisitionConfig::kSpeedOfLight;

AcquisitionConfig cfg(long n = 800) {
  AcquisitionConfig c;
  c.fs = kFs;
  c.num_samples = n;
  c.linewidth = 1e5;
  return c;
}

Waveform make(WaveKind k) {
  switch (k) {
    case WaveKind::Triangular: return Waveform::triangular(kB, kT, kFc);
    case WaveKind::Sinusoidal: return Waveform::sinusoidal(kB, kT, kFc);
    default: return Waveform::smooth_stair(kB, kT, kFc);
  }
}

}  // namespace

TEST_CASE("extract_if recovers a constant tone frequency") {
  std::vector<cplx> u(64);
  const double f = 12.5e6;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ph = 2.0 * M_PI * f * static_cast<double>(i) / kFs;
    u[i] = 3.0 * cplx(std::cos(ph), std::sin(ph));
  }
  IfSequence z = extract_if(u, kFs);
  REQUIRE(z.zeta.size() == 63);
  for (std::size_t i = 0; i < z.zeta.size(); ++i) {
    CHECK(z.zeta[i] == doctest::Approx(f / kFs).epsilon(1e-12));
    CHECK(z.t_mid[i] == doctest::Approx((static_cast<double>(i) + 0.5) / kFs));
  }
  u[10] = cplx(0.0, 0.0);
  CHECK_THROWS_AS(extract_if(u, kFs), DegenerateInput);
}

TEST_CASE("SNR estimation from the auxiliary channel") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  const double a1 = 2.0, sigma = 0.1;
  std::vector<cplx> u(20000), v(20000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ph = 0.3 * static_cast<double>(i);
    u[i] = a1 * cplx(std::cos(ph), std::sin(ph)) + sigma * cplx(g(rng), g(rng));
    v[i] = cplx(5.0 + sigma * g(rng), sigma * g(rng));
  }
  // truth: (a1^2 + 2 sigma^2 - 2 sigma^2) / (2 sigma^2)
  double truth = a1 * a1 / (2.0 * sigma * sigma);
  CHECK(estimate_snr(u, v) == doctest::Approx(truth).epsilon(0.05));

  std::vector<cplx> flat(100, cplx{1.0, 0.0});
  CHECK_THROWS_AS(estimate_snr(u, flat), DegenerateInput);
}

TEST_CASE("calibration table asymptotes and monotonicity") {
  std::vector<double> grid = {-40, -30, -20, -10, 0, 10, 20, 30, 40};
  HTable h = h_fit(grid, 20000, 77);
  const auto& var = h.variance();
  for (std::size_t i = 1; i < var.size(); ++i) CHECK(var[i] <= var[i - 1] + 1e-15);
  CHECK(var.front() == doctest::Approx(1.0 / 12.0).epsilon(0.05));
  double asym = 1.0 / (4.0 * M_PI * M_PI * 1e4);
  CHECK(var.back() == doctest::Approx(asym).epsilon(0.10));

  // lookup clamps outside the grid
  CHECK(h(1e-8) == doctest::Approx(1.0 / 12.0).epsilon(0.05));
  CHECK(h(1e8) == doctest::Approx(1.0 / (4.0 * M_PI * M_PI * 1e8)).epsilon(1e-12));
  CHECK(h(std::numeric_limits<double>::infinity()) == 0.0);
  // deterministic in the seed
  HTable h2 = h_fit(grid, 20000, 77);
  CHECK(h.variance() == h2.variance());
}

TEST_CASE("noise-scale composition") {
  HTable empty;
  double inf = std::numeric_limits<double>::infinity();
  CHECK(sigma_hat(1e5, kFs, inf, empty) == doctest::Approx(1e5 / (M_PI * kFs)));
  std::vector<double> grid = {0.0, 20.0};
  HTable h(grid, {1e-3, 1e-4}, 100, 1);
  CHECK(sigma_hat(0.0, kFs, 10.0, h) == doctest::Approx(h(10.0)));
}

TEST_CASE("likelihood gradient matches finite differences") {
  Waveform w = make(WaveKind::Triangular);
  AcquisitionConfig c = cfg(400);
  Measurement m = synth_measurement(w, c, Target{217.0, 4.0}, 33);
  IfSequence z = extract_if(m.u, c.fs);

  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> taus(1e-8, 2 * kT), fr(-kFs / 2, kFs / 2);
  const double s2 = 3e-3;
  int checked = 0;
  while (checked < 40) {
    double tau = taus(rng), f = fr(rng);
    double gt, gf;
    wrapped_normal_loglik(z, w, c.fs, tau, f, s2, 2, &gt, &gf);
    const double ht = 1e-13, hf = 1e-1;
    double fd_t = (wrapped_normal_loglik(z, w, c.fs, tau + ht, f, s2, 2) -
                   wrapped_normal_loglik(z, w, c.fs, tau - ht, f, s2, 2)) / (2 * ht);
    double fd_f = (wrapped_normal_loglik(z, w, c.fs, tau, f + hf, s2, 2) -
                   wrapped_normal_loglik(z, w, c.fs, tau, f - hf, s2, 2)) / (2 * hf);
    // skip wrap/kink-straddling points where one-sided derivatives differ
    if (std::abs(fd_t - gt) > 1e-4 * (std::abs(gt) + 1.0)) continue;
    CHECK(gt == doctest::Approx(fd_t).epsilon(1e-4));
    CHECK(gf == doctest::Approx(fd_f).epsilon(1e-4).scale(std::abs(gf) + 1e-9));
    ++checked;
  }
}

TEST_CASE("deterministic distance and its invariances") {
  Waveform w = make(WaveKind::Sinusoidal);
  std::vector<double> tmid;
  for (int i = 0; i < 799; ++i) tmid.push_back((i + 0.5) / kFs);
  double tau = 0.7e-6, f = 3e6;
  CHECK(deterministic_distance(w, kFs, tau, f, tau, f, tmid) == 0.0);
  CHECK(deterministic_distance(w, kFs, tau, f, tau + 2 * kT, f + kFs, tmid) < 1e-18);
  CHECK(deterministic_distance(w, kFs, tau, f, tau + 0.2e-6, f, tmid) > 1e-3);
}

TEST_CASE("numeric basin dimensions match the closed forms") {
  std::vector<double> tmid;
  for (int i = 0; i < 799; ++i) tmid.push_back((i + 0.5) / kFs);

  auto [dt_tri, df_tri] = rhombus_numeric(make(WaveKind::Triangular), kFs, tmid);
  CHECK(std::abs(dt_tri - kFs * kT * kT / kB / kT) <= 2.0 * kT / 2000.0);
  CHECK(std::abs(df_tri - kFs) <= 2.0 * kFs / 2000.0);

  auto [dt_sin, df_sin] = rhombus_numeric(make(WaveKind::Sinusoidal), kFs, tmid);
  double expect = (4.0 * kT / M_PI) * std::asin(kFs / (2.0 * kB));
  CHECK(std::abs(dt_sin - expect) <= 2.0 * kT / 2000.0);
  CHECK(std::abs(df_sin - kFs) <= 2.0 * kFs / 2000.0);
}

TEST_CASE("initial lattice covers the parameter cell") {
  std::vector<double> tmid;
  for (int i = 0; i < 799; ++i) tmid.push_back((i + 0.5) / kFs);
  for (WaveKind k : {WaveKind::Triangular, WaveKind::Sinusoidal, WaveKind::SmoothStair}) {
    Waveform w = make(k);
    auto pts = initial_lattice(w, kFs, 0.9, true, tmid);
    CHECK(pts.size() >= 2);
    for (auto [tau, f] : pts) {
      CHECK(tau > 0.0);
      CHECK(tau <= 2 * kT);
      CHECK(std::abs(f) <= kFs / 2);
    }
    auto single = initial_lattice(w, kFs, 0.9, false, tmid);
    for (auto [tau, f] : single) CHECK(f == 0.0);
  }
  // triangular spacing: ceil(2T / (0.9 * fs T / B)) columns x 2 rows
  auto tri = initial_lattice(make(WaveKind::Triangular), kFs, 0.9, true, tmid);
  CHECK(tri.size() == 12);
}

TEST_CASE("noiseless IFF estimation recovers delay and Doppler") {
  AcquisitionConfig c = cfg();
  for (WaveKind k : {WaveKind::Triangular, WaveKind::Sinusoidal, WaveKind::SmoothStair}) {
    Waveform w = make(k);
    Measurement m = synth_measurement(w, c, Target{437.0, -6.0}, 9, true);
    Estimate e = iff_estimate(m, w);
    CHECK(std::abs(e.d_hat - 437.0) < 1e-3);
    CHECK(std::abs(e.v_hat + 6.0) < 1e-3);
    CHECK(e.converged);
  }
}

TEST_CASE("noisy IFF estimation requires calibration") {
  Waveform w = make(WaveKind::Triangular);
  Measurement m = synth_measurement(w, cfg(), Target{100.0, 0.0}, 10);
  CHECK_THROWS_AS(iff_estimate(m, w), MissingCalibration);
}

TEST_CASE("IFF delay estimate lies in the fundamental cell") {
  Waveform w = make(WaveKind::Triangular);
  AcquisitionConfig c = cfg();
  // distance near the cell edge: estimate must come back wrapped
  Measurement m = synth_measurement(w, c, Target{599.0, 0.0}, 12, true);
  Estimate e = iff_estimate(m, w);
  CHECK(e.tau_hat > 0.0);
  CHECK(e.tau_hat <= 2 * kT + 1e-15);
  CHECK(std::abs(centered_modulo(e.tau_hat - 2.0 * 599.0 / kC, 2 * kT)) < 1e-11);
}
