#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmcw/bounds.hpp"
#include "fmcw/io.hpp"
#include "fmcw/sweep.hpp"

namespace {

using namespace fmcw;

// Exit codes: 0 success, 2 config error, 3 missing calibration,
// 4 unsupported combination, 5 numeric failure.
constexpr int kExitConfig = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitUnsupported = 4;
constexpr int kExitNumeric = 5;

std::string summary_path_for(const std::string& out) {
  std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out.substr(0, out.size() - suffix.size()) + "_summary.csv";
  }
  return out + ".summary.csv";
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 bool seed_set, std::uint64_t seed) {
  ScenarioConfig cfg = parse_scenario_file(config_path);
  if (seed_set) cfg.seed = seed;
  Waveform w = cfg.make_waveform();
  Measurement m = synth_measurement(w, cfg.acq, cfg.target, cfg.seed, cfg.noiseless);
  write_measurement(out_path, m, cfg);
  return 0;
}

int cmd_estimate(const std::string& measurement_path, const std::string& method_name,
                 const std::string& htable_path) {
  auto [m, cfg] = read_measurement(measurement_path);
  Waveform w = cfg.make_waveform();
  Method method = method_from_string(method_name);

  HTable h;
  if (method == Method::Iff && !cfg.noiseless) {
    if (htable_path.empty()) {
      throw MissingCalibration(
          "method iff requires a calibration table; generate one with `fmcw hfit` "
          "and pass it via --htable");
    }
    h = read_h_table(htable_path);
  }

  auto t0 = std::chrono::steady_clock::now();
  Estimate e = run_estimator(method, m, w, &h);
  auto t1 = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::printf("%.17g,%.17g,%.17g,%.6g\n", e.d_hat, e.v_hat, e.objective, ms);
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_path, int jobs) {
  SweepSpec spec = parse_sweep_spec_file(spec_path);
  std::vector<SweepRecord> records = run_sweep(spec, jobs);
  write_records_csv(out_path, records);
  write_summary_csv(summary_path_for(out_path), summarize(records));
  return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& which,
               const std::string& distances_csv, const std::string& out_path) {
  ScenarioConfig cfg = parse_scenario_file(config_path);
  Waveform w = cfg.make_waveform();

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out.precision(17);

  if (which == "mmcrb" || which == "mmcrb-approx") {
    double v = (which == "mmcrb") ? mmcrb(w, cfg.acq) : mmcrb_approx(w, cfg.acq);
    out << "waveform,bound_m2,bound_root_m\n";
    out << to_string(cfg.kind) << ',' << v << ',' << std::sqrt(v) << '\n';
    return 0;
  }
  if (which == "awgn-cbf") {
    const double gamma_slope = cfg.bandwidth / cfg.chirp_duration;
    const double alpha = amplitude_a1(cfg.acq, cfg.target.distance_m);
    const double sigma2 =
        AcquisitionConfig::kElectronCharge * amplitude_a2(cfg.acq, cfg.target.distance_m);
    auto [vt, vf] = crb_awgn_cbf(cfg.acq.num_samples / 2, cfg.acq.fs, gamma_slope,
                                 alpha, sigma2);
    out << "quantity,bound\n";
    out << "var_tau_s2," << vt << '\n';
    out << "var_f_hz2," << vf << '\n';
    return 0;
  }

  std::vector<double> distances;
  if (!distances_csv.empty()) {
    std::stringstream ss(distances_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      distances.push_back(parse_double_value(item, "--distances"));
    }
  } else {
    distances.push_back(cfg.target.distance_m);
  }

  out << "distance_m,bound_m2,bound_root_m\n";
  for (double d : distances) {
    double v;
    if (which == "crb") {
      v = crb_distance(w, cfg.acq, d);
    } else if (which == "mcrb") {
      v = mcrb_distance(w, cfg.acq, d);
    } else {
      throw std::invalid_argument("unknown bound: " + which);
    }
    out << d << ',' << v << ',' << std::sqrt(v) << '\n';
  }
  return 0;
}

int cmd_hfit(const std::string& out_path, double grid_lo, double grid_hi,
             double grid_step, long samples, std::uint64_t seed) {
  if (!(grid_step > 0.0) || grid_hi < grid_lo) {
    throw std::invalid_argument("hfit: invalid SNR grid");
  }
  std::vector<double> grid;
  for (double g = grid_lo; g <= grid_hi + 1e-9; g += grid_step) grid.push_back(g);
  HTable h = h_fit(grid, samples, seed);
  write_h_table(out_path, h);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMCW lidar toolkit: simulation, estimation, and bound analysis"};
  app.require_subcommand(1);

  std::string config_path, out_path, method_name, htable_path, which, distances_csv;
  int jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double grid_lo = -30.0, grid_hi = 40.0, grid_step = 2.0;
  long samples = 10000;

  auto* sim = app.add_subcommand("simulate", "Synthesize a measurement file");
  sim->add_option("--config", config_path, "scenario config")->required();
  sim->add_option("--out", out_path, "output measurement file")->required();
  sim->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* est = app.add_subcommand("estimate", "Estimate distance/velocity from a measurement");
  est->add_option("--config", config_path, "measurement file")->required();
  est->add_option("--method", method_name, "periodogram|lorentzian|tsuchida|mf|mf-joint|iff")
      ->required();
  est->add_option("--htable", htable_path, "calibration table for iff");

  auto* swp = app.add_subcommand("sweep", "Monte Carlo sweep over a parameter grid");
  swp->add_option("--config", config_path, "sweep spec")->required();
  swp->add_option("--out", out_path, "records CSV (summary written alongside)")->required();
  swp->add_option("--jobs", jobs, "worker count (default: logical cores)");

  auto* bnd = app.add_subcommand("bounds", "Evaluate estimation bounds");
  bnd->add_option("--config", config_path, "scenario config")->required();
  bnd->add_option("--which", which, "crb|mcrb|mmcrb|mmcrb-approx|awgn-cbf")->required();
  bnd->add_option("--distances", distances_csv, "comma-separated distance grid (m)");
  bnd->add_option("--out", out_path, "output CSV")->required();

  auto* hft = app.add_subcommand("hfit", "Fit the additive-noise IF variance table");
  hft->add_option("--out", out_path, "output CSV")->required();
  hft->add_option("--grid-lo", grid_lo, "lowest SNR (dB)");
  hft->add_option("--grid-hi", grid_hi, "highest SNR (dB)");
  hft->add_option("--grid-step", grid_step, "grid step (dB)");
  hft->add_option("--samples", samples, "Monte Carlo samples per grid point");
  hft->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_path, seed_set, seed);
    if (est->parsed()) return cmd_estimate(config_path, method_name, htable_path);
    if (swp->parsed()) return cmd_sweep(config_path, out_path, jobs);
    if (bnd->parsed()) return cmd_bounds(config_path, which, distances_csv, out_path);
    if (hft->parsed()) return cmd_hfit(out_path, grid_lo, grid_hi, grid_step, samples, seed);
  } catch (const fmcw::MissingCalibration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const fmcw::UnsupportedCombination& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
