#ifndef FMCW_SWEEP_HPP
#define FMCW_SWEEP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fmcw/estimate.hpp"
#include "fmcw/iff.hpp"
#include "fmcw/io.hpp"

namespace fmcw {

struct SweepSpec {
  WaveKind kind = WaveKind::Triangular;
  double bandwidth = 0.0;
  double chirp_duration = 0.0;
  double center_frequency = AcquisitionConfig::kSpeedOfLight / 1.55e-6;
  std::string table_path;
  AcquisitionConfig acq;
  std::vector<double> distances_m;
  std::vector<double> velocities_mps;
  std::vector<Method> methods;
  long trials = 0;
  std::uint64_t master_seed = 0;
  bool expect_ambiguous = false;
  std::string h_table_path;

  Waveform make_waveform() const;
};

struct SweepRecord {
  double distance_m = 0.0;
  double velocity_mps = 0.0;
  Method method = Method::Iff;
  long trial = 0;
  std::uint64_t seed = 0;
  double d_hat_m = 0.0;
  double v_hat_mps = 0.0;
  double abs_err_d_m = 0.0;
  double abs_err_v_mps = 0.0;
  double runtime_ms = 0.0;
  bool converged = false;
};

struct SweepSummaryRow {
  double distance_m = 0.0;
  double velocity_mps = 0.0;
  Method method = Method::Iff;
  double rmse_d = 0.0;
  double rmse_v = 0.0;
  double se_std = 0.0;  // standard deviation of the absolute distance error
};

/// Parses a sweep spec: the scenario sections plus sweep.distances_m,
/// sweep.velocities_mps, sweep.methods (comma lists), sweep.trials,
/// sweep.master_seed, sweep.expect_ambiguous, sweep.h_table_path.
SweepSpec parse_sweep_spec_file(const std::string& path);
SweepSpec parse_sweep_spec(std::istream& in);

/// Dispatches one estimate; iff requires a calibration table for noisy
/// measurements.
Estimate run_estimator(Method method, const Measurement& m, const Waveform& w,
                       const HTable* h);

/// Runs the full sweep on a bounded worker pool (jobs <= 0 selects the
/// hardware concurrency). Row order is deterministic: sorted by grid
/// point, then method, then trial, independent of scheduling.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, int jobs);

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRecord>& records);

void write_records_csv(const std::string& path, const std::vector<SweepRecord>& records);
void write_summary_csv(const std::string& path, const std::vector<SweepSummaryRow>& rows);

}  // namespace fmcw

#endif
