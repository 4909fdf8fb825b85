#include "fmcw/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fmcw/cbf.hpp"
#include "fmcw/matched_filter.hpp"

namespace fmcw {

namespace {

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double_value(item, key));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

// Unambiguous limits per method family; CBF methods are confined to the
// smaller beat-frequency cell.
void check_unambiguous(const SweepSpec& s) {
  const double c = AcquisitionConfig::kSpeedOfLight;
  const double T = s.chirp_duration;
  const double fs = s.acq.fs;
  for (Method m : s.methods) {
    double d_max, v_max;
    if (m == Method::Periodogram || m == Method::Lorentzian || m == Method::Tsuchida) {
      d_max = 0.5 * c * std::min(T * fs / s.bandwidth, 2.0 * T);
      v_max = c * fs / (8.0 * s.center_frequency);
    } else {
      d_max = c * T;
      v_max = c * fs / (4.0 * s.center_frequency);
    }
    for (double d : s.distances_m) {
      if (d <= 0.0 || d > d_max) {
        throw std::invalid_argument("sweep: distance " + std::to_string(d) +
                                    " m is ambiguous for method " + to_string(m) +
                                    "; set sweep.expect_ambiguous = true to run anyway");
      }
    }
    for (double v : s.velocities_mps) {
      if (std::abs(v) > v_max) {
        throw std::invalid_argument("sweep: velocity " + std::to_string(v) +
                                    " m/s is ambiguous for method " + to_string(m) +
                                    "; set sweep.expect_ambiguous = true to run anyway");
      }
    }
  }
}

}  // namespace

Waveform SweepSpec::make_waveform() const {
  ScenarioConfig c;
  c.kind = kind;
  c.bandwidth = bandwidth;
  c.chirp_duration = chirp_duration;
  c.center_frequency = center_frequency;
  c.table_path = table_path;
  return c.make_waveform();
}

SweepSpec parse_sweep_spec(std::istream& in) {
  auto kv = read_key_values(in);
  SweepSpec s;

  auto take = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return "";
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto require = [&](const char* key) {
    std::string v = take(key);
    if (v.empty()) throw std::invalid_argument(std::string("config: missing required key ") + key);
    return v;
  };

  s.kind = wave_kind_from_string(require("waveform.kind"));
  s.bandwidth = parse_double_value(require("waveform.bandwidth_hz"), "waveform.bandwidth_hz");
  s.chirp_duration =
      parse_double_value(require("waveform.chirp_duration_s"), "waveform.chirp_duration_s");
  if (std::string v = take("waveform.center_frequency_hz"); !v.empty()) {
    s.center_frequency = parse_double_value(v, "waveform.center_frequency_hz");
  }
  s.table_path = take("waveform.table_path");

  s.acq.fs = parse_double_value(require("acq.fs_hz"), "acq.fs_hz");
  s.acq.num_samples =
      static_cast<long>(parse_double_value(require("acq.num_samples"), "acq.num_samples"));
  s.acq.linewidth = parse_double_value(require("acq.linewidth_hz"), "acq.linewidth_hz");
  if (std::string v = take("acq.p_tx_w"); !v.empty()) s.acq.p_tx = parse_double_value(v, "acq.p_tx_w");
  if (std::string v = take("acq.p_lo_w"); !v.empty()) s.acq.p_lo = parse_double_value(v, "acq.p_lo_w");
  if (std::string v = take("acq.aperture_m2"); !v.empty()) {
    s.acq.aperture_m2 = parse_double_value(v, "acq.aperture_m2");
  }
  if (std::string v = take("acq.reflectivity"); !v.empty()) {
    s.acq.reflectivity = parse_double_value(v, "acq.reflectivity");
  }
  if (std::string v = take("acq.responsivity"); !v.empty()) {
    s.acq.responsivity = parse_double_value(v, "acq.responsivity");
  }

  s.distances_m = parse_double_list(require("sweep.distances_m"), "sweep.distances_m");
  if (std::string v = take("sweep.velocities_mps"); !v.empty()) {
    s.velocities_mps = parse_double_list(v, "sweep.velocities_mps");
  } else {
    s.velocities_mps = {0.0};
  }
  {
    std::stringstream ss(require("sweep.methods"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t b = item.find_first_not_of(" \t");
      std::size_t e = item.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      s.methods.push_back(method_from_string(item.substr(b, e - b + 1)));
    }
    if (s.methods.empty()) throw std::invalid_argument("config: sweep.methods is empty");
  }
  s.trials = static_cast<long>(parse_double_value(require("sweep.trials"), "sweep.trials"));
  if (s.trials < 1) throw std::invalid_argument("config: sweep.trials must be at least 1");
  if (std::string v = take("sweep.master_seed"); !v.empty()) s.master_seed = std::stoull(v);
  if (std::string v = take("sweep.expect_ambiguous"); !v.empty()) {
    s.expect_ambiguous = (v == "true" || v == "1");
  }
  s.h_table_path = take("sweep.h_table_path");

  if (!kv.empty()) throw std::invalid_argument("config: unknown key " + kv.begin()->first);
  s.acq.validate();
  if (!s.expect_ambiguous) check_unambiguous(s);
  return s;
}

SweepSpec parse_sweep_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return parse_sweep_spec(in);
}

Estimate run_estimator(Method method, const Measurement& m, const Waveform& w,
                       const HTable* h) {
  switch (method) {
    case Method::Periodogram:
      return estimate_cbf(m, w, FreqEstimator::Periodogram);
    case Method::Lorentzian:
      return estimate_cbf(m, w, FreqEstimator::Lorentzian);
    case Method::Tsuchida:
      return tsuchida_estimate(m, w);
    case Method::MatchedFilter:
      return mf_distance(m, w);
    case Method::MatchedFilterJoint:
      return mf_joint(m, w);
    case Method::Iff: {
      IffOptions opt;
      opt.h_table = h;
      return iff_estimate(m, w, opt);
    }
  }
  throw std::invalid_argument("run_estimator: unknown method");
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, int jobs) {
  const Waveform w = spec.make_waveform();
  HTable h;
  if (!spec.h_table_path.empty()) h = read_h_table(spec.h_table_path);
  const bool needs_h =
      std::find(spec.methods.begin(), spec.methods.end(), Method::Iff) != spec.methods.end();
  if (needs_h && h.empty()) {
    throw MissingCalibration("sweep: method iff requires sweep.h_table_path; run `fmcw hfit` first");
  }

  struct Point { double d, v; std::size_t idx; };
  std::vector<Point> points;
  for (double d : spec.distances_m) {
    for (double v : spec.velocities_mps) {
      points.push_back({d, v, points.size()});
    }
  }
  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  std::vector<SweepRecord> records(points.size() * n_methods * n_trials);

  // Tasks are (point, trial); all methods share the same measurement so
  // comparisons see identical noise. Slot indexing fixes the row order
  // regardless of which worker finishes first.
  std::atomic<std::size_t> next{0};
  const std::size_t n_tasks = points.size() * n_trials;
  auto worker = [&]() {
    for (;;) {
      std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const Point& pt = points[task / n_trials];
      const std::size_t trial = task % n_trials;
      const std::uint64_t seed = derive_seed(spec.master_seed, pt.idx, trial);

      Target target{pt.d, pt.v};
      Measurement m = synth_measurement(w, spec.acq, target, seed);
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        SweepRecord r;
        r.distance_m = pt.d;
        r.velocity_mps = pt.v;
        r.method = spec.methods[mi];
        r.trial = static_cast<long>(trial);
        r.seed = seed;
        auto t0 = std::chrono::steady_clock::now();
        try {
          Estimate e = run_estimator(spec.methods[mi], m, w, &h);
          r.d_hat_m = e.d_hat;
          r.v_hat_mps = e.v_hat;
          r.abs_err_d_m = std::abs(e.d_hat - pt.d);
          r.abs_err_v_mps = std::abs(e.v_hat - pt.v);
          r.converged = e.converged;
        } catch (const std::exception&) {
          r.d_hat_m = std::numeric_limits<double>::quiet_NaN();
          r.v_hat_mps = std::numeric_limits<double>::quiet_NaN();
          r.abs_err_d_m = std::numeric_limits<double>::quiet_NaN();
          r.abs_err_v_mps = std::numeric_limits<double>::quiet_NaN();
          r.converged = false;
        }
        auto t1 = std::chrono::steady_clock::now();
        r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        records[(pt.idx * n_methods + mi) * n_trials + trial] = r;
      }
    }
  };

  int n_workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(n_tasks)));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  return records;
}

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRecord>& records) {
  std::vector<SweepSummaryRow> rows;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].distance_m == records[i].distance_m &&
           records[j].velocity_mps == records[i].velocity_mps &&
           records[j].method == records[i].method) {
      ++j;
    }
    SweepSummaryRow row;
    row.distance_m = records[i].distance_m;
    row.velocity_mps = records[i].velocity_mps;
    row.method = records[i].method;
    double sd = 0.0, sv = 0.0, se = 0.0, se2 = 0.0;
    long n = 0;
    for (std::size_t k = i; k < j; ++k) {
      if (!std::isfinite(records[k].d_hat_m)) continue;
      sd += records[k].abs_err_d_m * records[k].abs_err_d_m;
      sv += records[k].abs_err_v_mps * records[k].abs_err_v_mps;
      se += records[k].abs_err_d_m;
      se2 += records[k].abs_err_d_m * records[k].abs_err_d_m;
      ++n;
    }
    if (n > 0) {
      row.rmse_d = std::sqrt(sd / static_cast<double>(n));
      row.rmse_v = std::sqrt(sv / static_cast<double>(n));
      double mean = se / static_cast<double>(n);
      row.se_std = std::sqrt(std::max(0.0, se2 / static_cast<double>(n) - mean * mean));
    } else {
      row.rmse_d = row.rmse_v = row.se_std = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
    i = j;
  }
  return rows;
}

void write_records_csv(const std::string& path, const std::vector<SweepRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "distance_m,velocity_mps,method,trial,seed,d_hat_m,v_hat_mps,"
         "abs_err_d_m,abs_err_v_mps,runtime_ms,converged\n";
  out.precision(17);
  for (const SweepRecord& r : records) {
    out << r.distance_m << ',' << r.velocity_mps << ',' << to_string(r.method) << ','
        << r.trial << ',' << r.seed << ',' << r.d_hat_m << ',' << r.v_hat_mps << ','
        << r.abs_err_d_m << ',' << r.abs_err_v_mps << ',' << r.runtime_ms << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::vector<SweepSummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "distance_m,velocity_mps,method,rmse_d,rmse_v,se_std\n";
  out.precision(17);
  for (const SweepSummaryRow& r : rows) {
    out << r.distance_m << ',' << r.velocity_mps << ',' << to_string(r.method) << ','
        << r.rmse_d << ',' << r.rmse_v << ',' << r.se_std << '\n';
  }
}

}  // namespace fmcw
