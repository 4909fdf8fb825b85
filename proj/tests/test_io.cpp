#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fmcw/io.hpp"
#include "fmcw/sweep.hpp"

using namespace fmcw;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string base_scenario() {
  return "waveform.kind = triangular\n"
         "waveform.bandwidth_hz = 500e6\n"
         "waveform.chirp_duration_s = 2e-6\n"
         "acq.fs_hz = 200e6\n"
         "acq.num_samples = 800\n"
         "acq.linewidth_hz = 1e5\n"
         "target.d_m = 130\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("key-value reader: comments, duplicates, malformed lines") {
  std::istringstream ok("a.b = 1 # trailing comment\n\n# full comment\nc = two\n");
  auto kv = read_key_values(ok);
  CHECK(kv.at("a.b") == "1");
  CHECK(kv.at("c") == "two");

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_WITH_AS(read_key_values(dup), doctest::Contains("duplicate"), std::invalid_argument);
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(read_key_values(bad), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_double_value("1.5x", "some.key"), doctest::Contains("some.key"),
                       std::invalid_argument);
}

TEST_CASE("scenario round-trips through its canonical serialization") {
  ScenarioConfig c = parse_scenario_text(base_scenario() + "target.v_mps = -3.5\nseed = 99\n");
  CHECK(c.kind == WaveKind::Triangular);
  CHECK(c.bandwidth == 500e6);
  CHECK(c.acq.num_samples == 800);
  CHECK(c.target.velocity_mps == -3.5);
  CHECK(c.seed == 99);
  CHECK_FALSE(c.noiseless);

  ScenarioConfig r = parse_scenario_text(c.serialize());
  CHECK(r.serialize() == c.serialize());
}

TEST_CASE("scenario parser names missing and unknown keys") {
  std::string no_fs = "waveform.kind = triangular\nwaveform.bandwidth_hz = 500e6\n"
                      "waveform.chirp_duration_s = 2e-6\nacq.num_samples = 800\n"
                      "acq.linewidth_hz = 1e5\ntarget.d_m = 130\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(no_fs), doctest::Contains("acq.fs_hz"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_scenario_text(base_scenario() + "acq.bogus = 1\n"),
                       doctest::Contains("acq.bogus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_text(base_scenario() + "target.d_m = -5\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_text(base_scenario() + "noiseless = maybe\n"),
                  std::invalid_argument);
}

TEST_CASE("measurement files are byte-stable and lossless") {
  ScenarioConfig c = parse_scenario_text(base_scenario() + "seed = 7\n");
  Waveform w = c.make_waveform();
  Measurement m = synth_measurement(w, c.acq, c.target, c.seed, c.noiseless);

  std::string p1 = tmp_path("fmcw_io_test_a.bin"), p2 = tmp_path("fmcw_io_test_b.bin");
  write_measurement(p1, m, c);
  auto [m2, c2] = read_measurement(p1);
  REQUIRE(m2.u.size() == m.u.size());
  CHECK(m2.u == m.u);
  CHECK(m2.v_aux == m.v_aux);
  CHECK(c2.serialize() == c.serialize());

  // re-synthesizing from the echoed config reproduces the samples exactly
  Measurement m3 = synth_measurement(c2.make_waveform(), c2.acq, c2.target, c2.seed, c2.noiseless);
  CHECK(m3.u == m.u);

  write_measurement(p2, m2, c2);
  CHECK(read_file(p1) == read_file(p2));

  std::ofstream(p2, std::ios::binary) << "NOTMEAS";
  CHECK_THROWS_AS(read_measurement(p2), std::runtime_error);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("calibration table CSV keeps values and provenance") {
  HTable h({-20.0, 0.0, 20.0}, {5e-2, 1e-3, 1e-5}, 1234, 42);
  std::string p = tmp_path("fmcw_io_test_h.csv");
  write_h_table(p, h);
  HTable r = read_h_table(p);
  CHECK(r.grid_db() == h.grid_db());
  CHECK(r.variance() == h.variance());
  CHECK(r.samples_per_point() == 1234);
  CHECK(r.seed() == 42);
  std::remove(p.c_str());

  CHECK_THROWS_AS(read_h_table(tmp_path("fmcw_io_no_such_table.csv")), MissingCalibration);
}

TEST_CASE("waveform table CSV requires the header and round-trips") {
  std::string p = tmp_path("fmcw_io_test_w.csv");
  {
    std::ofstream out(p);
    out << "t_seconds,a_hz\n0,0\n1e-9,125\n2e-9,250\n";
  }
  auto rows = read_waveform_table(p);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].first == 1e-9);
  CHECK(rows[2].second == 250.0);
  {
    std::ofstream out(p);
    out << "0,0\n1e-9,125\n";
  }
  CHECK_THROWS_WITH_AS(read_waveform_table(p), doctest::Contains("header"), std::invalid_argument);
  std::remove(p.c_str());
}

TEST_CASE("sweep spec parsing and the ambiguity guard") {
  std::string base = "waveform.kind = triangular\nwaveform.bandwidth_hz = 500e6\n"
                     "waveform.chirp_duration_s = 2e-6\nacq.fs_hz = 200e6\n"
                     "acq.num_samples = 800\nacq.linewidth_hz = 1e5\n"
                     "sweep.methods = periodogram, mf\nsweep.trials = 3\n";
  {
    std::istringstream in(base + "sweep.distances_m = 10, 60, 110\n");
    SweepSpec s = parse_sweep_spec(in);
    CHECK(s.distances_m == std::vector<double>{10.0, 60.0, 110.0});
    CHECK(s.velocities_mps == std::vector<double>{0.0});
    REQUIRE(s.methods.size() == 2);
    CHECK(s.methods[0] == Method::Periodogram);
    CHECK(s.methods[1] == Method::MatchedFilter);
    CHECK(s.trials == 3);
  }
  {
    // 300 m is beyond the beat-frequency cell for periodogram
    std::istringstream in(base + "sweep.distances_m = 300\n");
    CHECK_THROWS_WITH_AS(parse_sweep_spec(in), doctest::Contains("ambiguous"),
                         std::invalid_argument);
  }
  {
    std::istringstream in(base + "sweep.distances_m = 300\nsweep.expect_ambiguous = true\n");
    CHECK_NOTHROW(parse_sweep_spec(in));
  }
}

TEST_CASE("sweeps are deterministic and independent of the worker count") {
  std::istringstream in(
      "waveform.kind = triangular\nwaveform.bandwidth_hz = 500e6\n"
      "waveform.chirp_duration_s = 2e-6\nacq.fs_hz = 200e6\n"
      "acq.num_samples = 800\nacq.linewidth_hz = 1e5\n"
      "sweep.methods = periodogram\nsweep.trials = 4\n"
      "sweep.distances_m = 30, 60\nsweep.master_seed = 5\n");
  SweepSpec s = parse_sweep_spec(in);
  auto r1 = run_sweep(s, 1);
  auto r4 = run_sweep(s, 4);
  REQUIRE(r1.size() == 8);
  REQUIRE(r4.size() == 8);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].d_hat_m == r4[i].d_hat_m);
    CHECK(r1[i].seed == r4[i].seed);
    CHECK(r1[i].distance_m == r4[i].distance_m);
  }
  // per-trial seeds are unique within a point and differ across points
  CHECK(r1[0].seed != r1[1].seed);
  CHECK(r1[0].seed != r1[4].seed);

  auto rows = summarize(r1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].distance_m == 30.0);
  CHECK(rows[0].rmse_d < 0.05);

  // single-trial summary: rmse equals the absolute error, spread is zero
  SweepSpec s1 = s;
  s1.trials = 1;
  auto one = run_sweep(s1, 1);
  auto srows = summarize(one);
  REQUIRE(srows.size() == 2);
  CHECK(srows[0].rmse_d == doctest::Approx(one[0].abs_err_d_m).epsilon(1e-15));
  CHECK(srows[0].se_std == 0.0);

  // iff without a calibration table is a hard error
  SweepSpec bad = s;
  bad.methods = {Method::Iff};
  CHECK_THROWS_AS(run_sweep(bad, 1), MissingCalibration);
}
