#ifndef FMCW_IO_HPP
#define FMCW_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fmcw/iff.hpp"
#include "fmcw/signal_model.hpp"
#include "fmcw/waveform.hpp"

namespace fmcw {

/// Parsed scenario: waveform description, acquisition settings, target
/// truth, and synthesis controls.
struct ScenarioConfig {
  WaveKind kind = WaveKind::Triangular;
  double bandwidth = 0.0;
  double chirp_duration = 0.0;
  double center_frequency = AcquisitionConfig::kSpeedOfLight / 1.55e-6;
  std::string table_path;  // tabulated waveforms only
  AcquisitionConfig acq;
  Target target;
  std::uint64_t seed = 0;
  bool noiseless = false;

  Waveform make_waveform() const;  // reads table_path when tabulated
  std::string serialize() const;   // canonical key = value text
};

/// Flat `key = value` lines into a map; `#` starts a comment. Raises
/// std::invalid_argument on malformed or duplicate lines.
std::map<std::string, std::string> read_key_values(std::istream& in);

/// Numeric parse that rejects trailing text, naming the key on failure.
double parse_double_value(const std::string& value, const std::string& key);

/// Flat `key = value` text with dotted sections; `#` starts a comment.
/// Unknown keys and malformed lines raise std::invalid_argument naming
/// the offending line.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text);

/// Binary measurement container: 16-byte magic+version, embedded config
/// text block, then little-endian float64 interleaved (re, im) samples
/// for u followed by v_aux.
void write_measurement(const std::string& path, const Measurement& m,
                       const ScenarioConfig& cfg);
std::pair<Measurement, ScenarioConfig> read_measurement(const std::string& path);

/// Calibration table CSV `snr_db,variance` preceded by a provenance
/// comment recording samples_per_point and seed.
void write_h_table(const std::string& path, const HTable& h);
HTable read_h_table(const std::string& path);

/// Two-column waveform CSV `t_seconds,a_hz` with a mandatory header row.
std::vector<std::pair<double, double>> read_waveform_table(const std::string& path);

}  // namespace fmcw

#endif
