#include "fmcw/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fmcw {

namespace {

constexpr char kMagic[12] = {'F', 'M', 'C', 'W', 'M', 'E', 'A', 'S', 'v', '0', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_double_value(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: invalid number for " + key + ": " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("config: trailing text for " + key + ": " + v);
  return x;
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw std::invalid_argument("config: empty key or value at line " + std::to_string(lineno));
    }
    if (!kv.emplace(key, val).second) {
      throw std::invalid_argument("config: duplicate key " + key);
    }
  }
  return kv;
}

namespace {

void put_le_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_le_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_le_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_le_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_le_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_le_u64(out, bits);
}

double get_le_f64(std::istream& in) {
  std::uint64_t bits = get_le_u64(in);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

Waveform ScenarioConfig::make_waveform() const {
  switch (kind) {
    case WaveKind::Triangular:
      return Waveform::triangular(bandwidth, chirp_duration, center_frequency);
    case WaveKind::Sinusoidal:
      return Waveform::sinusoidal(bandwidth, chirp_duration, center_frequency);
    case WaveKind::SmoothStair:
      return Waveform::smooth_stair(bandwidth, chirp_duration, center_frequency);
    case WaveKind::Tabulated:
      if (table_path.empty()) {
        throw std::invalid_argument("config: waveform.table_path required for tabulated kind");
      }
      return Waveform::tabulated(read_waveform_table(table_path), bandwidth,
                                 chirp_duration, center_frequency);
  }
  throw std::invalid_argument("config: unknown waveform kind");
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream os;
  os << "waveform.kind = " << to_string(kind) << "\n"
     << "waveform.bandwidth_hz = " << fmt(bandwidth) << "\n"
     << "waveform.chirp_duration_s = " << fmt(chirp_duration) << "\n"
     << "waveform.center_frequency_hz = " << fmt(center_frequency) << "\n";
  if (!table_path.empty()) os << "waveform.table_path = " << table_path << "\n";
  os << "acq.fs_hz = " << fmt(acq.fs) << "\n"
     << "acq.num_samples = " << acq.num_samples << "\n"
     << "acq.linewidth_hz = " << fmt(acq.linewidth) << "\n"
     << "acq.p_tx_w = " << fmt(acq.p_tx) << "\n"
     << "acq.p_lo_w = " << fmt(acq.p_lo) << "\n"
     << "acq.aperture_m2 = " << fmt(acq.aperture_m2) << "\n"
     << "acq.reflectivity = " << fmt(acq.reflectivity) << "\n"
     << "acq.responsivity = " << fmt(acq.responsivity) << "\n"
     << "target.d_m = " << fmt(target.distance_m) << "\n"
     << "target.v_mps = " << fmt(target.velocity_mps) << "\n"
     << "seed = " << seed << "\n"
     << "noiseless = " << (noiseless ? "true" : "false") << "\n";
  return os.str();
}

ScenarioConfig parse_scenario(std::istream& in) {
  auto kv = read_key_values(in);
  ScenarioConfig c;

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

  c.kind = wave_kind_from_string(require("waveform.kind"));
  c.bandwidth = parse_double_value(require("waveform.bandwidth_hz"), "waveform.bandwidth_hz");
  c.chirp_duration = parse_double_value(require("waveform.chirp_duration_s"), "waveform.chirp_duration_s");
  if (std::string v = take("waveform.center_frequency_hz"); !v.empty()) {
    c.center_frequency = parse_double_value(v, "waveform.center_frequency_hz");
  }
  c.table_path = take("waveform.table_path");

  c.acq.fs = parse_double_value(require("acq.fs_hz"), "acq.fs_hz");
  c.acq.num_samples = static_cast<long>(parse_double_value(require("acq.num_samples"), "acq.num_samples"));
  c.acq.linewidth = parse_double_value(require("acq.linewidth_hz"), "acq.linewidth_hz");
  if (std::string v = take("acq.p_tx_w"); !v.empty()) c.acq.p_tx = parse_double_value(v, "acq.p_tx_w");
  if (std::string v = take("acq.p_lo_w"); !v.empty()) c.acq.p_lo = parse_double_value(v, "acq.p_lo_w");
  if (std::string v = take("acq.aperture_m2"); !v.empty()) {
    c.acq.aperture_m2 = parse_double_value(v, "acq.aperture_m2");
  }
  if (std::string v = take("acq.reflectivity"); !v.empty()) {
    c.acq.reflectivity = parse_double_value(v, "acq.reflectivity");
  }
  if (std::string v = take("acq.responsivity"); !v.empty()) {
    c.acq.responsivity = parse_double_value(v, "acq.responsivity");
  }

  c.target.distance_m = parse_double_value(require("target.d_m"), "target.d_m");
  if (std::string v = take("target.v_mps"); !v.empty()) {
    c.target.velocity_mps = parse_double_value(v, "target.v_mps");
  }
  if (std::string v = take("seed"); !v.empty()) c.seed = std::stoull(v);
  if (std::string v = take("noiseless"); !v.empty()) {
    if (v == "true" || v == "1") c.noiseless = true;
    else if (v == "false" || v == "0") c.noiseless = false;
    else throw std::invalid_argument("config: noiseless must be true/false");
  }

  if (!kv.empty()) throw std::invalid_argument("config: unknown key " + kv.begin()->first);
  c.acq.validate();
  if (!(c.target.distance_m > 0.0)) throw std::invalid_argument("config: target.d_m must be positive");
  if (c.bandwidth <= 0.0 || c.chirp_duration <= 0.0) {
    throw std::invalid_argument("config: waveform.bandwidth_hz and waveform.chirp_duration_s must be positive");
  }
  return c;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return parse_scenario(in);
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

void write_measurement(const std::string& path, const Measurement& m,
                       const ScenarioConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_le_u32(out, kVersion);
  std::string echo = cfg.serialize();
  put_le_u64(out, echo.size());
  out.write(echo.data(), static_cast<std::streamsize>(echo.size()));
  put_le_u64(out, m.u.size());
  for (const cplx& x : m.u) {
    put_le_f64(out, x.real());
    put_le_f64(out, x.imag());
  }
  for (const cplx& x : m.v_aux) {
    put_le_f64(out, x.real());
    put_le_f64(out, x.imag());
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<Measurement, ScenarioConfig> read_measurement(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a measurement file: " + path);
  }
  if (get_le_u32(in) != kVersion) throw std::runtime_error("unsupported measurement version");
  std::uint64_t len = get_le_u64(in);
  std::string echo(len, '\0');
  in.read(echo.data(), static_cast<std::streamsize>(len));
  ScenarioConfig cfg = parse_scenario_text(echo);
  std::uint64_t n = get_le_u64(in);

  Measurement m;
  m.config = cfg.acq;
  m.seed = cfg.seed;
  m.u.resize(n);
  m.v_aux.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    double re = get_le_f64(in), im = get_le_f64(in);
    m.u[i] = cplx(re, im);
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    double re = get_le_f64(in), im = get_le_f64(in);
    m.v_aux[i] = cplx(re, im);
  }
  if (!in) throw std::runtime_error("truncated measurement file: " + path);
  return {std::move(m), std::move(cfg)};
}

void write_h_table(const std::string& path, const HTable& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# samples_per_point=" << h.samples_per_point() << " seed=" << h.seed() << "\n";
  out << "snr_db,variance\n";
  out.precision(17);
  for (std::size_t i = 0; i < h.grid_db().size(); ++i) {
    out << h.grid_db()[i] << "," << h.variance()[i] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

HTable read_h_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCalibration("cannot open calibration table: " + path);
  std::string line;
  long samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> grid, var;
  bool header_seen = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::size_t sp = t.find("samples_per_point=");
      if (sp != std::string::npos) samples = std::stol(t.substr(sp + 18));
      std::size_t sd = t.find("seed=");
      if (sd != std::string::npos) seed = std::stoull(t.substr(sd + 5));
      continue;
    }
    if (!header_seen) {
      if (t != "snr_db,variance") {
        throw std::invalid_argument("calibration table: expected header snr_db,variance");
      }
      header_seen = true;
      continue;
    }
    std::size_t comma = t.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("calibration table: malformed row: " + t);
    }
    grid.push_back(parse_double_value(trim(t.substr(0, comma)), "snr_db"));
    var.push_back(parse_double_value(trim(t.substr(comma + 1)), "variance"));
  }
  if (grid.empty()) throw MissingCalibration("calibration table is empty: " + path);
  return HTable(std::move(grid), std::move(var), samples, seed);
}

std::vector<std::pair<double, double>> read_waveform_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("waveform table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t_seconds,a_hz") {
    throw std::invalid_argument("waveform table: expected header t_seconds,a_hz");
  }
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t comma = t.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("waveform table: malformed row: " + t);
    }
    rows.emplace_back(parse_double_value(trim(t.substr(0, comma)), "t_seconds"),
                      parse_double_value(trim(t.substr(comma + 1)), "a_hz"));
  }
  return rows;
}

}  // namespace fmcw
