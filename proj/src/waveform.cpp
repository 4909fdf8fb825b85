#include "fmcw/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmcw/numerics.hpp"

namespace fmcw {

std::string to_string(WaveKind k) {
  switch (k) {
    case WaveKind::Triangular: return "triangular";
    case WaveKind::Sinusoidal: return "sinusoidal";
    case WaveKind::SmoothStair: return "smooth_stair";
    case WaveKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

WaveKind wave_kind_from_string(const std::string& s) {
  if (s == "triangular") return WaveKind::Triangular;
  if (s == "sinusoidal") return WaveKind::Sinusoidal;
  if (s == "smooth_stair" || s == "smoothstair") return WaveKind::SmoothStair;
  if (s == "tabulated") return WaveKind::Tabulated;
  throw std::invalid_argument("unknown waveform kind: " + s);
}

namespace {

// Smooth-stair shape constants relative to B and T.
constexpr double kStairT0 = 0.1;      // t0 = T/10
constexpr double kStairC1 = 13.68;    // c1 = 13.68 * B / T^2
constexpr double kStairC2 = -0.069;   // c2 = -0.069 * B
constexpr double kStairC3 = 30.0;     // c3 = 30 / T

double reduce_period(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  return r;
}

}  // namespace

Waveform Waveform::triangular(double bandwidth, double chirp_duration,
                              double center_frequency) {
  if (bandwidth <= 0.0 || chirp_duration <= 0.0) {
    throw std::invalid_argument("waveform: B and T must be positive");
  }
  Waveform w;
  w.kind_ = WaveKind::Triangular;
  w.bandwidth_ = bandwidth;
  w.chirp_ = chirp_duration;
  w.fc_ = center_frequency;
  w.mean_dev_ = 0.0;
  return w;
}

Waveform Waveform::sinusoidal(double bandwidth, double chirp_duration,
                              double center_frequency) {
  Waveform w = triangular(bandwidth, chirp_duration, center_frequency);
  w.kind_ = WaveKind::Sinusoidal;
  return w;
}

Waveform Waveform::smooth_stair(double bandwidth, double chirp_duration,
                                double center_frequency) {
  Waveform w = triangular(bandwidth, chirp_duration, center_frequency);
  w.kind_ = WaveKind::SmoothStair;
  // The frequency deviation spans [0, B] with period average exactly B/2.
  w.mean_dev_ = 0.5 * bandwidth;
  return w;
}

Waveform Waveform::tabulated(std::vector<std::pair<double, double>> table,
                             double bandwidth, double chirp_duration,
                             double center_frequency) {
  Waveform w = triangular(bandwidth, chirp_duration, center_frequency);
  w.kind_ = WaveKind::Tabulated;
  const double period = 2.0 * chirp_duration;
  if (table.size() < 3) throw std::invalid_argument("tabulated waveform: too few rows");
  const double max_step = 1.0 / (4.0 * bandwidth);
  w.tab_t_.reserve(table.size());
  w.tab_a_.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i > 0) {
      double dt = table[i].first - table[i - 1].first;
      if (dt <= 0.0) throw std::invalid_argument("tabulated waveform: t must be strictly increasing");
      if (dt > max_step * (1.0 + 1e-9)) {
        throw std::invalid_argument("tabulated waveform: step exceeds 1/(4B)");
      }
    }
    w.tab_t_.push_back(table[i].first);
    w.tab_a_.push_back(table[i].second - center_frequency);
  }
  if (w.tab_t_.front() > 1e-12 * period || w.tab_t_.back() < period * (1.0 - 1e-9)) {
    throw std::invalid_argument("tabulated waveform: table must cover [0, 2T]");
  }
  // Cumulative trapezoid of the deviation.
  w.tab_int_.assign(w.tab_t_.size(), 0.0);
  for (std::size_t i = 1; i < w.tab_t_.size(); ++i) {
    double dt = w.tab_t_[i] - w.tab_t_[i - 1];
    w.tab_int_[i] = w.tab_int_[i - 1] + 0.5 * (w.tab_a_[i] + w.tab_a_[i - 1]) * dt;
  }
  w.mean_dev_ = w.tab_int_.back() / (w.tab_t_.back() - w.tab_t_.front());
  return w;
}

double Waveform::mean_freq() const { return fc_ + mean_dev_; }

double Waveform::baseband_raw(double t) const {
  const double T = chirp_;
  const double B = bandwidth_;
  switch (kind_) {
    case WaveKind::Triangular:
      return (t < T) ? (B / T) * (t - 0.5 * T) : -(B / T) * (t - 1.5 * T);
    case WaveKind::Sinusoidal:
      return -0.5 * B * std::cos(M_PI * t / T);
    case WaveKind::SmoothStair: {
      const double t0 = kStairT0 * T;
      const double c1 = kStairC1 * B / (T * T);
      const double c2 = kStairC2 * B;
      const double c3 = kStairC3 / T;
      if (t <= t0) return c1 * t * t;
      if (t <= T - t0) return (B / T) * t - c2 * std::sin(c3 * (t - 0.5 * T));
      if (t <= T + t0) return B - c1 * (t - T) * (t - T);
      if (t <= 2.0 * T - t0) return (B / T) * (2.0 * T - t) - c2 * std::sin(c3 * (1.5 * T - t));
      return c1 * (t - 2.0 * T) * (t - 2.0 * T);
    }
    case WaveKind::Tabulated: {
      auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
      std::size_t i = (it == tab_t_.begin()) ? 1 : std::min<std::size_t>(it - tab_t_.begin(), tab_t_.size() - 1);
      double w1 = (t - tab_t_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
      return tab_a_[i - 1] * (1.0 - w1) + tab_a_[i] * w1;
    }
  }
  return 0.0;
}

double Waveform::eval(double t) const {
  return fc_ + baseband_raw(reduce_period(t, 2.0 * chirp_));
}

double Waveform::baseband(double t) const {
  return baseband_raw(reduce_period(t, 2.0 * chirp_)) - mean_dev_;
}

double Waveform::slope(double t) const {
  const double T = chirp_;
  const double B = bandwidth_;
  double r = reduce_period(t, 2.0 * T);
  switch (kind_) {
    case WaveKind::Triangular:
      return (r < T) ? B / T : -B / T;
    case WaveKind::Sinusoidal:
      return (0.5 * B * M_PI / T) * std::sin(M_PI * r / T);
    case WaveKind::SmoothStair: {
      const double t0 = kStairT0 * T;
      const double c1 = kStairC1 * B / (T * T);
      const double c2 = kStairC2 * B;
      const double c3 = kStairC3 / T;
      if (r < t0) return 2.0 * c1 * r;
      if (r < T - t0) return B / T - c2 * c3 * std::cos(c3 * (r - 0.5 * T));
      if (r < T + t0) return -2.0 * c1 * (r - T);
      if (r < 2.0 * T - t0) return -B / T + c2 * c3 * std::cos(c3 * (1.5 * T - r));
      return 2.0 * c1 * (r - 2.0 * T);
    }
    case WaveKind::Tabulated: {
      auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), r);
      std::size_t i = (it == tab_t_.begin()) ? 1 : std::min<std::size_t>(it - tab_t_.begin(), tab_t_.size() - 1);
      return (tab_a_[i] - tab_a_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
    }
  }
  return 0.0;
}

double Waveform::integral_raw(double t) const {
  const double T = chirp_;
  const double B = bandwidth_;
  switch (kind_) {
    case WaveKind::Triangular: {
      if (t <= T) return (B / (2.0 * T)) * t * t - 0.5 * B * t;
      // integral over [0, T] is zero; continue on the down-chirp
      double s = t - 1.5 * T;
      return (B / (2.0 * T)) * (0.25 * T * T - s * s);
    }
    case WaveKind::Sinusoidal:
      return -(B * T / (2.0 * M_PI)) * std::sin(M_PI * t / T);
    case WaveKind::SmoothStair: {
      const double t0 = kStairT0 * T;
      const double c1 = kStairC1 * B / (T * T);
      const double c2 = kStairC2 * B;
      const double c3 = kStairC3 / T;
      auto seg1 = [&](double x) { return c1 * x * x * x / 3.0; };
      const double A1 = seg1(t0);
      auto seg2 = [&](double x) {
        return A1 + (B / (2.0 * T)) * (x * x - t0 * t0) +
               (c2 / c3) * (std::cos(c3 * (x - 0.5 * T)) - std::cos(c3 * (t0 - 0.5 * T)));
      };
      const double A2 = seg2(T - t0);
      auto seg3 = [&](double x) {
        double s = x - T;
        return A2 + B * (s + t0) - (c1 / 3.0) * (s * s * s + t0 * t0 * t0);
      };
      const double A3 = seg3(T + t0);
      auto seg4 = [&](double x) {
        double lo = T + t0;
        return A3 + (B / T) * (2.0 * T * (x - lo) - 0.5 * (x * x - lo * lo)) -
               (c2 / c3) * (std::cos(c3 * (1.5 * T - x)) - std::cos(c3 * (0.5 * T - t0)));
      };
      const double A4 = seg4(2.0 * T - t0);
      auto seg5 = [&](double x) {
        double s = x - 2.0 * T;
        return A4 + (c1 / 3.0) * (s * s * s + t0 * t0 * t0);
      };
      if (t <= t0) return seg1(t);
      if (t <= T - t0) return seg2(t);
      if (t <= T + t0) return seg3(t);
      if (t <= 2.0 * T - t0) return seg4(t);
      return seg5(t);
    }
    case WaveKind::Tabulated: {
      auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
      std::size_t i = (it == tab_t_.begin()) ? 1 : std::min<std::size_t>(it - tab_t_.begin(), tab_t_.size() - 1);
      double dt = t - tab_t_[i - 1];
      double w1 = dt / (tab_t_[i] - tab_t_[i - 1]);
      double a_here = tab_a_[i - 1] * (1.0 - w1) + tab_a_[i] * w1;
      return tab_int_[i - 1] + 0.5 * (tab_a_[i - 1] + a_here) * dt;
    }
  }
  return 0.0;
}

double Waveform::phase_integral(double t) const {
  const double period = 2.0 * chirp_;
  // Whole periods integrate to zero for the mean-removed deviation.
  double r = reduce_period(t, period);
  double cycles_in = std::floor(t / period);
  (void)cycles_in;
  return integral_raw(r) - mean_dev_ * r;
}

double Waveform::transmitted_phase(double t) const {
  return 2.0 * M_PI * (mean_freq() * t + phase_integral(t));
}

double Waveform::wrapped_if(double tau, double f, double fs, double t) const {
  double g = baseband(t) - baseband(t - tau) + f;
  return centered_modulo(g, fs) / fs;
}

}  // namespace fmcw
