#include "fmcw/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>

namespace fmcw {

double centered_modulo(double x, double r) {
  if (!std::isfinite(x) || !std::isfinite(r) || r <= 0.0) {
    throw std::invalid_argument("centered_modulo: x must be finite and r > 0");
  }
  double y = x - r * std::ceil(x / r - 0.5);
  // Guard against round-off landing exactly on the open boundary.
  if (y <= -0.5 * r) y += r;
  if (y > 0.5 * r) y -= r;
  return y;
}

namespace {

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cplx> run_dft(std::span<const cplx> x, int sign) {
  if (x.empty()) throw std::invalid_argument("fft: empty input");
  const std::size_t n = x.size();
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out(n);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<cplx> fft_forward(std::span<const cplx> x) { return run_dft(x, FFTW_FORWARD); }

std::vector<cplx> fft_inverse(std::span<const cplx> x) {
  std::vector<cplx> out = run_dft(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<cplx> upsample_fourier(std::span<const cplx> x, int factor) {
  if (x.size() < 1) throw std::invalid_argument("upsample_fourier: empty input");
  if (factor < 1) throw std::invalid_argument("upsample_fourier: factor must be >= 1");
  if (factor == 1) return std::vector<cplx>(x.begin(), x.end());
  if (x.size() < 2) throw std::invalid_argument("upsample_fourier: need at least 2 samples");

  const std::size_t n = x.size();
  const std::size_t m = n * static_cast<std::size_t>(factor);
  std::vector<cplx> spec = fft_forward(x);
  std::vector<cplx> padded(m, cplx{0.0, 0.0});
  if (n % 2 == 0) {
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < half; ++k) padded[k] = spec[k];
    for (std::size_t k = half + 1; k < n; ++k) padded[m - n + k] = spec[k];
    // Split the Nyquist bin symmetrically to keep the interpolant real
    // for real inputs.
    padded[half] = 0.5 * spec[half];
    padded[m - half] = 0.5 * spec[half];
  } else {
    const std::size_t half = (n - 1) / 2;
    for (std::size_t k = 0; k <= half; ++k) padded[k] = spec[k];
    for (std::size_t k = half + 1; k < n; ++k) padded[m - n + k] = spec[k];
  }
  std::vector<cplx> y = fft_inverse(padded);
  for (auto& v : y) v *= static_cast<double>(factor);
  return y;
}

OptimResult maximize_scalar_bounded(const std::function<double(double)>& objective,
                                    double lo, double hi, double x0, double tol,
                                    int max_iter) {
  if (!(lo < x0 && x0 < hi)) throw std::invalid_argument("maximize_scalar_bounded: need lo < x0 < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("maximize_scalar_bounded: tol must be positive");

  auto f = [&](double x) { return -objective(x); };

  // Brent's local minimization on the negated objective.
  const double golden = 0.3819660112501051;
  double a = lo, b = hi;
  double x = x0, w = x0, v = x0;
  double fx = f(x);
  if (!std::isfinite(fx)) {
    return {{x0}, objective(x0), 0, false};
  }
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-300;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      return {{x}, -fx, iter, true};
    }
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    if (!std::isfinite(fu)) {
      return {{x}, -fx, iter, false};
    }
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {{x}, -fx, iter, false};
}

namespace {

void clip_to_box(std::vector<double>& x, std::span<const double> lower,
                 std::span<const double> upper) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
}

}  // namespace

OptimResult maximize_simplex(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0,
                             std::span<const double> lower,
                             std::span<const double> upper,
                             double tol, int max_iter) {
  const std::size_t dim = x0.size();
  if (lower.size() != dim || upper.size() != dim) {
    throw std::invalid_argument("maximize_simplex: bounds dimension mismatch");
  }
  auto f = [&](std::span<const double> p) { return -objective(p); };

  // Initial simplex: perturb each coordinate by 5% of the box extent.
  std::vector<std::vector<double>> pts(dim + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < dim; ++i) {
    double step = 0.05 * (upper[i] - lower[i]);
    if (step == 0.0) step = 1e-8;
    pts[i + 1][i] = std::clamp(pts[i + 1][i] + step, lower[i], upper[i]);
    if (pts[i + 1][i] == pts[0][i]) pts[i + 1][i] = std::clamp(pts[0][i] - step, lower[i], upper[i]);
  }
  std::vector<double> fvals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) fvals[i] = f(pts[i]);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // Order vertices by objective (ascending in minimization).
    std::vector<std::size_t> idx(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    {
      std::vector<std::vector<double>> p2(dim + 1);
      std::vector<double> f2(dim + 1);
      for (std::size_t i = 0; i <= dim; ++i) { p2[i] = pts[idx[i]]; f2[i] = fvals[idx[i]]; }
      pts.swap(p2);
      fvals.swap(f2);
    }
    if (std::abs(fvals[dim] - fvals[0]) <= tol * (std::abs(fvals[0]) + tol)) {
      return {pts[0], -fvals[0], iter, true};
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += pts[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(dim);

    auto blend = [&](double coef) {
      std::vector<double> p(dim);
      for (std::size_t j = 0; j < dim; ++j) p[j] = centroid[j] + coef * (centroid[j] - pts[dim][j]);
      clip_to_box(p, lower, upper);
      return p;
    };

    std::vector<double> xr = blend(alpha);
    double fr = f(xr);
    if (fr < fvals[0]) {
      std::vector<double> xe = blend(gamma);
      double fe = f(xe);
      if (fe < fr) { pts[dim] = std::move(xe); fvals[dim] = fe; }
      else { pts[dim] = std::move(xr); fvals[dim] = fr; }
    } else if (fr < fvals[dim - 1]) {
      pts[dim] = std::move(xr); fvals[dim] = fr;
    } else {
      std::vector<double> xc = blend(-rho);
      double fc = f(xc);
      if (fc < fvals[dim]) { pts[dim] = std::move(xc); fvals[dim] = fc; }
      else {
        for (std::size_t i = 1; i <= dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j) {
            pts[i][j] = pts[0][j] + shrink * (pts[i][j] - pts[0][j]);
          }
          clip_to_box(pts[i], lower, upper);
          fvals[i] = f(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i) if (fvals[i] < fvals[best]) best = i;
  return {pts[best], -fvals[best], iter, false};
}

OptimResult maximize_quasi_newton(const std::function<ValueGrad(std::span<const double>)>& objective,
                                  std::span<const double> x0, double tol, int max_iter) {
  const std::size_t dim = x0.size();
  std::vector<double> x(x0.begin(), x0.end());
  ValueGrad cur = objective(x);
  if (cur.grad.size() != dim) throw std::invalid_argument("maximize_quasi_newton: gradient dimension mismatch");

  // Inverse Hessian approximation, starts as identity.
  std::vector<double> hinv(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) hinv[i * dim + i] = 1.0;

  std::vector<double> best_x = x;
  double best_val = cur.value;

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double gnorm = 0.0;
    for (double g : cur.grad) gnorm = std::max(gnorm, std::abs(g));
    if (gnorm < tol) {
      return {x, cur.value, iter, true};
    }

    // Ascent direction p = Hinv * grad.
    std::vector<double> p(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) p[i] += hinv[i * dim + j] * cur.grad[j];
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < dim; ++i) slope += p[i] * cur.grad[i];
    if (!(slope > 0.0)) {
      // Reset to steepest ascent if the approximation lost positive
      // definiteness.
      p = cur.grad;
      slope = 0.0;
      for (double g : cur.grad) slope += g * g;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) hinv[i * dim + j] = (i == j) ? 1.0 : 0.0;
    }

    const double c1 = 1e-4;
    double step = 1.0;
    ValueGrad next;
    std::vector<double> xn(dim);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < dim; ++i) xn[i] = x[i] + step * p[i];
      next = objective(xn);
      if (std::isfinite(next.value) && next.value >= cur.value + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      return {best_x, best_val, iter, false};
    }

    // BFGS update of the inverse Hessian (note: ascent on f is descent
    // on -f, so y uses the negated gradient difference).
    std::vector<double> s(dim), y(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = cur.grad[i] - next.grad[i];
    }
    double sy = 0.0;
    for (std::size_t i = 0; i < dim; ++i) sy += s[i] * y[i];
    double ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < dim; ++i) { ss += s[i] * s[i]; yy += y[i] * y[i]; }
    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      const double rho = 1.0 / sy;
      std::vector<double> hy(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) hy[i] += hinv[i * dim + j] * y[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < dim; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
          hinv[i * dim + j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                             - rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
      }
    }

    double move = 0.0;
    for (std::size_t i = 0; i < dim; ++i) move = std::max(move, std::abs(s[i]));
    x = xn;
    cur = std::move(next);
    if (cur.value > best_val) { best_val = cur.value; best_x = x; }
    if (move < tol) {
      return {x, cur.value, iter + 1, true};
    }
  }
  return {best_x, best_val, iter, false};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ 0xA5A5A5A5DEADBEEFULL) ^ splitmix64(stream * 0x9E3779B97F4A7C15ULL + index));
}

}  // namespace fmcw
