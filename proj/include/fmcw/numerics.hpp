#ifndef FMCW_NUMERICS_HPP
#define FMCW_NUMERICS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace fmcw {

using cplx = std::complex<double>;

/// Centered modulo: wraps x into the half-open interval (-r/2, r/2].
/// Throws std::invalid_argument for non-finite x or r <= 0.
double centered_modulo(double x, double r);

/// Forward DFT (no normalization). Any length >= 1.
std::vector<cplx> fft_forward(std::span<const cplx> x);

/// Inverse DFT, scaled by 1/N.
std::vector<cplx> fft_inverse(std::span<const cplx> x);

/// Band-limited interpolation by zero-padding the discrete spectrum.
/// Output has length factor*N and satisfies y[factor*n] == x[n] up to
/// round-off. factor == 1 returns the input unchanged.
std::vector<cplx> upsample_fourier(std::span<const cplx> x, int factor);

struct OptimResult {
  std::vector<double> point;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Bounded scalar maximization (Brent-style bracketed search on the
/// negated objective). Requires lo < x0 < hi and tol > 0. If the
/// objective returns a non-finite value the search stops and the last
/// valid point is returned with converged = false.
OptimResult maximize_scalar_bounded(const std::function<double(double)>& objective,
                                    double lo, double hi, double x0, double tol,
                                    int max_iter = 200);

/// Nelder-Mead maximization inside a box. Vertices leaving the box are
/// clipped back onto it.
OptimResult maximize_simplex(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0,
                             std::span<const double> lower,
                             std::span<const double> upper,
                             double tol, int max_iter = 500);

struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// BFGS maximization with Armijo backtracking line search (sufficient
/// increase, shrink factor 0.5, initial step 1). On line-search failure
/// the best point seen so far is returned with converged = false.
OptimResult maximize_quasi_newton(const std::function<ValueGrad(std::span<const double>)>& objective,
                                  std::span<const double> x0, double tol,
                                  int max_iter = 200);

/// splitmix64 hash step; used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for (stream, index) pairs under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace fmcw

#endif
