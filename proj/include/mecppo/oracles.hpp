#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecppo/noma.hpp"

// Independent brute-force verifiers. These share no code paths with the
// solvers they check; the CLI exposes them through `verify` subcommands.
namespace mecppo::oracles {

struct OracleReport {
  double value = 0;
  double target = 0;
  double abs_error = 0;
  double rel_error = 0;
  bool pass = false;
  std::string resolution;
};

inline OracleReport make_report(double value, double target, double tol,
                                std::string resolution = {}) {
  OracleReport r;
  r.value = value;
  r.target = target;
  r.abs_error = std::abs(value - target);
  double scale = std::max({std::abs(value), std::abs(target), 1e-300});
  r.rel_error = r.abs_error / scale;
  r.pass = r.rel_error <= tol;
  r.resolution = std::move(resolution);
  return r;
}

// Plain bisection for a monotone sign change on [lo, hi].
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo < 0 && fhi > 0))
    throw std::invalid_argument("bisect_root: root not bracketed");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at floating-point floor
    if (f(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct GridResult {
  std::vector<double> argmin;
  double min = 0;
};

// Exhaustive grid scan over a box; feasibility is the caller's predicate.
inline std::optional<GridResult> grid_search(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<bool(std::span<const double>)>& feasible,
    std::span<const double> lo, std::span<const double> hi, int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid_search: resolution < 2");
  std::size_t dim = lo.size();
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim);
  std::optional<GridResult> best;
  for (;;) {
    for (std::size_t d = 0; d < dim; ++d)
      x[d] = lo[d] + (hi[d] - lo[d]) * idx[d] / (resolution - 1);
    if (feasible(x)) {
      double v = objective(x);
      if (!best || v < best->min) best = GridResult{x, v};
    }
    std::size_t d = 0;
    while (d < dim && ++idx[d] == resolution) idx[d++] = 0;
    if (d == dim) break;
  }
  return best;
}

// Central differences per coordinate.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_difference_gradient: h <= 0");
  std::vector<double> grad(x.size());
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t d = 0; d < x.size(); ++d) {
    double x0 = xp[d];
    xp[d] = x0 + h;
    double fp = f(xp);
    xp[d] = x0 - h;
    double fm = f(xp);
    xp[d] = x0;
    grad[d] = (fp - fm) / (2 * h);
  }
  return grad;
}

// Closed-form minimum powers followed by the decode-order rate formula must
// reproduce each position's load over the horizon T.
inline OracleReport roundtrip_check(std::span<const double> loads,
                                    std::span<const double> gains, double w,
                                    double n0, double T) {
  auto powers = noma::min_powers_for_time(loads, gains, w, n0, T);
  double worst = 0;
  for (std::size_t l = 0; l < loads.size(); ++l) {
    double delivered = noma::achievable_rate(powers, gains, w, n0, l) * T;
    double scale = std::max(std::abs(loads[l]), 1.0);
    worst = std::max(worst, std::abs(delivered - loads[l]) / scale);
  }
  OracleReport r;
  r.value = worst;
  r.target = 0;
  r.abs_error = worst;
  r.rel_error = worst;
  r.pass = worst <= 1e-9;
  r.resolution = "per-position rate*T vs load";
  return r;
}

}  // namespace mecppo::oracles
