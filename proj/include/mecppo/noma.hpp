#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mecppo/scenario.hpp"
#include "mecppo/timing.hpp"

// NOMA uplink algebra and the minimum-upload-time solver. All per-UE vectors
// here are indexed by decode-order position (strongest channel first), not by
// global UE id.
namespace mecppo::noma {

inline constexpr double ln2 = 0.6931471805599453;

struct DecodeOrder {
  // position -> UE index, ascending gain. Interference at position l comes
  // from positions before l, so the receiver effectively decodes the
  // strongest signal first and leaves the weakest UE interference-free;
  // this keeps the simultaneous upload no slower than exclusive time slices.
  std::vector<int> ue_ids;

  static DecodeOrder make(const Scenario& sc, int server, const Group& group) {
    DecodeOrder order;
    order.ue_ids = group;
    const auto& g = sc.gains[server];
    std::stable_sort(order.ue_ids.begin(), order.ue_ids.end(),
                     [&](int a, int b) {
                       if (g[a] != g[b]) return g[a] < g[b];
                       return a < b;  // gain ties broken by ascending UE id
                     });
    return order;
  }

  std::size_t size() const { return ue_ids.size(); }
};

struct UplinkSolution {
  double time = 0;                  // s
  double theta = 0;                 // 1/s (inf when time == 0)
  std::vector<double> powers;       // W, by position
  int binding_pos = -1;             // position whose power cap binds
};

// Rate of the UE at position l when positions before it are still undecoded
// interference.
inline double achievable_rate(std::span<const double> powers,
                              std::span<const double> gains, double w,
                              double n0, std::size_t l) {
  if (!(w > 0)) throw std::invalid_argument("achievable_rate: w <= 0");
  if (l >= powers.size())
    throw std::invalid_argument("achievable_rate: position out of range");
  double interference = 0;
  for (std::size_t j = 0; j < l; ++j) interference += powers[j] * gains[j];
  double sinr = powers[l] * gains[l] / (interference + w * n0);
  return w * std::log2(1 + sinr);
}

// Minimum powers delivering the given loads within T, position by position.
inline std::vector<double> min_powers_for_time(std::span<const double> loads,
                                               std::span<const double> gains,
                                               double w, double n0, double T) {
  if (!(T > 0)) throw std::invalid_argument("min_powers_for_time: T <= 0");
  std::vector<double> p(loads.size(), 0.0);
  double prior = 0;  // sum of loads decoded after this position
  for (std::size_t l = 0; l < loads.size(); ++l) {
    if (loads[l] > 0) {
      double sigma = w * n0 / gains[l];
      p[l] = sigma * (std::exp2(loads[l] / (T * w)) - 1.0) *
             std::exp2(prior / (T * w));
    }
    prior += loads[l];
  }
  return p;
}

// F(theta) of the power-cap constraint at position l; negative means the cap
// holds at rate parameter theta = 1/T.
inline double capacity_violation(double theta, std::size_t l,
                                 std::span<const double> loads,
                                 std::span<const double> gains, double w,
                                 double n0, double p_max) {
  if (theta < 0) throw std::invalid_argument("capacity_violation: theta < 0");
  double upto = 0;
  for (std::size_t j = 0; j < l; ++j) upto += loads[j];
  double prior = upto;
  upto += loads[l];
  double sigma = w * n0 / gains[l];
  return sigma * (std::exp2(theta * upto / w) - std::exp2(theta * prior / w)) -
         p_max;
}

namespace detail {

// Root of sigma*(e^{lam*th} - e^{mu*th}) = p_max with lam > mu >= 0.
// F is increasing and convex, so Newton from the right bracket descends
// monotonically; a bisection safeguard covers floating-point extremes.
inline double solve_theta_root(double sigma, double lam, double mu,
                               double p_max) {
  // Upper bracket from the interference-free inversion:
  // sigma*e^{mu*th}*(e^{(lam-mu)*th} - 1) >= sigma*(e^{(lam-mu)*th} - 1).
  double hi = std::log1p(p_max / sigma) / (lam - mu);
  double lo = 0;
  auto f = [&](double th) {
    return sigma * (std::exp(lam * th) - std::exp(mu * th)) - p_max;
  };
  auto fp = [&](double th) {
    return sigma * (lam * std::exp(lam * th) - mu * std::exp(mu * th));
  };
  double th = hi;
  for (int it = 0; it < 200; ++it) {
    double val = f(th);
    if (val > 0)
      hi = th;
    else
      lo = th;
    double step = val / fp(th);
    double next = th - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - th) <= 1e-14 * std::max(next, th)) {
      th = next;
      break;
    }
    th = next;
  }
  // Land on the cap-respecting side: a hair below the root keeps the
  // recovered minimum power at or under p_max despite rounding.
  return th * (1 - 1e-12);
}

}  // namespace detail

// Minimum-upload-time solve: the largest theta keeping every position's power within
// its cap, hence the smallest upload time. Zero-load positions never bind.
inline UplinkSolution solve_min_upload_time(std::span<const double> loads,
                                            std::span<const double> gains,
                                            double w, double n0,
                                            std::span<const double> p_max) {
  if (loads.empty())
    throw std::invalid_argument("solve_min_upload_time: empty group");
  double total = std::accumulate(loads.begin(), loads.end(), 0.0);
  UplinkSolution sol;
  sol.powers.assign(loads.size(), 0.0);
  if (total <= 0) {
    sol.time = 0;
    sol.theta = std::numeric_limits<double>::infinity();
    return sol;
  }
  if (!(w > 0)) {
    sol.time = std::numeric_limits<double>::infinity();
    sol.theta = 0;
    return sol;
  }

  double theta_star = std::numeric_limits<double>::infinity();
  double prior = 0;
  for (std::size_t l = 0; l < loads.size(); ++l) {
    double upto = prior + loads[l];
    if (loads[l] > 0) {
      double sigma = w * n0 / gains[l];
      double lam = ln2 * upto / w;
      double mu = ln2 * prior / w;
      double theta_max = detail::solve_theta_root(sigma, lam, mu, p_max[l]);
      if (theta_max < theta_star) {
        theta_star = theta_max;
        sol.binding_pos = static_cast<int>(l);
      }
    }
    prior = upto;
  }
  sol.theta = theta_star;
  sol.time = 1.0 / theta_star;
  sol.powers = min_powers_for_time(loads, gains, w, n0, sol.time);
  return sol;
}

// TDMA comparator: exclusive slices, each UE transmitting at its power cap.
inline UplinkSolution tdma_min_upload_time(std::span<const double> loads,
                                           std::span<const double> gains,
                                           double w, double n0,
                                           std::span<const double> p_max) {
  if (loads.empty())
    throw std::invalid_argument("tdma_min_upload_time: empty group");
  UplinkSolution sol;
  sol.powers.assign(loads.size(), 0.0);
  double total = std::accumulate(loads.begin(), loads.end(), 0.0);
  if (total <= 0) {
    sol.time = 0;
    sol.theta = std::numeric_limits<double>::infinity();
    return sol;
  }
  if (!(w > 0)) {
    sol.time = std::numeric_limits<double>::infinity();
    sol.theta = 0;
    return sol;
  }
  double t = 0;
  for (std::size_t l = 0; l < loads.size(); ++l) {
    if (loads[l] <= 0) continue;
    double rate = w * std::log2(1 + p_max[l] * gains[l] / (w * n0));
    t += loads[l] / rate;
    sol.powers[l] = p_max[l];
  }
  sol.time = t;
  sol.theta = 1.0 / t;
  return sol;
}

}  // namespace mecppo::noma
