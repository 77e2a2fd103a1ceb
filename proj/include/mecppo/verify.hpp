#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mecppo/balancer.hpp"
#include "mecppo/oracles.hpp"
#include "mecppo/partition.hpp"
#include "mecppo/scenario.hpp"
#include "mecppo/server_solver.hpp"

// Seeded property suites shared by the CLI `verify` subcommand and the test
// binaries. Each suite returns the number of failed checks and appends
// human-readable diagnostics to `log`.
namespace mecppo::verify {

struct UplinkInstance {
  std::vector<double> loads;
  std::vector<double> gains;
  std::vector<double> p_max;
  double w = 0;
  double n0 = 1e-20;
};

inline UplinkInstance random_uplink(Rng& rng, int max_ues = 8) {
  UplinkInstance in;
  int n = 1 + static_cast<int>(rng.uniform01() * max_ues) % max_ues;
  in.w = rng.uniform(1e6, 4e7);
  for (int i = 0; i < n; ++i) {
    in.loads.push_back(rng.uniform(1e5, 2e7));
    in.gains.push_back(std::pow(10.0, rng.uniform(-14.0, -11.0)));
    in.p_max.push_back(rng.uniform(0.1, 0.25));
  }
  // decode order: ascending gain
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return in.gains[a] < in.gains[b]; });
  UplinkInstance ordered;
  ordered.w = in.w;
  ordered.n0 = in.n0;
  for (int i : idx) {
    ordered.loads.push_back(in.loads[i]);
    ordered.gains.push_back(in.gains[i]);
    ordered.p_max.push_back(in.p_max[i]);
  }
  return ordered;
}

// Power/rate closed forms must invert each other.
inline int suite_roundtrip(int seeds, std::ostream& log) {
  int failures = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    auto in = random_uplink(rng);
    double t = rng.uniform(0.5, 50.0);
    auto rep = oracles::roundtrip_check(in.loads, in.gains, in.w, in.n0, t);
    if (!rep.pass) {
      ++failures;
      log << "roundtrip seed " << s << ": rel error " << rep.rel_error << '\n';
    }
  }
  return failures;
}

// The Newton-based minimum-time solve must match an independent bisection,
// and the per-position residual must be increasing in theta (so the root is
// unique and the sign changes exactly once).
inline int suite_newton(int seeds, std::ostream& log) {
  int failures = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(2000 + static_cast<std::uint64_t>(s));
    auto in = random_uplink(rng);
    auto sol = noma::solve_min_upload_time(in.loads, in.gains, in.w, in.n0,
                                           in.p_max);
    // oracle: bisect each position's residual, take the min root
    double theta_oracle = std::numeric_limits<double>::infinity();
    double prior = 0;
    bool monotone_ok = true;
    for (std::size_t l = 0; l < in.loads.size(); ++l) {
      double upto = prior + in.loads[l];
      double sigma = in.w * in.n0 / in.gains[l];
      double lam = noma::ln2 * upto / in.w;
      double mu = noma::ln2 * prior / in.w;
      double cap = in.p_max[l];
      auto f = [&](double th) {
        return sigma * (std::exp(lam * th) - std::exp(mu * th)) - cap;
      };
      double hi = 1.0;
      while (f(hi) <= 0) hi *= 2;
      double root = oracles::bisect_root(f, 0.0, hi, 1e-14 * hi);
      theta_oracle = std::min(theta_oracle, root);
      // monotone residual along sampled thetas
      double prev = f(0.0);
      for (int k = 1; k <= 16; ++k) {
        double cur = f(hi * k / 16.0);
        if (cur < prev - 1e-12 * std::abs(prev)) monotone_ok = false;
        prev = cur;
      }
      prior = upto;
    }
    double rel = std::abs(sol.theta - theta_oracle) /
                 std::max(theta_oracle, 1e-300);
    if (rel > 1e-8 || !monotone_ok) {
      ++failures;
      log << "newton seed " << s << ": rel " << rel << " monotone "
          << monotone_ok << '\n';
    }
  }
  return failures;
}

inline partition::ServerContext random_context(Rng& rng, int n_ues,
                                               double w) {
  partition::ServerContext ctx;
  ctx.w = w;
  ctx.n0 = 1e-20;
  for (int i = 0; i < n_ues; ++i) {
    double gain = std::pow(10.0, rng.uniform(-14.0, -11.0));
    ctx.sigma.push_back(w * ctx.n0 / gain);
    ctx.p_max.push_back(rng.uniform(0.1, 0.25));
    double d_max = rng.uniform(5e7, 2e8);
    ctx.d_max.push_back(d_max);
    ctx.d_lb.push_back(rng.uniform01() < 0.5 ? 0.0
                                             : rng.uniform(0.0, 0.6) * d_max);
    ctx.a_local.push_back(2000.0 / rng.uniform(1.2e9, 4e9));
    ctx.c_srv.push_back(2000.0 / rng.uniform(500e9, 650e9));
    ctx.k.push_back(0.001);
    ctx.b.push_back(1.5e6);
  }
  // sort by ascending gain = descending sigma (decode-order convention)
  std::vector<int> idx(n_ues);
  for (int i = 0; i < n_ues; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return ctx.sigma[a] > ctx.sigma[b]; });
  partition::ServerContext out = ctx;
  for (int i = 0; i < n_ues; ++i) {
    int j = idx[i];
    out.sigma[i] = ctx.sigma[j];
    out.p_max[i] = ctx.p_max[j];
    out.d_max[i] = ctx.d_max[j];
    out.d_lb[i] = ctx.d_lb[j];
    out.a_local[i] = ctx.a_local[j];
    out.c_srv[i] = ctx.c_srv[j];
    out.k[i] = ctx.k[j];
    out.b[i] = ctx.b[j];
  }
  return out;
}

// Partition descent: non-increasing objective trace and exact feasibility
// of every reported iterate's endpoint.
inline int suite_sca(int seeds, std::ostream& log) {
  int failures = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(3000 + static_cast<std::uint64_t>(s));
    int n = 1 + static_cast<int>(rng.uniform01() * 5) % 5;
    auto ctx = random_context(rng, n, rng.uniform(2e6, 2e7));
    auto d0 = partition::initial_feasible_offload(ctx);
    std::vector<double> gains(n);
    for (int i = 0; i < n; ++i) gains[i] = ctx.w * ctx.n0 / ctx.sigma[i];
    auto pm = noma::solve_min_upload_time(d0, gains, ctx.w, ctx.n0, ctx.p_max);
    std::vector<double> s_loads(n);
    for (int i = 0; i < n; ++i)
      s_loads[i] = d0[i] > 0 ? ctx.k[i] * d0[i] + ctx.b[i] : 0.0;
    auto ir =
        noma::solve_min_upload_time(s_loads, gains, ctx.w, ctx.n0, ctx.p_max);
    auto res = partition::sca_optimize(ctx, pm.time, ir.time, d0);
    for (std::size_t t = 1; t < res.trace.size(); ++t)
      if (res.trace[t] > res.trace[t - 1] + 1e-9) {
        ++failures;
        log << "sca seed " << s << ": trace rises at step " << t << '\n';
      }
    if (!partition::exact_power_feasible(ctx, res.d, pm.time, ir.time, 1e-6)) {
      ++failures;
      log << "sca seed " << s << ": endpoint infeasible\n";
    }
  }
  return failures;
}

// Per-server descent traces must be non-increasing and the final schedule's
// powers must respect the caps.
inline int suite_server(int seeds, std::ostream& log) {
  int failures = 0;
  for (int s = 0; s < seeds; ++s) {
    auto sc = generate_scenario(4000 + static_cast<std::uint64_t>(s), 1,
                                1 + s % 6, GenParams{});
    Group g(sc.ues.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<int>(i);
    auto sol = optimize_server(sc, 0, g, sc.total_bandwidth);
    for (std::size_t t = 1; t < sol.trace.size(); ++t)
      if (sol.trace[t] > sol.trace[t - 1] + 1e-9) {
        ++failures;
        log << "server seed " << s << ": trace rises at step " << t << '\n';
      }
    for (std::size_t pos = 0; pos < sol.order.size(); ++pos) {
      double cap = sc.ues[sol.order[pos]].max_power * (1 + 1e-6);
      if (sol.schedule.program_powers[pos] > cap ||
          sol.schedule.intermediate_powers[pos] > cap) {
        ++failures;
        log << "server seed " << s << ": power cap violated\n";
      }
    }
  }
  return failures;
}

// Balancer contracts: bandwidth conservation and association validity after
// every action, plus best-so-far never above the initial makespan.
inline int suite_balance(int seeds, std::ostream& log,
                         int* case5_events = nullptr) {
  int failures = 0;
  for (int s = 0; s < seeds; ++s) {
    auto sc = generate_scenario(5000 + static_cast<std::uint64_t>(s), 3, 12,
                                GenParams{});
    double initial = std::numeric_limits<double>::quiet_NaN();
    bool contract_ok = true;
    BalanceOptions opt;
    opt.epsilon = 0.01;  // tight spread target: exercises bandwidth halving
    auto rep = balance(sc, opt, [&](const BalanceEvent& e) {
      if (std::isnan(initial)) initial = e.makespan_before;
      // Rejected bandwidth slice: the donor must have become the new
      // bottleneck, exceeding the pre-transfer makespan.
      if (e.action == "bandwidth" && !e.accepted) {
        if (case5_events) ++(*case5_events);
        if (!(e.t_fast_after > e.makespan_before)) contract_ok = false;
      }
    });
    double wsum = 0;
    for (double w : rep.bandwidth) wsum += w;
    if (std::abs(wsum - sc.total_bandwidth) > 1e-9 * sc.total_bandwidth) {
      ++failures;
      log << "balance seed " << s << ": bandwidth not conserved\n";
    }
    for (int srv : rep.server_of_ue)
      if (srv < 0 || srv >= sc.server_count()) {
        ++failures;
        log << "balance seed " << s << ": invalid association\n";
      }
    if (!std::isnan(initial) && rep.makespan > initial + 1e-9) {
      ++failures;
      log << "balance seed " << s << ": final above initial\n";
    }
    if (!contract_ok) {
      ++failures;
      log << "balance seed " << s << ": donor-time contract violated\n";
    }
  }
  return failures;
}

// Uniqueness of the residual root (convex and increasing residual) and the
// donor-time property on rejected bandwidth transfers.
inline int suite_lemmas(int seeds, std::ostream& log) {
  int failures = 0;
  // residual convexity: second differences nonnegative along theta
  for (int s = 0; s < seeds; ++s) {
    Rng rng(6000 + static_cast<std::uint64_t>(s));
    auto in = random_uplink(rng);
    double prior = 0;
    for (std::size_t l = 0; l < in.loads.size(); ++l) {
      double upto = prior + in.loads[l];
      double sigma = in.w * in.n0 / in.gains[l];
      double lam = noma::ln2 * upto / in.w;
      double mu = noma::ln2 * prior / in.w;
      auto f = [&](double th) {
        return sigma * (std::exp(lam * th) - std::exp(mu * th));
      };
      double hi = std::log1p(in.p_max[l] / sigma) / std::max(lam - mu, 1e-300);
      double step = hi / 16;
      for (int k = 1; k + 1 <= 16; ++k) {
        double second =
            f((k + 1) * step) - 2 * f(k * step) + f((k - 1) * step);
        if (second < -1e-12 * std::max(1.0, std::abs(f(k * step)))) {
          ++failures;
          log << "lemmas seed " << s << ": residual not convex\n";
        }
      }
      prior = upto;
    }
  }
  int case5 = 0;
  failures += suite_balance(std::min(seeds, 100), log, &case5);
  log << "lemmas: observed " << case5 << " rejected bandwidth transfers\n";
  return failures;
}

inline int run_suite(const std::string& name, int seeds, std::ostream& log) {
  if (name == "roundtrip") return suite_roundtrip(seeds, log);
  if (name == "newton") return suite_newton(seeds, log);
  if (name == "sca") return suite_sca(seeds, log);
  if (name == "server") return suite_server(seeds, log);
  if (name == "balance") return suite_balance(seeds, log);
  if (name == "lemmas") return suite_lemmas(seeds, log);
  throw std::invalid_argument("verify: unknown suite " + name);
}

}  // namespace mecppo::verify
