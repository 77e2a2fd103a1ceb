#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mecppo/noma.hpp"
#include "mecppo/scenario.hpp"
#include "mecppo/timing.hpp"

// Per-server offload-vector optimization by successive convex approximation:
// second-order surrogates of the NOMA power functions, a convex subproblem
// solved by a log-barrier interior-point method, and a damped update with an
// exact-feasibility backtrack.
namespace mecppo::partition {

enum class PowerKind { program, intermediate };

// Everything the per-server optimizer needs, laid out in decode order.
struct ServerContext {
  std::vector<double> sigma;    // w*N0/g_l per position
  std::vector<double> p_max;    // W
  std::vector<double> d_max;    // bits, box upper bound
  std::vector<double> d_lb;     // bits, energy lower bound
  std::vector<double> a_local;  // F/v_lc, s/bit of local compute
  std::vector<double> c_srv;    // F/v_srv, s/bit of remote compute
  std::vector<double> k;        // intermediate slope per UE
  std::vector<double> b;        // intermediate intercept per UE, bits
  double w = 0;                 // Hz
  double n0 = 0;                // W/Hz
  bool power_constrained = true;  // false under TDMA (caps hold by design)

  std::size_t size() const { return sigma.size(); }
};

inline ServerContext make_context(const Scenario& sc, int server,
                                  const noma::DecodeOrder& order, double w_i) {
  ServerContext ctx;
  ctx.w = w_i;
  ctx.n0 = sc.noise_density;
  ctx.power_constrained = sc.access_mode == AccessMode::noma;
  double v_srv = sc.servers[server].compute_speed;
  for (int n : order.ue_ids) {
    const auto& ue = sc.ues[n];
    ctx.sigma.push_back(w_i * sc.noise_density / sc.gains[server][n]);
    ctx.p_max.push_back(ue.max_power);
    ctx.d_max.push_back(ue.program.data_size);
    ctx.d_lb.push_back(min_offload_bound(ue));
    ctx.a_local.push_back(ue.program.intensity / ue.compute_speed);
    ctx.c_srv.push_back(ue.program.intensity / v_srv);
    ctx.k.push_back(ue.program.k);
    ctx.b.push_back(ue.program.b);
  }
  return ctx;
}

// Objective of the partition problem: phase-1 max, fixed upload times, and
// the server execution sum.
inline double total_time(const ServerContext& ctx, std::span<const double> d,
                         double t_pm, double t_ir) {
  double t_lc = 0;
  double t_srv = 0;
  for (std::size_t n = 0; n < ctx.size(); ++n) {
    t_lc = std::max(t_lc, ctx.a_local[n] * (ctx.d_max[n] - d[n]));
    t_srv += ctx.c_srv[n] * d[n];
  }
  return std::max(t_lc, t_pm) + t_ir + t_srv;
}

// Midpoint between the energy lower bound and the box top: strictly interior
// whenever the box has width, always feasible.
inline std::vector<double> initial_feasible_offload(const ServerContext& ctx) {
  std::vector<double> d(ctx.size());
  for (std::size_t n = 0; n < ctx.size(); ++n)
    d[n] = 0.5 * (ctx.d_lb[n] + ctx.d_max[n]);
  return d;
}

// Smooth upload loads for each kind. The intermediate model stays linear at
// d = 0 here; the evaluation-time decision rule zeroes it separately.
inline double load_coeff(const ServerContext& ctx, PowerKind kind,
                         std::size_t n) {
  return kind == PowerKind::program ? 1.0 : ctx.k[n];
}

inline double load_offset(const ServerContext& ctx, PowerKind kind,
                          std::size_t n) {
  return kind == PowerKind::program ? 0.0 : ctx.b[n];
}

struct PowerDerivatives {
  std::vector<double> value;
  std::vector<Eigen::VectorXd> grad;
  std::vector<Eigen::MatrixXd> hess;
};

// Exact analytic derivatives of p_l(D) = sigma_l (e^{a A_l} - e^{a A_{l-1}}),
// A_l the cumulative load ahead of and including position l. Intermediate
// loads chain-rule through the linear model (factor k per coordinate).
inline PowerDerivatives power_value_grad_hess(const ServerContext& ctx,
                                              std::span<const double> d,
                                              double t, PowerKind kind) {
  if (!(t > 0)) throw std::invalid_argument("power_value_grad_hess: T <= 0");
  const auto n = ctx.size();
  const double a = noma::ln2 / (t * ctx.w);
  PowerDerivatives out;
  out.value.resize(n);
  out.grad.assign(n, Eigen::VectorXd::Zero(n));
  out.hess.assign(n, Eigen::MatrixXd::Zero(n, n));

  std::vector<double> cum(n + 1, 0.0);  // cumulative loads A_0..A_n
  for (std::size_t j = 0; j < n; ++j)
    cum[j + 1] =
        cum[j] + load_coeff(ctx, kind, j) * d[j] + load_offset(ctx, kind, j);

  for (std::size_t l = 0; l < n; ++l) {
    double e_hi = ctx.sigma[l] * std::exp(a * cum[l + 1]);
    double e_lo = ctx.sigma[l] * std::exp(a * cum[l]);
    out.value[l] = e_hi - e_lo;
    auto& g = out.grad[l];
    auto& h = out.hess[l];
    for (std::size_t m = 0; m <= l; ++m) {
      double cm = load_coeff(ctx, kind, m);
      double hi_m = m <= l ? e_hi : 0.0;
      double lo_m = m + 1 <= l ? e_lo : 0.0;
      g(m) = a * cm * (hi_m - lo_m);
      for (std::size_t q = 0; q <= l; ++q) {
        double cq = load_coeff(ctx, kind, q);
        double hi = e_hi;
        double lo = (m + 1 <= l && q + 1 <= l) ? e_lo : 0.0;
        h(m, q) = a * a * cm * cq * (hi - lo);
      }
    }
  }
  return out;
}

struct SurrogateModel {
  Eigen::VectorXd expansion;            // D[t]
  std::vector<double> value;            // p_l(D[t])
  std::vector<Eigen::VectorXd> grad;    // exact gradients
  std::vector<Eigen::MatrixXd> hess;    // PSD-clamped Hessians
  double tau = 0;
  int clamped = 0;  // diagnostic: constraints whose Hessian needed clamping

  double eval(std::size_t l, const Eigen::VectorXd& d) const {
    Eigen::VectorXd delta = d - expansion;
    return value[l] + grad[l].dot(delta) +
           0.5 * delta.dot(hess[l] * delta) + 0.5 * tau * delta.squaredNorm();
  }
};

// Second-order Taylor model at D[t] with tau = 0. The raw Hessian is
// indefinite in general; eigenvalues are clamped at zero so the subproblem
// stays convex.
inline SurrogateModel build_surrogate(const ServerContext& ctx,
                                      std::span<const double> d, double t,
                                      PowerKind kind) {
  auto der = power_value_grad_hess(ctx, d, t, kind);
  SurrogateModel s;
  s.expansion = Eigen::Map<const Eigen::VectorXd>(d.data(),
                                                  static_cast<long>(d.size()));
  s.value = std::move(der.value);
  s.grad = std::move(der.grad);
  s.hess.reserve(der.hess.size());
  for (auto& h : der.hess) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.eigenvalues().minCoeff() < 0) {
      Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
      h = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
      ++s.clamped;
    }
    s.hess.push_back(std::move(h));
  }
  return s;
}

namespace detail {

// One convex inequality g(z) <= 0 over z = (D_free..., u).
struct Constraint {
  // affine part: c0 + c^T z
  double c0 = 0;
  Eigen::VectorXd lin;
  // optional quadratic part 0.5 z^T Q z restricted to the D block
  Eigen::MatrixXd quad;  // empty when affine
  bool quadratic = false;

  double eval(const Eigen::VectorXd& z) const {
    double v = c0 + lin.dot(z);
    if (quadratic) v += 0.5 * z.dot(quad * z);
    return v;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    if (!quadratic) return lin;
    return lin + quad * z;
  }
};

struct BarrierProblem {
  Eigen::VectorXd objective;  // linear objective over z
  std::vector<Constraint> constraints;

  double f0(const Eigen::VectorXd& z) const { return objective.dot(z); }

  bool strictly_feasible(const Eigen::VectorXd& z) const {
    for (const auto& c : constraints)
      if (!(c.eval(z) < 0)) return false;
    return true;
  }

  // Standard barrier method: Newton with backtracking on
  // t*f0 - sum log(-g_i), outer t schedule until the duality-gap bound
  // m/t is below tol.
  Eigen::VectorXd solve(Eigen::VectorXd z, double gap_tol) const {
    const double mu = 20.0;
    double t = 1.0;
    const auto m = static_cast<double>(constraints.size());
    const long dim = z.size();
    while (true) {
      for (int newton = 0; newton < 80; ++newton) {
        Eigen::VectorXd grad = t * objective;
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& c : constraints) {
          double g = c.eval(z);
          Eigen::VectorXd cg = c.gradient(z);
          grad += cg / (-g);
          hess += cg * cg.transpose() / (g * g);
          if (c.quadratic) hess += c.quad / (-g);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step = ldlt.solve(-grad);
        if (!step.allFinite()) {
          hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
          step = hess.ldlt().solve(-grad);
          if (!step.allFinite()) break;
        }
        double decrement = -grad.dot(step);
        if (!(decrement > 0)) {
          hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
          step = hess.ldlt().solve(-grad);
          decrement = -grad.dot(step);
          if (!(decrement > 0)) break;
        }
        if (decrement * 0.5 < 1e-12) break;
        double phi0 = barrier_value(z, t);
        double alpha = 1.0;
        Eigen::VectorXd zn;
        for (int ls = 0; ls < 60; ++ls) {
          zn = z + alpha * step;
          if (strictly_feasible(zn) &&
              barrier_value(zn, t) <= phi0 - 1e-4 * alpha * decrement)
            break;
          alpha *= 0.5;
          zn = z;  // keep current point if the search bottoms out
        }
        if ((zn - z).norm() == 0) break;
        z = zn;
      }
      if (m / t < gap_tol) return z;
      t *= mu;
    }
  }

  double barrier_value(const Eigen::VectorXd& z, double t) const {
    double v = t * f0(z);
    for (const auto& c : constraints) {
      double g = c.eval(z);
      if (!(g < 0)) return std::numeric_limits<double>::infinity();
      v -= std::log(-g);
    }
    return v;
  }
};

}  // namespace detail

// Convex subproblem of one SCA iteration: epigraph variable u for the
// phase-1 max term, surrogate power caps, energy lower bounds, and the box.
// Coordinates whose box has collapsed (energy bound at the top) are pinned
// and eliminated from the solve.
inline std::vector<double> solve_convex_subproblem(
    const ServerContext& ctx, const SurrogateModel* surro_pm,
    const SurrogateModel* surro_ir, double t_pm,
    std::span<const double> d_start) {
  const auto n = ctx.size();
  std::vector<int> free_idx;
  std::vector<double> d_fixed(d_start.begin(), d_start.end());
  for (std::size_t i = 0; i < n; ++i) {
    double width = ctx.d_max[i] - ctx.d_lb[i];
    if (width > 1e-12 * std::max(ctx.d_max[i], 1.0)) {
      free_idx.push_back(static_cast<int>(i));
    } else {
      d_fixed[i] = ctx.d_lb[i];
    }
  }
  const auto nf = static_cast<long>(free_idx.size());
  if (nf == 0) return d_fixed;
  const long dim = nf + 1;  // free offloads plus epigraph u

  detail::BarrierProblem prob;
  prob.objective = Eigen::VectorXd::Zero(dim);
  prob.objective(nf) = 1.0;
  for (long f = 0; f < nf; ++f)
    prob.objective(f) = ctx.c_srv[free_idx[f]];

  auto add_affine = [&](double c0, const Eigen::VectorXd& lin) {
    detail::Constraint c;
    c.c0 = c0;
    c.lin = lin;
    prob.constraints.push_back(std::move(c));
  };

  // u >= t_pm
  {
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(dim);
    lin(nf) = -1;
    add_affine(t_pm, lin);
  }
  // u >= a_i (d_max_i - D_i), with fixed coordinates folded into constants
  double fixed_local_max = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool is_free =
        std::find(free_idx.begin(), free_idx.end(), static_cast<int>(i)) !=
        free_idx.end();
    if (!is_free)
      fixed_local_max = std::max(
          fixed_local_max, ctx.a_local[i] * (ctx.d_max[i] - d_fixed[i]));
  }
  {
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(dim);
    lin(nf) = -1;
    add_affine(fixed_local_max, lin);
  }
  for (long f = 0; f < nf; ++f) {
    int i = free_idx[f];
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(dim);
    lin(f) = -ctx.a_local[i];
    lin(nf) = -1;
    add_affine(ctx.a_local[i] * ctx.d_max[i], lin);
  }
  // box
  for (long f = 0; f < nf; ++f) {
    int i = free_idx[f];
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(dim);
    lo(f) = -1;
    add_affine(ctx.d_lb[i], lo);
    Eigen::VectorXd hi = Eigen::VectorXd::Zero(dim);
    hi(f) = 1;
    add_affine(-ctx.d_max[i], hi);
  }

  // Strictly interior start: free coordinates nudged off the box faces.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd d_nudged = Eigen::Map<const Eigen::VectorXd>(
      d_fixed.data(), static_cast<long>(n));
  for (long f = 0; f < nf; ++f) {
    int i = free_idx[f];
    double width = ctx.d_max[i] - ctx.d_lb[i];
    z(f) = std::clamp(d_start[i], ctx.d_lb[i] + 1e-9 * width,
                      ctx.d_max[i] - 1e-9 * width);
    d_nudged(i) = z(f);
  }

  // Surrogate power caps, rewritten over (D_free, u) with fixed coordinates
  // substituted. Each is value + g.(D-D0) + 0.5 (D-D0) H (D-D0) <= cap.
  Eigen::VectorXd d0 = Eigen::Map<const Eigen::VectorXd>(
      d_start.data(), static_cast<long>(d_start.size()));
  auto add_surrogate_caps = [&](const SurrogateModel& s) {
    for (std::size_t l = 0; l < n; ++l) {
      // Relax the cap marginally: the (nudged) start may sit exactly on it.
      double start_val =
          std::max(s.eval(l, Eigen::Map<const Eigen::VectorXd>(
                                 d_fixed.data(), static_cast<long>(n))),
                   s.eval(l, d_nudged));
      double cap = ctx.p_max[l] * (1 + 1e-9);
      cap = std::max(cap, start_val * (1 + 1e-9) +
                              1e-9 * std::max(ctx.p_max[l], 1e-12));

      // Expand around d0 in the full space, then restrict to free coords.
      Eigen::VectorXd delta_fixed = Eigen::VectorXd::Zero(static_cast<long>(n));
      for (std::size_t i = 0; i < n; ++i)
        delta_fixed(static_cast<long>(i)) = d_fixed[i] - d0(static_cast<long>(i));

      detail::Constraint c;
      c.lin = Eigen::VectorXd::Zero(dim);
      c.quad = Eigen::MatrixXd::Zero(dim, dim);
      c.quadratic = true;
      // constant: value at D = d_fixed pattern with free coords at 0 absolute
      // handled by expressing the quadratic in absolute coordinates:
      // q(D) = v + g.(D - d0) + 0.5 (D-d0)^T H (D-d0)
      //      = [v - g.d0 + 0.5 d0^T H d0] + (g - H d0).D + 0.5 D^T H D
      double c0 = s.value[l] - s.grad[l].dot(d0) + 0.5 * d0.dot(s.hess[l] * d0);
      Eigen::VectorXd lin_full = s.grad[l] - s.hess[l] * d0;
      // substitute fixed coordinates
      for (std::size_t i = 0; i < n; ++i) {
        bool is_free = std::find(free_idx.begin(), free_idx.end(),
                                 static_cast<int>(i)) != free_idx.end();
        if (!is_free) c0 += lin_full(static_cast<long>(i)) * d_fixed[i];
      }
      for (long f = 0; f < nf; ++f)
        c.lin(f) = lin_full(free_idx[f]);
      for (long f = 0; f < nf; ++f)
        for (long g2 = 0; g2 < nf; ++g2)
          c.quad(f, g2) = s.hess[l](free_idx[f], free_idx[g2]);
      // cross terms between fixed and free coordinates
      for (long f = 0; f < nf; ++f) {
        double cross = 0;
        for (std::size_t i = 0; i < n; ++i) {
          bool is_free = std::find(free_idx.begin(), free_idx.end(),
                                   static_cast<int>(i)) != free_idx.end();
          if (!is_free)
            cross += s.hess[l](free_idx[f], static_cast<long>(i)) * d_fixed[i];
        }
        c.lin(f) += cross;
      }
      // fixed-fixed quadratic contribution
      double ff = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          bool fi = std::find(free_idx.begin(), free_idx.end(),
                              static_cast<int>(i)) != free_idx.end();
          bool fj = std::find(free_idx.begin(), free_idx.end(),
                              static_cast<int>(j)) != free_idx.end();
          if (!fi && !fj)
            ff += s.hess[l](static_cast<long>(i), static_cast<long>(j)) *
                  d_fixed[i] * d_fixed[j];
        }
      c.c0 = c0 + 0.5 * ff - cap;
      prob.constraints.push_back(std::move(c));
    }
  };
  if (surro_pm) add_surrogate_caps(*surro_pm);
  if (surro_ir) add_surrogate_caps(*surro_ir);

  // Lift u strictly above the phase-1 maximum at the start.
  double u0 = t_pm;
  for (std::size_t i = 0; i < n; ++i)
    u0 = std::max(u0, ctx.a_local[i] *
                          (ctx.d_max[i] - d_nudged(static_cast<long>(i))));
  z(nf) = u0 + std::max(1e-3, 0.01 * u0) + 1.0;
  if (!prob.strictly_feasible(z))
    throw std::runtime_error(
        "solve_convex_subproblem: no strictly feasible start (upstream bug)");

  double scale = std::max(1.0, std::abs(prob.f0(z)));
  Eigen::VectorXd zs = prob.solve(std::move(z), 1e-9 * scale);

  std::vector<double> out = d_fixed;
  for (long f = 0; f < nf; ++f)
    out[free_idx[f]] =
        std::clamp(zs(f), ctx.d_lb[free_idx[f]], ctx.d_max[free_idx[f]]);
  return out;
}

// Exact power feasibility of an offload vector at fixed upload times,
// re-checked through the closed-form minimum-power expressions.
inline bool exact_power_feasible(const ServerContext& ctx,
                                 std::span<const double> d, double t_pm,
                                 double t_ir, double rel_slack = 1e-11) {
  if (!ctx.power_constrained) return true;
  const auto n = ctx.size();
  std::vector<double> gains(n), pm_loads(n), ir_loads(n);
  for (std::size_t i = 0; i < n; ++i) {
    gains[i] = ctx.w * ctx.n0 / ctx.sigma[i];
    pm_loads[i] = d[i];
    ir_loads[i] = d[i] > 0 ? ctx.k[i] * d[i] + ctx.b[i] : 0.0;
  }
  auto within = [&](const std::vector<double>& p) {
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] > ctx.p_max[i] * (1 + rel_slack)) return false;
    return true;
  };
  double pm_total = std::accumulate(pm_loads.begin(), pm_loads.end(), 0.0);
  if (pm_total > 0) {
    if (!(t_pm > 0)) return false;
    if (!within(noma::min_powers_for_time(pm_loads, gains, ctx.w, ctx.n0, t_pm)))
      return false;
  }
  double ir_total = std::accumulate(ir_loads.begin(), ir_loads.end(), 0.0);
  if (ir_total > 0) {
    if (!(t_ir > 0)) return false;
    if (!within(noma::min_powers_for_time(ir_loads, gains, ctx.w, ctx.n0, t_ir)))
      return false;
  }
  return true;
}

struct SCAResult {
  std::vector<double> d;
  double objective = 0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int hessian_clamps = 0;
};

// Outer approximation loop: damped convex-combination steps toward the subproblem
// optimizer, with step halving whenever the exact power check fails.
inline SCAResult sca_optimize(const ServerContext& ctx, double t_pm,
                              double t_ir, std::vector<double> d0,
                              int t_max = 50, double tol = 1e-6) {
  SCAResult res;
  res.d = std::move(d0);
  res.objective = total_time(ctx, res.d, t_pm, t_ir);
  res.trace.push_back(res.objective);

  for (int t = 1; t <= t_max; ++t) {
    const SurrogateModel* spm_ptr = nullptr;
    const SurrogateModel* sir_ptr = nullptr;
    SurrogateModel spm, sir;
    if (ctx.power_constrained && t_pm > 0) {
      spm = build_surrogate(ctx, res.d, t_pm, PowerKind::program);
      res.hessian_clamps += spm.clamped;
      spm_ptr = &spm;
    }
    if (ctx.power_constrained && t_ir > 0) {
      sir = build_surrogate(ctx, res.d, t_ir, PowerKind::intermediate);
      res.hessian_clamps += sir.clamped;
      sir_ptr = &sir;
    }
    auto d_hat = solve_convex_subproblem(ctx, spm_ptr, sir_ptr, t_pm, res.d);

    double step = 1.0 / t;
    std::vector<double> delta(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i)
      delta[i] = step * (d_hat[i] - res.d[i]);

    std::vector<double> cand(ctx.size());
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < ctx.size(); ++i)
        cand[i] = std::clamp(res.d[i] + delta[i], ctx.d_lb[i], ctx.d_max[i]);
      double cand_obj = total_time(ctx, cand, t_pm, t_ir);
      if (exact_power_feasible(ctx, cand, t_pm, t_ir) &&
          cand_obj <= res.objective * (1 + 1e-14) + 1e-15) {
        double drop = res.objective - cand_obj;
        res.d = cand;
        res.objective = std::min(res.objective, cand_obj);
        res.trace.push_back(res.objective);
        res.iterations = t;
        accepted = true;
        if (drop < tol) res.converged = true;
        break;
      }
      for (auto& x : delta) x *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no admissible move left
      break;
    }
    if (res.converged) break;
  }
  return res;
}

}  // namespace mecppo::partition
