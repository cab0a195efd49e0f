#include "klab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "klab/errors.hpp"
#include "klab/numeric.hpp"

namespace klab {

namespace {

constexpr double kDivergenceFloor = -1e12;

// Tridiagonal stiffness of the p = 2 gradient form on the grid, boundary row
// pinned.  Used as a fixed preconditioner for all descent directions (for
// p != 2 it is still symmetric positive definite, only the metric is
// approximate).  Thomas factorization, O(n) solves.
class StiffnessSolver {
 public:
  explicit StiffnessSolver(const RadialGrid& g) : n_(g.n), diag_(g.n, 0.0), lower_(g.n, 0.0) {
    const double inv_h2 = 1.0 / (g.h * g.h);
    std::vector<double> off(n_, 0.0);
    for (int i = 0; i + 1 < n_; ++i) {
      const double w = g.wgrad[i] * inv_h2;
      diag_[i] += w;
      diag_[i + 1] += w;
      off[i] = -w;
    }
    diag_[n_ - 1] = 1.0;
    off[n_ - 2] = 0.0;
    // LDL^T factorization of the tridiagonal.
    for (int i = 1; i < n_; ++i) {
      lower_[i] = off[i - 1] / diag_[i - 1];
      diag_[i] -= lower_[i] * off[i - 1];
    }
    off_ = std::move(off);
  }

  // z = K^{-1} rhs with the boundary entry zeroed.
  void solve(const std::vector<double>& rhs, std::vector<double>& z) const {
    z = rhs;
    z[n_ - 1] = 0.0;
    for (int i = 1; i < n_; ++i) z[i] -= lower_[i] * z[i - 1];
    for (int i = 0; i < n_; ++i) z[i] /= diag_[i];
    for (int i = n_ - 2; i >= 0; --i) z[i] -= lower_[i + 1] * z[i + 1];
    z[n_ - 1] = 0.0;
  }

 private:
  int n_;
  std::vector<double> diag_, lower_, off_;
};

double phi_value(const std::vector<double>& v, const GridPtr& grid, double lambda,
                 const KirchhoffModel& model, const ProblemExponents& exps) {
  const RadialGrid& g = *grid;
  const double inv_h = 1.0 / g.h;
  double A = 0.0, B = 0.0, C = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    const double d = (v[i + 1] - v[i]) * inv_h;
    A += g.wgrad[i] * pow_abs(d, exps.p);
  }
  for (int i = 0; i < g.n; ++i) {
    const double w = g.wleb[i];
    B += w * pow_abs(v[i], exps.pstar);
    C += w * pow_abs(v[i], exps.q);
  }
  return model.mhat(A) / exps.p - B / exps.pstar - lambda * C / exps.q;
}

void phi_gradient(const std::vector<double>& v, const GridPtr& grid, double lambda,
                  const KirchhoffModel& model, const ProblemExponents& exps,
                  std::vector<double>& out) {
  const RadialGrid& g = *grid;
  const double inv_h = 1.0 / g.h;
  double A = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    const double d = (v[i + 1] - v[i]) * inv_h;
    A += g.wgrad[i] * pow_abs(d, exps.p);
  }
  const double MA = model.m(A);
  out.assign(g.n, 0.0);
  double prev = 0.0;
  for (int i = 0; i < g.n; ++i) {
    double cur = 0.0;
    if (i + 1 < g.n) {
      const double d = (v[i + 1] - v[i]) * inv_h;
      cur = g.wgrad[i] * signed_pow(d, exps.p - 1.0);
    }
    out[i] = MA * (prev - cur) * inv_h
           - g.wleb[i] * signed_pow(v[i], exps.pstar - 1.0)
           - lambda * g.wleb[i] * signed_pow(v[i], exps.q - 1.0);
    prev = cur;
  }
  out[g.n - 1] = 0.0;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_w(const std::vector<double>& v, const GridPtr& grid, const ProblemExponents& exps) {
  const RadialGrid& g = *grid;
  const double inv_h = 1.0 / g.h;
  double A = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    const double d = (v[i + 1] - v[i]) * inv_h;
    A += g.wgrad[i] * pow_abs(d, exps.p);
  }
  return std::pow(A, 1.0 / exps.p);
}

}  // namespace

RadialFunction best_dilation(const RadialFunction& u, double lambda,
                             const KirchhoffModel& model, const ProblemExponents& exps) {
  const FiberConstants fc = FiberConstants::of(u, exps);
  double best_t = 1.0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 400; ++i) {
    const double t = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * i / 399.0);
    const double v = psi(fc, lambda, t, model, exps);
    if (std::isfinite(v) && v < best_v) {
      best_v = v;
      best_t = t;
    }
  }
  RadialFunction out = u;
  for (double& x : out.v) x *= best_t;
  return out;
}

DescentResult descend(const RadialFunction& start, double lambda,
                      const KirchhoffModel& model, const ProblemExponents& exps,
                      const DescentConfig& cfg) {
  const GridPtr grid = start.grid;
  const StiffnessSolver K(*grid);

  DescentResult res;
  std::vector<double> u = start.v;
  u[grid->n - 1] = 0.0;
  double f = phi_value(u, grid, lambda, model, exps);
  std::vector<double> g, z, un(u.size()), gn;
  phi_gradient(u, grid, lambda, model, exps, g);

  double tau = 1.0;  // spectral step memory
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const double gmax = max_abs(g);
    if (cfg.record_trace) res.trace.push_back({double(it), f, gmax});
    if (gmax <= cfg.gtol * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }
    if (f < kDivergenceFloor) {
      res.diverged = true;
      break;
    }
    K.solve(g, z);
    const double gz = dot(g, z);  // = <z, K z> > 0 unless g = 0
    if (!(gz > 0.0)) {
      res.converged = true;  // gradient numerically zero in the K metric
      break;
    }
    double st = tau;
    bool accepted = false;
    double fn = f;
    while (st > 1e-18) {
      for (std::size_t i = 0; i < u.size(); ++i) un[i] = u[i] - st * z[i];
      fn = phi_value(un, grid, lambda, model, exps);
      if (fn <= f - cfg.armijo * st * gz) {
        accepted = true;
        break;
      }
      st *= cfg.backtrack;
    }
    if (!accepted) {
      res.converged = true;  // no descent possible at machine resolution
      break;
    }
    phi_gradient(un, grid, lambda, model, exps, gn);
    // Spectral (Barzilai-Borwein) step in the preconditioned metric:
    // s = -st z, <s, K s> = st^2 <g, z>, <s, y> with y the gradient change.
    double sy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sy += (un[i] - u[i]) * (gn[i] - g[i]);
    tau = sy > 0.0 ? std::clamp(st * st * gz / sy, 1e-10, 1e10) : 1.0;
    u.swap(un);
    g.swap(gn);
    f = fn;
  }
  res.u = RadialFunction(grid, std::move(u));
  res.phi = f;
  res.gmax = max_abs(g);
  res.iters = it;
  return res;
}

MinimizeResult minimize_global(double lambda, const KirchhoffModel& model,
                               const ProblemExponents& exps, const GridPtr& grid,
                               const DescentConfig& cfg,
                               std::span<const RadialFunction> warm_starts) {
  SplitMix64 rng(cfg.seed);
  std::vector<RadialFunction> starts;

  RadialFunction zero(grid);
  starts.push_back(zero);
  for (int k = 0; k < 2; ++k) {
    RadialFunction u = random_bump(grid, rng);
    for (double& x : u.v) x *= 1e-2;
    starts.push_back(std::move(u));
  }
  for (double eps : {1e-1, 1e-2, 3e-3}) {
    starts.push_back(bubble(eps, grid, exps, /*normalized=*/true));
  }
  for (int k = 0; k < cfg.multistarts; ++k) {
    RadialFunction u = random_bump(grid, rng);
    const double norm = std::pow(grad_norm_p(u, exps), 1.0 / exps.p);
    for (double& x : u.v) x /= norm;
    starts.push_back(std::move(u));
  }
  for (const RadialFunction& w : warm_starts)
    if (w.grid == grid && grad_norm_p(w, exps) > 0.0) starts.push_back(w);

  // Each nonzero start also contributes its best dilation along the ray.
  const std::size_t base = starts.size();
  for (std::size_t i = 1; i < base; ++i) {
    if (grad_norm_p(starts[i], exps) > 0.0)
      starts.push_back(best_dilation(starts[i], lambda, model, exps));
  }

  MinimizeResult out;
  out.starts = static_cast<int>(starts.size());
  bool first = true;
  for (const RadialFunction& s : starts) {
    DescentResult r = descend(s, lambda, model, exps, cfg);
    out.total_iters += r.iters;
    out.any_diverged = out.any_diverged || r.diverged;
    const double normp = grad_norm_p(r.u, exps);
    const bool nonzero = normp > 1e-8;
    if (nonzero && (!out.has_nonzero || r.phi < out.best_nonzero_value)) {
      out.best_nonzero = r.u;
      out.best_nonzero_value = r.phi;
      out.has_nonzero = true;
    }
    const double tie = 1e-12 * (1.0 + std::abs(out.value));
    if (first || r.phi < out.value - tie ||
        (std::abs(r.phi - out.value) <= tie && normp < grad_norm_p(out.u, exps))) {
      out.u = std::move(r.u);
      out.value = r.phi;
      out.best_start = s;
      first = false;
    }
  }
  if (out.any_diverged)
    throw NumericalError("minimize_global: descent diverged below -1e12; "
                         "coercivity hypotheses violated at these parameters");
  return out;
}

LocalMinimizeResult minimize_local(double lambda, const RadialFunction& warm_start,
                                   double delta, const KirchhoffModel& model,
                                   const ProblemExponents& exps, const DescentConfig& cfg) {
  if (!(delta > 0.0)) throw std::invalid_argument("minimize_local: delta must be positive");
  const GridPtr grid = warm_start.grid;
  const StiffnessSolver K(*grid);

  std::vector<double> u = warm_start.v;
  u[grid->n - 1] = 0.0;
  std::vector<double> diff(u.size()), g, z, un(u.size()), gn;
  double f = phi_value(u, grid, lambda, model, exps);
  phi_gradient(u, grid, lambda, model, exps, g);

  auto project = [&](std::vector<double>& v) -> double {
    for (std::size_t i = 0; i < v.size(); ++i) diff[i] = v[i] - warm_start.v[i];
    const double dist = norm_w(diff, grid, exps);
    if (dist > delta) {
      const double sc = delta / dist;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = warm_start.v[i] + sc * diff[i];
      return delta;
    }
    return dist;
  };

  LocalMinimizeResult out;
  double tau = 1.0;
  double dist = 0.0;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const double gmax = max_abs(g);
    if (gmax <= cfg.gtol * (1.0 + std::abs(f))) {
      out.converged = true;
      break;
    }
    K.solve(g, z);
    const double gz = dot(g, z);
    if (!(gz > 0.0)) {
      out.converged = true;
      break;
    }
    double st = tau;
    bool accepted = false;
    double fn = f;
    while (st > 1e-18) {
      for (std::size_t i = 0; i < u.size(); ++i) un[i] = u[i] - st * z[i];
      project(un);
      fn = phi_value(un, grid, lambda, model, exps);
      // With projection the Armijo model is unreliable; accept plain decrease.
      if (fn <= f - 1e-14 * (1.0 + std::abs(f))) {
        accepted = true;
        break;
      }
      st *= cfg.backtrack;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    phi_gradient(un, grid, lambda, model, exps, gn);
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double si = un[i] - u[i];
      sy += si * (gn[i] - g[i]);
      ss += si * si;
    }
    tau = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
    u.swap(un);
    g.swap(gn);
    f = fn;
  }
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - warm_start.v[i];
  dist = norm_w(diff, grid, exps);
  out.u = RadialFunction(grid, std::move(u));
  out.value = f;
  out.distance = dist;
  out.constraint_active = dist >= delta * (1.0 - 1e-8);
  out.iters = it;
  return out;
}

MountainPassResult mountain_pass(double lambda, const RadialFunction& endpoint,
                                 const KirchhoffModel& model, const ProblemExponents& exps,
                                 const MountainPassConfig& cfg) {
  const GridPtr grid = endpoint.grid;
  const StiffnessSolver K(*grid);
  const int P = cfg.path_points;
  if (P < 4) throw std::invalid_argument("mountain_pass: need at least 4 path points");

  const double endpoint_norm = std::pow(grad_norm_p(endpoint, exps), 1.0 / exps.p);
  if (!(endpoint_norm > 0.0))
    throw std::invalid_argument("mountain_pass: endpoint must be nonzero");
  const double endpoint_energy = phi_value(endpoint.v, grid, lambda, model, exps);

  // Rim estimate: scan scaled directions on spheres of several radii and keep
  // the radius whose worst sampled value is largest.  The endpoint direction
  // is always included; it is the one the initial path crosses.
  SplitMix64 rng(cfg.seed);
  std::vector<std::vector<double>> dirs;
  {
    std::vector<double> d = endpoint.v;
    const double nw = norm_w(d, grid, exps);
    for (double& x : d) x /= nw;
    dirs.push_back(std::move(d));
  }
  for (int k = 1; k < cfg.rim_directions; ++k) {
    RadialFunction b = random_bump(grid, rng);
    const double nw = norm_w(b.v, grid, exps);
    for (double& x : b.v) x /= nw;
    dirs.push_back(std::move(b.v));
  }
  MountainPassResult res;
  std::vector<double> probe(grid->n);
  for (int j = 0; j < cfg.rim_radii; ++j) {
    const double fr = std::exp(std::log(cfg.rim_factor_lo) +
                               (std::log(cfg.rim_factor_hi) - std::log(cfg.rim_factor_lo)) *
                                   j / (cfg.rim_radii - 1.0));
    const double R = fr * endpoint_norm;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) {
      for (int i = 0; i < grid->n; ++i) probe[i] = R * d[i];
      worst = std::min(worst, phi_value(probe, grid, lambda, model, exps));
    }
    if (worst > res.sigma) {
      res.sigma = worst;
      res.rim_radius = R;
    }
  }
  if (!(res.sigma > 0.0) || !(endpoint_energy < res.sigma))
    throw NumericalError("mountain_pass: geometry violated; check sigma and endpoint energy");

  // Piecewise-linear path from 0 to the endpoint.
  std::vector<std::vector<double>> path(P, std::vector<double>(grid->n, 0.0));
  for (int k = 0; k < P; ++k)
    for (int i = 0; i < grid->n; ++i) path[k][i] = (double(k) / (P - 1)) * endpoint.v[i];

  std::vector<double> len(P, 0.0), g, z, diff(grid->n), moved(grid->n);
  std::vector<std::vector<double>> spread(P, std::vector<double>(grid->n, 0.0));

  auto respread = [&]() {
    len[0] = 0.0;
    for (int k = 1; k < P; ++k) {
      for (int i = 0; i < grid->n; ++i) diff[i] = path[k][i] - path[k - 1][i];
      len[k] = len[k - 1] + norm_w(diff, grid, exps);
    }
    const double total = len[P - 1];
    if (!(total > 0.0)) return;
    spread[0] = path[0];
    spread[P - 1] = path[P - 1];
    int j = 0;
    for (int m = 1; m + 1 < P; ++m) {
      const double target = total * m / (P - 1);
      while (j + 2 < P && len[j + 1] < target) ++j;
      const double seg = std::max(len[j + 1] - len[j], 1e-300);
      const double tloc = (target - len[j]) / seg;
      for (int i = 0; i < grid->n; ++i)
        spread[m][i] = (1.0 - tloc) * path[j][i] + tloc * path[j + 1][i];
    }
    path.swap(spread);
  };

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    respread();
    int kmax = -1;
    double emax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < P; ++k) {
      const double e = phi_value(path[k], grid, lambda, model, exps);
      if (e > emax) {
        emax = e;
        kmax = k;
      }
    }
    if (kmax == 0 || kmax == P - 1)
      throw NumericalError("mountain_pass: path collapse (max at an endpoint); "
                           "check sigma and endpoint energy");
    res.c_lambda = emax;
    phi_gradient(path[kmax], grid, lambda, model, exps, g);
    res.residual = max_abs(g);
    if (cfg.record_trace) res.trace.push_back({double(it), emax, res.residual});
    if (res.residual <= cfg.residual_tol * (1.0 + std::abs(emax))) {
      res.converged = true;
      res.critical_point = RadialFunction(grid, path[kmax]);
      break;
    }
    K.solve(g, z);
    const double gz = dot(g, z);
    if (!(gz > 0.0)) {
      res.converged = true;
      res.critical_point = RadialFunction(grid, path[kmax]);
      break;
    }
    double st = 1.0;
    while (st > 1e-18) {
      for (int i = 0; i < grid->n; ++i) moved[i] = path[kmax][i] - st * z[i];
      if (phi_value(moved, grid, lambda, model, exps) <= emax - 1e-4 * st * gz) break;
      st *= 0.5;
    }
    path[kmax] = moved;
  }
  res.iters = it;
  if (!res.converged) {
    int kmax = 0;
    double emax = -std::numeric_limits<double>::infinity();
    for (int k = 1; k + 1 < P; ++k) {
      const double e = phi_value(path[k], grid, lambda, model, exps);
      if (e > emax) {
        emax = e;
        kmax = k;
      }
    }
    res.c_lambda = emax;
    phi_gradient(path[kmax], grid, lambda, model, exps, g);
    res.residual = max_abs(g);
    res.critical_point = RadialFunction(grid, path[kmax]);
  }
  res.path.reserve(P);
  for (int k = 0; k < P; ++k) res.path.emplace_back(grid, path[k]);
  return res;
}

NonexistenceReport certify_nonexistence(double lambda,
                                        std::span<const RadialFunction> sample,
                                        const KirchhoffModel& model,
                                        const ProblemExponents& exps,
                                        const DescentConfig& cfg) {
  NonexistenceReport rep;
  rep.samples = static_cast<int>(sample.size());
  rep.min_dpsi = std::numeric_limits<double>::infinity();
  rep.min_energy_found = 0.0;
  for (const RadialFunction& u : sample) {
    NonexistenceSample s;
    const FiberConstants fc = FiberConstants::of(u, exps);
    double mind = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4000; ++i) {
      const double t = std::exp(std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 3999.0);
      const double v = d_psi(fc, lambda, t, model, exps);
      if (std::isfinite(v)) mind = std::min(mind, v);
    }
    s.min_dpsi = mind;
    s.dpsi_positive = mind > 0.0;

    DescentResult r = descend(u, lambda, model, exps, cfg);
    s.final_norm_p = grad_norm_p(r.u, exps);
    s.collapsed = s.final_norm_p <= 1e-8;
    rep.min_energy_found = std::min(rep.min_energy_found, r.phi);

    if (!s.dpsi_positive) ++rep.dpsi_failures;
    if (!s.collapsed) ++rep.descent_failures;
    rep.min_dpsi = std::min(rep.min_dpsi, s.min_dpsi);
    rep.max_final_norm_p = std::max(rep.max_final_norm_p, s.final_norm_p);
    rep.detail.push_back(s);
  }
  rep.passed = rep.dpsi_failures == 0 && rep.descent_failures == 0;
  return rep;
}

}  // namespace klab
