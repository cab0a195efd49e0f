#include "klab/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "klab/errors.hpp"
#include "klab/io.hpp"
#include "klab/minimize1d.hpp"
#include "klab/numeric.hpp"

namespace klab {

namespace {

void normalize_w(RadialFunction& u, const ProblemExponents& exps) {
  const double norm = std::pow(grad_norm_p(u, exps), 1.0 / exps.p);
  if (!(norm > 0.0)) throw std::invalid_argument("trial member must be nonzero");
  for (double& x : u.v) x /= norm;
}

void require_hypothesis(int level, const KirchhoffModel& model, const ProblemExponents& exps) {
  const HypothesisReport rep = check_hypotheses(model, exps);
  if (level == 0 && !rep.beta1)
    throw HypothesisError("lambda_star level 0 requires the weak coefficient bound; " + rep.note);
  if (level == 1 && !rep.gamma1)
    throw HypothesisError("lambda_star level 1 requires the strict coefficient bound; " + rep.note);
}

// Windowed quotient minimum for the refinement loop: cheap, unverified.
double fast_level_value(int level, const FiberConstants& fc, const KirchhoffModel& model,
                        const ProblemExponents& exps, double t_center) {
  FiberScanOptions o;
  o.t_lo = t_center * 1e-3;
  o.t_hi = t_center * 1e3;
  o.points = 200;
  o.golden_reltol = 1e-11;
  o.verify = false;
  const FiberSolution s = level == 0 ? lambda0_of_u(fc, model, exps, o)
                                     : lambda1_of_u(fc, model, exps, o);
  return level == 0 ? s.lambda0 : s.lambda1;
}

}  // namespace

void TrialFamily::add(RadialFunction u, FamilyKind kind, const ProblemExponents& exps) {
  normalize_w(u, exps);
  members.push_back(std::move(u));
  kinds.push_back(kind);
}

TrialFamily make_trial_family(const GridPtr& grid, const ProblemExponents& exps,
                              std::uint64_t seed, int n_bubbles, int n_bumps) {
  TrialFamily fam;
  fam.grid = grid;
  SplitMix64 rng(seed);
  for (int k = 0; k < n_bubbles; ++k) {
    const double le = std::log(1e-5) + (std::log(1e-1) - std::log(1e-5)) *
                                           (n_bubbles == 1 ? 0.0 : double(k) / (n_bubbles - 1));
    fam.add(bubble(std::exp(le), grid, exps, /*normalized=*/false), FamilyKind::bubbles, exps);
  }
  for (int k = 0; k < n_bumps; ++k)
    fam.add(random_bump(grid, rng), FamilyKind::bumps, exps);
  return fam;
}

void add_nodal_descent_members(TrialFamily& family, const KirchhoffModel& model,
                               const ProblemExponents& exps, const DescentConfig& cfg,
                               int passes) {
  if (family.members.empty()) throw std::invalid_argument("empty family");
  // Current best level-0 value over the family.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    const auto fc = FiberConstants::of(family.members[i], exps);
    const double v = lambda0_of_u(fc, model, exps).lambda0;
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  std::vector<RadialFunction> warm = {family.members[best_i]};
  for (int pass = 0; pass < passes; ++pass) {
    const double probe = best * (pass == 0 ? 1.05 : 1.01);
    const MinimizeResult mr = minimize_global(probe, model, exps, family.grid, cfg, warm);
    if (!mr.has_nonzero || mr.best_nonzero_value >= -1e-14) break;
    RadialFunction u = mr.best_nonzero;
    family.add(u, FamilyKind::nodal_descent, exps);
    const auto fc = FiberConstants::of(family.members.back(), exps);
    const double v = lambda0_of_u(fc, model, exps).lambda0;
    warm.assign(1, mr.best_nonzero);
    if (v >= best) break;
    best = v;
  }
}

ExtremalEstimate lambda_star(int level, const TrialFamily& family,
                             const KirchhoffModel& model, const ProblemExponents& exps,
                             const ExtremalConfig& cfg) {
  if (level != 0 && level != 1) throw std::invalid_argument("lambda_star: level must be 0 or 1");
  if (family.members.empty()) throw std::invalid_argument("lambda_star: empty family");
  require_hypothesis(level, model, exps);

  ExtremalEstimate est;
  est.method = "quotient-min";
  double t_opt = 1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    const auto fc = FiberConstants::of(family.members[i], exps);
    const FiberSolution s = level == 0 ? lambda0_of_u(fc, model, exps)
                                       : lambda1_of_u(fc, model, exps);
    const double v = level == 0 ? s.lambda0 : s.lambda1;
    est.family_values.push_back(v);
    if (i == 0 || v < est.family_best) {
      est.family_best = v;
      best_i = i;
      t_opt = level == 0 ? s.t0 : s.t1;
    }
  }

  RadialFunction u = family.members[best_i];
  double cur = est.family_best;

  if (cfg.refine) {
    // Projected descent on the normalized sphere: finite differences of the
    // level along random nodal directions, then a backtracked move.
    SplitMix64 rng(cfg.seed ^ 0x5bd1e995u);
    const int n = u.grid->n;
    std::vector<double> dir(n), grad_dir(cfg.subspace_dims), step_dir(n);
    std::vector<std::vector<double>> dirs(cfg.subspace_dims, std::vector<double>(n, 0.0));
    double step0 = 0.25;

    auto eval = [&](const RadialFunction& w) {
      RadialFunction c = w;
      normalize_w(c, exps);
      const auto fc = FiberConstants::of(c, exps);
      return fast_level_value(level, fc, model, exps, t_opt);
    };

    for (int it = 0; it < cfg.refine_iters; ++it) {
      for (int k = 0; k < cfg.subspace_dims; ++k) {
        double ss = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
          dirs[k][i] = rng.gaussian();
          ss += dirs[k][i] * dirs[k][i];
        }
        dirs[k][n - 1] = 0.0;
        const double inv = 1.0 / std::sqrt(ss);
        for (int i = 0; i < n; ++i) dirs[k][i] *= inv;
        RadialFunction up = u, um = u;
        axpy(cfg.fd_step, dirs[k], up.v);
        axpy(-cfg.fd_step, dirs[k], um.v);
        grad_dir[k] = (eval(up) - eval(um)) / (2.0 * cfg.fd_step);
      }
      std::fill(step_dir.begin(), step_dir.end(), 0.0);
      for (int k = 0; k < cfg.subspace_dims; ++k) axpy(-grad_dir[k], dirs[k], step_dir);
      const double sd = std::sqrt(dot(step_dir, step_dir));
      if (!(sd > 0.0)) break;
      for (double& x : step_dir) x /= sd;

      double st = step0;
      bool improved = false;
      while (st > 1e-10) {
        RadialFunction cand = u;
        axpy(st, step_dir, cand.v);
        normalize_w(cand, exps);
        const double v = eval(cand);
        if (v < cur - 1e-13 * (1.0 + std::abs(cur))) {
          u = std::move(cand);
          cur = v;
          improved = true;
          break;
        }
        st *= 0.5;
      }
      if (!improved) break;
      step0 = std::min(0.25, 2.0 * st);
      // Re-center the dilation window with a full evaluation once in a while.
      if ((it & 7) == 7) {
        const auto fc = FiberConstants::of(u, exps);
        FiberScanOptions o;
        o.verify = false;
        const FiberSolution s = level == 0 ? lambda0_of_u(fc, model, exps, o)
                                           : lambda1_of_u(fc, model, exps, o);
        t_opt = level == 0 ? s.t0 : s.t1;
      }
    }
  }

  // Official (verified) value of the refined member.
  normalize_w(u, exps);
  const auto fc = FiberConstants::of(u, exps);
  const FiberSolution s = level == 0 ? lambda0_of_u(fc, model, exps)
                                     : lambda1_of_u(fc, model, exps);
  est.value = level == 0 ? s.lambda0 : s.lambda1;
  est.t_opt = level == 0 ? s.t0 : s.t1;
  if (est.value > est.family_best) {  // refinement must never report worse
    est.value = est.family_best;
    est.argmin = family.members[best_i];
  } else {
    est.argmin = std::move(u);
  }
  est.refine_gain = est.family_best - est.value;
  return est;
}

ExtremalEstimate lambda0_star_by_bisection(const KirchhoffModel& model,
                                           const ProblemExponents& exps,
                                           const GridPtr& grid,
                                           const BisectionConfig& cfg,
                                           const TrialFamily* family) {
  require_hypothesis(0, model, exps);

  ExtremalEstimate est;
  est.method = "energy-bisection";

  TrialFamily local;
  if (!family) {
    local = make_trial_family(grid, exps, cfg.descent.seed, 6, 10);
    add_nodal_descent_members(local, model, exps, cfg.descent, 2);
    family = &local;
  }

  // Anchor: cheapest member by level-0 value gives a lambda where the
  // predicate is guaranteed up to descent quality.
  double fam_best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < family->members.size(); ++i) {
    const auto fc = FiberConstants::of(family->members[i], exps);
    const double v = lambda0_of_u(fc, model, exps).lambda0;
    if (v < fam_best) {
      fam_best = v;
      best_i = i;
    }
  }
  const RadialFunction& seed_member = family->members[best_i];

  SplitMix64 rng(cfg.descent.seed ^ 0x9e3779b9u);
  std::vector<RadialFunction> extra;
  for (int k = 0; k < 2; ++k) {
    RadialFunction b = random_bump(grid, rng);
    normalize_w(b, exps);
    extra.push_back(std::move(b));
  }

  std::vector<RadialFunction> warm;  // minimizers from the true side
  double anchor_energy = 0.0;

  auto predicate = [&](double lam, double tol) {
    ++est.predicate_evals;
    std::vector<RadialFunction> starts;
    for (const auto& w : warm) {
      starts.push_back(w);
      starts.push_back(best_dilation(w, lam, model, exps));
    }
    starts.push_back(best_dilation(seed_member, lam, model, exps));
    for (const auto& e : extra) starts.push_back(best_dilation(e, lam, model, exps));
    double best = 0.0;
    RadialFunction best_u;
    bool found = false;
    for (const auto& s : starts) {
      DescentResult r = descend(s, lam, model, exps, cfg.descent);
      if (r.phi < best) {
        best = r.phi;
        best_u = std::move(r.u);
        found = true;
      }
    }
    if (found && best < -tol) {
      warm.assign(1, std::move(best_u));
      anchor_energy = std::min(anchor_energy, best);
      return true;
    }
    return false;
  };

  double hi = std::min(fam_best * 1.05, cfg.lambda_max);
  const double tol0 = 1e-14;
  while (!predicate(hi, tol0)) {
    if (hi >= cfg.lambda_max) {
      est.hit_lambda_max = true;
      est.value = cfg.lambda_max;
      est.bracket_lo = cfg.lambda_max;
      est.bracket_hi = std::numeric_limits<double>::infinity();
      return est;
    }
    hi = std::min(hi * 2.0, cfg.lambda_max);
  }
  const double tol = std::max(1e-14, 1e-9 * std::abs(anchor_energy));

  double lo = 0.0;
  while (hi - lo > cfg.width_rel * hi) {
    const double mid = 0.5 * (lo + hi);
    if (predicate(mid, tol))
      hi = mid;
    else
      lo = mid;
  }
  est.value = lo;  // certified-false edge of the bracket
  est.bracket_lo = lo;
  est.bracket_hi = hi;
  if (!warm.empty()) est.argmin = warm.front();
  return est;
}

ExtremalReport estimate_extremal(const KirchhoffModel& model, const ProblemExponents& exps,
                                 const GridPtr& grid, std::uint64_t seed) {
  ExtremalReport rep;
  DescentConfig dcfg;
  dcfg.seed = seed;

  TrialFamily family = make_trial_family(grid, exps, seed);
  add_nodal_descent_members(family, model, exps, dcfg, 2);

  ExtremalConfig ecfg;
  ecfg.seed = seed;
  rep.quotient0 = lambda_star(0, family, model, exps, ecfg);
  family.add(rep.quotient0.argmin, FamilyKind::nodal_descent, exps);
  rep.quotient1 = lambda_star(1, family, model, exps, ecfg);

  BisectionConfig bcfg;
  bcfg.descent = dcfg;
  rep.bisection0 = lambda0_star_by_bisection(model, exps, grid, bcfg, &family);
  const double denom = std::max(std::abs(rep.bisection0.value), 1e-300);
  rep.agreement_rel = std::abs(rep.quotient0.value - rep.bisection0.value) / denom;
  return rep;
}

std::string bubble_lambda0_csv(const KirchhoffModel& model, const ProblemExponents& exps,
                               const GridPtr& grid, const std::vector<double>& eps_list) {
  CsvWriter csv({"eps", "lambda0"});
  for (double eps : eps_list) {
    RadialFunction u = bubble(eps, grid, exps, /*normalized=*/true);
    const auto fc = FiberConstants::of(u, exps);
    csv.row({eps, lambda0_of_u(fc, model, exps).lambda0});
  }
  return csv.str();
}

}  // namespace klab
