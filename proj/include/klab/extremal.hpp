#ifndef KLAB_EXTREMAL_HPP
#define KLAB_EXTREMAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "klab/fiber.hpp"
#include "klab/grid.hpp"
#include "klab/model.hpp"
#include "klab/solver.hpp"

namespace klab {

enum class FamilyKind { bubbles, bumps, nodal_descent };

/// Trial functions for extremal-parameter estimation, each normalized to
/// ||u|| = 1 (harmless by the zero-homogeneity of the per-function levels).
struct TrialFamily {
  GridPtr grid;
  std::vector<RadialFunction> members;
  std::vector<FamilyKind> kinds;

  void add(RadialFunction u, FamilyKind kind, const ProblemExponents& exps);
};

/// Default family: bubbles on a log eps-grid plus random smooth bumps.
TrialFamily make_trial_family(const GridPtr& grid, const ProblemExponents& exps,
                              std::uint64_t seed, int n_bubbles = 12, int n_bumps = 20);

/// Appends minimizers of the energy found slightly above the current family
/// estimate (parameter continuation); these dominate the random members.
void add_nodal_descent_members(TrialFamily& family, const KirchhoffModel& model,
                               const ProblemExponents& exps, const DescentConfig& cfg,
                               int passes = 2);

struct ExtremalConfig {
  int subspace_dims = 40;   // random directions per refinement iteration
  int refine_iters = 200;
  double fd_step = 1e-6;
  std::uint64_t seed = 42;
  bool refine = true;
};

struct ExtremalEstimate {
  double value = 0.0;
  std::string method;          // "quotient-min" or "energy-bisection"
  RadialFunction argmin;       // minimizing function (normalized for quotient-min)
  double t_opt = 0.0;          // touching dilation at the argmin (quotient-min)

  // diagnostics
  std::vector<double> family_values;
  double family_best = 0.0;
  double refine_gain = 0.0;
  double bracket_lo = 0.0;     // bisection bracket (quotient-min: unused)
  double bracket_hi = 0.0;
  int predicate_evals = 0;
  bool hit_lambda_max = false;
};

/// min over the family of the per-function level (level 0 or 1), then
/// projected nodal descent on the best member restricted to ||u|| = 1 with
/// finite differences in a random low-dimensional subspace.
ExtremalEstimate lambda_star(int level, const TrialFamily& family,
                             const KirchhoffModel& model, const ProblemExponents& exps,
                             const ExtremalConfig& cfg = {});

struct BisectionConfig {
  double lambda_max = 1e3;
  double width_rel = 1e-3;   // bracket width relative to the estimate
  DescentConfig descent;
};

/// Bisection of lambda on the predicate "multistart minimization finds
/// negative energy", warm-started by continuation from the true side.
/// The reported value is the certified-false bracket edge.
ExtremalEstimate lambda0_star_by_bisection(const KirchhoffModel& model,
                                           const ProblemExponents& exps,
                                           const GridPtr& grid,
                                           const BisectionConfig& cfg = {},
                                           const TrialFamily* family = nullptr);

struct ExtremalReport {
  ExtremalEstimate quotient0;
  ExtremalEstimate quotient1;
  ExtremalEstimate bisection0;
  double agreement_rel = 0.0;  // |quotient0 - bisection0| / bisection0
};

/// Full pipeline: family construction, continuation enrichment, both
/// estimators for level 0 and the quotient estimator for level 1.
ExtremalReport estimate_extremal(const KirchhoffModel& model, const ProblemExponents& exps,
                                 const GridPtr& grid, std::uint64_t seed);

/// CSV of (eps, lambda0(u_eps)) along a bubble curve.
std::string bubble_lambda0_csv(const KirchhoffModel& model, const ProblemExponents& exps,
                               const GridPtr& grid, const std::vector<double>& eps_list);

}  // namespace klab

#endif  // KLAB_EXTREMAL_HPP
