#ifndef KLAB_SOLVER_HPP
#define KLAB_SOLVER_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "klab/fiber.hpp"
#include "klab/grid.hpp"
#include "klab/model.hpp"

namespace klab {

struct DescentConfig {
  int max_iters = 50000;
  double armijo = 1e-4;       // sufficient-decrease factor
  double backtrack = 0.5;     // step shrink factor
  double gtol = 1e-8;         // gradient max-norm tolerance, scaled by (1+|phi|)
  int multistarts = 8;        // random bump starts
  std::uint64_t seed = 42;
  bool record_trace = false;  // keep (iteration, energy, residual) rows
};

struct DescentResult {
  RadialFunction u;
  double phi = 0.0;
  double gmax = 0.0;
  int iters = 0;
  bool converged = false;
  bool diverged = false;  // energy fell below -1e12: hypothesis violation
  std::vector<std::array<double, 3>> trace;
};

/// Gradient descent on Phi_lambda with a stiffness-preconditioned direction,
/// spectral initial step and Armijo backtracking.
DescentResult descend(const RadialFunction& start, double lambda,
                      const KirchhoffModel& model, const ProblemExponents& exps,
                      const DescentConfig& cfg);

struct MinimizeResult {
  RadialFunction u;            // best over all starts (ties favor smaller norm)
  double value = 0.0;          // I_lambda estimate
  RadialFunction best_nonzero; // best start that stayed away from zero
  double best_nonzero_value = 0.0;
  bool has_nonzero = false;
  RadialFunction best_start;   // the start that produced the winner
  int starts = 0;
  int total_iters = 0;
  bool any_diverged = false;
};

/// Multistart global minimization.  Starts: zero and small perturbations of
/// it, bubbles, random bumps, optimal dilations of each along its ray, and
/// any caller-provided warm starts (continuation).
MinimizeResult minimize_global(double lambda, const KirchhoffModel& model,
                               const ProblemExponents& exps, const GridPtr& grid,
                               const DescentConfig& cfg,
                               std::span<const RadialFunction> warm_starts = {});

struct LocalMinimizeResult {
  RadialFunction u;
  double value = 0.0;
  double distance = 0.0;        // ||u - warm_start|| at termination
  bool constraint_active = false;  // stopped on the trust-ball boundary
  bool converged = false;
  int iters = 0;
};

/// Descent constrained to the ball ||u - warm_start|| <= delta; leaving the
/// ball projects back by radial scaling toward the warm start.  A boundary
/// stop means no interior local minimizer was certified.
LocalMinimizeResult minimize_local(double lambda, const RadialFunction& warm_start,
                                   double delta, const KirchhoffModel& model,
                                   const ProblemExponents& exps, const DescentConfig& cfg);

struct MountainPassConfig {
  int path_points = 32;
  int max_iters = 60000;
  double residual_tol = 1e-4;   // scaled by (1 + |c_lambda|)
  int rim_directions = 64;
  int rim_radii = 24;           // radius candidates, log-spaced fractions of ||endpoint||
  double rim_factor_lo = 1e-2;
  double rim_factor_hi = 0.9;
  std::uint64_t seed = 42;
  bool record_trace = false;
};

struct MountainPassResult {
  double c_lambda = 0.0;
  std::vector<RadialFunction> path;
  RadialFunction critical_point;
  double residual = 0.0;
  double sigma = 0.0;       // certified rim value used for the geometry check
  double rim_radius = 0.0;
  int iters = 0;
  bool converged = false;
  std::vector<std::array<double, 3>> trace;  // (iteration, level, residual)
};

/// Deforms the segment 0 -> endpoint by repeatedly pulling down its
/// maximal-energy point and re-spreading by arc length until the maximal
/// point is nearly critical.
MountainPassResult mountain_pass(double lambda, const RadialFunction& endpoint,
                                 const KirchhoffModel& model, const ProblemExponents& exps,
                                 const MountainPassConfig& cfg);

struct NonexistenceSample {
  double min_dpsi = 0.0;       // min of psi' over the dense dilation grid
  double final_norm_p = 0.0;   // ||u||^p after descent from this sample
  bool dpsi_positive = false;
  bool collapsed = false;
};

struct NonexistenceReport {
  bool passed = false;
  int samples = 0;
  int dpsi_failures = 0;
  int descent_failures = 0;
  double min_dpsi = 0.0;
  double max_final_norm_p = 0.0;
  double min_energy_found = 0.0;  // most negative descent energy observed
  std::vector<NonexistenceSample> detail;
};

/// For every sampled function checks that the fiber derivative is strictly
/// positive on a dense dilation grid and that descent from the sample
/// collapses to zero.  Any violation is reported with its witness.
NonexistenceReport certify_nonexistence(double lambda,
                                        std::span<const RadialFunction> sample,
                                        const KirchhoffModel& model,
                                        const ProblemExponents& exps,
                                        const DescentConfig& cfg);

/// Best dilation of u along its ray at the given lambda: the argmin of
/// psi over a log t-grid (used to seed descents).
RadialFunction best_dilation(const RadialFunction& u, double lambda,
                             const KirchhoffModel& model, const ProblemExponents& exps);

}  // namespace klab

#endif  // KLAB_SOLVER_HPP
