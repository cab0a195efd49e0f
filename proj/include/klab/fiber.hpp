#ifndef KLAB_FIBER_HPP
#define KLAB_FIBER_HPP

#include <string>

#include "klab/grid.hpp"
#include "klab/model.hpp"

namespace klab {

/// The three integrals that determine the fiber map of a function for the
/// model nonlinearities: A = ||u||^p, B = ||u||_{pstar}^{pstar}, C = ||u||_q^q.
struct FiberConstants {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;

  static FiberConstants of(const RadialFunction& u, const ProblemExponents& exps);
};

/// psi_{lambda,u}(t) = Phi_lambda(t u) in closed form, with derivatives.
double psi(const FiberConstants& fc, double lambda, double t,
           const KirchhoffModel& model, const ProblemExponents& exps);
double d_psi(const FiberConstants& fc, double lambda, double t,
             const KirchhoffModel& model, const ProblemExponents& exps);
double dd_psi(const FiberConstants& fc, double lambda, double t,
              const KirchhoffModel& model, const ProblemExponents& exps);

/// Lambda_u(t): the level of lambda at which the fiber vanishes at t.
/// Its infimum over t > 0 is lambda0(u).
double lambda_quotient(const FiberConstants& fc, double t,
                       const KirchhoffModel& model, const ProblemExponents& exps);

/// Theta_u(t): the level of lambda at which the fiber derivative vanishes at t.
/// Its infimum over t > 0 is lambda1(u).
double theta_quotient(const FiberConstants& fc, double t,
                      const KirchhoffModel& model, const ProblemExponents& exps);

struct FiberScanOptions {
  double t_lo = 1e-6;
  double t_hi = 1e6;
  int points = 4000;
  double golden_reltol = 1e-12;
  bool verify = true;       // check the defining system at the returned pair
  bool allow_extend = true; // extend the window when the minimum is not bracketed
};

struct FiberSolution {
  double lambda0 = 0.0;
  double t0 = 0.0;
  double lambda1 = 0.0;
  double t1 = 0.0;
  // scan diagnostics
  double scale = 0.0;       // max |psi| over the scan grid at the solution level
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

/// Smallest lambda at which the fiber infimum touches zero, with the touching
/// dilation.  Realized as the infimum of Lambda_u over t > 0.
FiberSolution lambda0_of_u(const FiberConstants& fc, const KirchhoffModel& model,
                           const ProblemExponents& exps, const FiberScanOptions& opt = {});

/// Smallest lambda at which the fiber derivative touches zero (infimum of
/// Theta_u); below it the fiber is strictly increasing.
FiberSolution lambda1_of_u(const FiberConstants& fc, const KirchhoffModel& model,
                           const ProblemExponents& exps, const FiberScanOptions& opt = {});

/// CSV profile (t, psi, dpsi, Lambda, Theta) over a log-spaced t-grid.
std::string fiber_profile_csv(const FiberConstants& fc, double lambda,
                              const KirchhoffModel& model, const ProblemExponents& exps,
                              double t_lo = 1e-3, double t_hi = 1e3, int points = 400);

}  // namespace klab

#endif  // KLAB_FIBER_HPP
