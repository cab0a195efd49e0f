#ifndef KLAB_MODEL_HPP
#define KLAB_MODEL_HPP

#include <string>

namespace klab {

/// Kirchhoff coefficient M(t) = a + b t^{alpha-1} with antiderivative
/// Mhat(t) = a t + (b/alpha) t^alpha.
struct KirchhoffModel {
  double a = 1.0;
  double b = 1.0;
  double alpha = 3.0;

  static KirchhoffModel make(double a, double b, double alpha);

  double m(double t) const;
  double mhat(double t) const;
  double mprime(double t) const;  // b (alpha-1) t^{alpha-2}
};

/// Dimension, growth exponents and the embedding constant in sup form,
/// S = sup ||u||_{pstar}^{pstar} / ||u||^{pstar}.
struct ProblemExponents {
  int dim = 4;          // space dimension N
  double p = 2.0;       // gradient exponent, 1 < p < N
  double pstar = 4.0;   // critical exponent p N / (N - p)
  double q = 3.0;       // subcritical perturbation exponent, p < q < pstar
  double S = 0.0;       // embedding constant (sup form)

  static ProblemExponents make(int dim, double p, double q);

  double sigma() const { return pstar / p; }  // N / (N - p)
};

/// Optimal constant S_N of the gradient embedding, inf ||grad u||_p^p / ||u||_{pstar}^p,
/// from the closed form of the extremal (Talenti) profile.
double sobolev_optimal_sn(int dim, double p);

/// Embedding constant in sup form: S = S_N^{-pstar/p}.
double sobolev_constant(int dim, double p);

struct ComparisonCp {
  double cp = 0.0;     // two-branch comparison constant
  double ratio = 0.0;  // cp / ((p/pstar) S); collapses to 1 at p = 2
};
ComparisonCp comparison_cp(const ProblemExponents& exps);

/// Result of the numeric infimum scan of a coefficient ratio over t > 0.
struct RatioScan {
  double value = 0.0;          // infimum (0 when the scan decays at an endpoint)
  double argmin = 0.0;         // location of the minimum (or last scanned t)
  bool decayed_to_zero = false;  // ratio keeps decreasing at the scan end
  bool at_infinity = false;      // infimum is a limit value at t -> infinity
};

/// inf_{t>0} Mhat(t)/t^{pstar/p}: independent oracle for the first threshold.
RatioScan inf_mhat_ratio(const KirchhoffModel& model, const ProblemExponents& exps);

/// inf_{t>0} M(t)/t^{pstar/p - 1}: analogous oracle for the strict condition.
RatioScan inf_m_ratio(const KirchhoffModel& model, const ProblemExponents& exps);

/// Outcome of the closed-form hypothesis checks for the model coefficient.
struct HypothesisReport {
  bool rho1 = false;   // M bounded below by a positive constant near 0
  bool rho2 = false;   // supercritical growth at infinity
  bool beta1 = false;  // inf Mhat(t)/t^{pstar/p} >= (p/pstar) S
  bool beta2 = false;  // superadditivity of Mhat
  bool gamma1 = false; // inf M(t)/t^{pstar/p-1} > S (strict condition)

  double rho2_witness_r = 0.0;  // witness exponent in (pstar, p alpha)
  double threshold_i = 0.0;     // closed-form threshold for beta1 (alpha > N/(N-p))
  double threshold_ii = 0.0;    // closed-form threshold for gamma1
  double lhs = 0.0;             // a^{(N(alpha-1)-alpha p)/p} b
  double beta1_margin = 0.0;
  double gamma1_margin = 0.0;
  bool degenerate_alpha = false;  // alpha <= N/(N-p): thresholds do not apply
  double mhat_infimum = 0.0;      // value the beta1 decision was made against
  std::string note;
};

HypothesisReport check_hypotheses(const KirchhoffModel& model, const ProblemExponents& exps);

}  // namespace klab

#endif  // KLAB_MODEL_HPP
