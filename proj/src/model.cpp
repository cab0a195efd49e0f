#include "klab/model.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "klab/minimize1d.hpp"

namespace klab {

KirchhoffModel KirchhoffModel::make(double a, double b, double alpha) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("KirchhoffModel: a must be positive");
  if (!(b > 0.0) || !std::isfinite(b))
    throw std::invalid_argument("KirchhoffModel: b must be positive");
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw std::invalid_argument("KirchhoffModel: alpha must exceed 1");
  return KirchhoffModel{a, b, alpha};
}

double KirchhoffModel::m(double t) const {
  if (t == 0.0) return a;  // alpha > 1 so the power term vanishes
  return a + b * std::pow(t, alpha - 1.0);
}

double KirchhoffModel::mhat(double t) const {
  if (t == 0.0) return 0.0;
  return a * t + (b / alpha) * std::pow(t, alpha);
}

double KirchhoffModel::mprime(double t) const {
  if (t == 0.0) return alpha > 2.0 ? 0.0 : (alpha == 2.0 ? b : std::numeric_limits<double>::infinity());
  return b * (alpha - 1.0) * std::pow(t, alpha - 2.0);
}

ProblemExponents ProblemExponents::make(int dim, double p, double q) {
  if (dim < 2) throw std::invalid_argument("ProblemExponents: dimension must be >= 2");
  if (!(p > 1.0) || !(p < dim))
    throw std::invalid_argument("ProblemExponents: need 1 < p < N");
  const double pstar = p * dim / (dim - p);
  if (!(q > p) || !(q < pstar))
    throw std::invalid_argument("ProblemExponents: need p < q < pstar");
  ProblemExponents e;
  e.dim = dim;
  e.p = p;
  e.pstar = pstar;
  e.q = q;
  e.S = sobolev_constant(dim, p);
  return e;
}

double sobolev_optimal_sn(int dim, double p) {
  if (!(p > 1.0) || !(p < dim))
    throw std::invalid_argument("sobolev_optimal_sn: need 1 < p < N");
  const double N = dim;
  // Best constant C of ||u||_{pstar} <= C ||grad u||_p on R^N (extremal profile
  // closed form); S_N = C^{-p}.
  const double lg = (std::lgamma(1.0 + N / 2.0) + std::lgamma(N) -
                     std::lgamma(N / p) - std::lgamma(1.0 + N - N / p)) / N;
  const double C = std::pow(M_PI, -0.5) * std::pow(N, -1.0 / p) *
                   std::pow((p - 1.0) / (N - p), 1.0 - 1.0 / p) * std::exp(lg);
  return std::pow(C, -p);
}

double sobolev_constant(int dim, double p) {
  const double pstar = p * dim / (dim - p);
  return std::pow(sobolev_optimal_sn(dim, p), -pstar / p);
}

ComparisonCp comparison_cp(const ProblemExponents& exps) {
  const double p = exps.p, pstar = exps.pstar, S = exps.S;
  ComparisonCp out;
  if (p >= 2.0) {
    out.ratio = std::pow(std::pow(2.0, p - 1.0) - 1.0, pstar / p);
  } else {
    out.ratio = std::pow(2.0, 2.0 * pstar - 1.0 - pstar / p);
  }
  out.cp = out.ratio * (p / pstar) * S;
  return out;
}

namespace {

// Scan the positive half-line for the infimum of a smooth ratio that blows up
// as t -> 0 and either blows up, levels off, or decays to 0 as t -> infinity.
// Base grid per the module defaults; the right end is extended while the
// ratio still falls at a meaningful log-log slope so that minima beyond the
// base window are still bracketed.
RatioScan scan_ratio(const std::function<double(double)>& f) {
  constexpr double kLo = 1e-8;
  constexpr int kPoints = 4000;
  constexpr double kSlopeTol = 1e-3;
  constexpr double kHiCap = 1e64;

  double hi = 1e8;
  RatioScan out;
  for (;;) {
    const ScanMinResult res = log_scan_min(f, kLo, hi, kPoints);
    if (res.interior) {
      out.value = res.value;
      out.argmin = res.t;
      return out;
    }
    if (res.endpoint_left) {
      // Not expected for these ratios (they blow up at 0); report as-is.
      out.value = res.value;
      out.argmin = res.t;
      return out;
    }
    // Minimum at the right end: estimate the local log-log slope there.
    const double t1 = res.t, t0 = res.t / 1.01;
    const double v1 = f(t1), v0 = f(t0);
    const double slope = (std::log(v1) - std::log(v0)) / std::log(t1 / t0);
    if (slope >= -kSlopeTol) {
      // Levelled off: the infimum is the limit value at infinity.
      out.value = v1;
      out.argmin = t1;
      out.at_infinity = true;
      return out;
    }
    if (hi >= kHiCap) {
      // Still falling at the cap: the ratio decays to zero.
      out.value = 0.0;
      out.argmin = t1;
      out.decayed_to_zero = true;
      return out;
    }
    hi *= 1e8;
  }
}

}  // namespace

RatioScan inf_mhat_ratio(const KirchhoffModel& model, const ProblemExponents& exps) {
  const double sigma = exps.sigma();
  return scan_ratio([&](double t) { return model.mhat(t) / std::pow(t, sigma); });
}

RatioScan inf_m_ratio(const KirchhoffModel& model, const ProblemExponents& exps) {
  const double sigma = exps.sigma();
  return scan_ratio([&](double t) { return model.m(t) / std::pow(t, sigma - 1.0); });
}

HypothesisReport check_hypotheses(const KirchhoffModel& model, const ProblemExponents& exps) {
  const double N = exps.dim;
  const double p = exps.p, pstar = exps.pstar, S = exps.S;
  const double a = model.a, b = model.b, alpha = model.alpha;

  HypothesisReport rep;
  rep.rho1 = model.m(0.0) > 0.0;
  rep.beta2 = alpha > 1.0;

  const double palpha = p * alpha;
  if (palpha > pstar) {
    rep.rho2 = true;
    rep.rho2_witness_r = 0.5 * (pstar + palpha);
  }

  const double D = N * (alpha - 1.0) - palpha;  // sign of alpha - N/(N-p)
  rep.lhs = std::pow(a, D / p) * b;

  const double dtol = 1e-12 * (N * (alpha - 1.0) + palpha);
  if (D > dtol) {
    const double E = (N - p) * (alpha - 1.0) / p;
    rep.threshold_i = std::pow((p / pstar) * S * D / (D + p), E) * alpha * p / D;
    rep.threshold_ii = std::pow(S * D / (D + p), E) * p / D;
    rep.beta1 = rep.lhs >= rep.threshold_i;
    rep.gamma1 = rep.lhs > rep.threshold_ii;
    rep.beta1_margin = rep.lhs - rep.threshold_i;
    rep.gamma1_margin = rep.lhs - rep.threshold_ii;
    // Implied infimum, handy for diagnostics.
    rep.mhat_infimum = (p / pstar) * S * std::pow(rep.lhs / rep.threshold_i, 1.0 / E);
    rep.note = "thresholds apply (alpha > N/(N-p))";
  } else if (std::abs(D) <= dtol) {
    rep.degenerate_alpha = true;
    rep.threshold_i = std::numeric_limits<double>::quiet_NaN();
    rep.threshold_ii = std::numeric_limits<double>::quiet_NaN();
    rep.mhat_infimum = b / alpha;  // limit of Mhat(t)/t^{pstar/p} at infinity
    rep.beta1 = rep.mhat_infimum >= (p / pstar) * S;
    rep.beta1_margin = rep.mhat_infimum - (p / pstar) * S;
    rep.gamma1 = b > S;  // limit of M(t)/t^{pstar/p-1} at infinity
    rep.gamma1_margin = b - S;
    rep.note = "alpha = N/(N-p): infimum equals b/alpha in the limit";
  } else {
    rep.degenerate_alpha = true;
    rep.threshold_i = std::numeric_limits<double>::quiet_NaN();
    rep.threshold_ii = std::numeric_limits<double>::quiet_NaN();
    rep.mhat_infimum = 0.0;  // ratio decays to zero
    rep.beta1 = false;
    rep.beta1_margin = -(p / pstar) * S;
    rep.gamma1 = false;
    rep.gamma1_margin = -S;
    rep.note = "alpha < N/(N-p): zero-infimum branch, beta1 fails";
  }
  return rep;
}

}  // namespace klab
