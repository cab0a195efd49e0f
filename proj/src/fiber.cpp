#include "klab/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "klab/errors.hpp"
#include "klab/minimize1d.hpp"
#include "klab/numeric.hpp"

namespace klab {

FiberConstants FiberConstants::of(const RadialFunction& u, const ProblemExponents& exps) {
  FiberConstants fc;
  fc.A = grad_norm_p(u, exps);
  fc.B = lebesgue_norm(u, exps.pstar);
  fc.C = lebesgue_norm(u, exps.q);
  if (!(fc.A > 0.0) || !(fc.B > 0.0) || !(fc.C > 0.0))
    throw std::invalid_argument("FiberConstants: function must be nonzero");
  // Discrete embedding sanity: B <= S A^{pstar/p} up to quadrature slack.
  const double bound = exps.S * std::pow(fc.A, exps.pstar / exps.p);
  if (fc.B > bound * 1.05)
    throw NumericalError("FiberConstants: embedding bound violated beyond quadrature slack");
  return fc;
}

double psi(const FiberConstants& fc, double lambda, double t,
           const KirchhoffModel& model, const ProblemExponents& exps) {
  if (t == 0.0) return 0.0;
  const double tp = pow_abs(t, exps.p);
  return model.mhat(tp * fc.A) / exps.p
       - pow_abs(t, exps.pstar) / exps.pstar * fc.B
       - lambda * pow_abs(t, exps.q) / exps.q * fc.C;
}

double d_psi(const FiberConstants& fc, double lambda, double t,
             const KirchhoffModel& model, const ProblemExponents& exps) {
  if (t == 0.0) return 0.0;
  const double tp = pow_abs(t, exps.p);
  return model.m(tp * fc.A) * fc.A * pow_abs(t, exps.p - 1.0)
       - fc.B * pow_abs(t, exps.pstar - 1.0)
       - lambda * fc.C * pow_abs(t, exps.q - 1.0);
}

double dd_psi(const FiberConstants& fc, double lambda, double t,
              const KirchhoffModel& model, const ProblemExponents& exps) {
  const double tp = pow_abs(t, exps.p);
  const double s = tp * fc.A;
  return model.mprime(s) * exps.p * fc.A * fc.A * pow_abs(t, 2.0 * exps.p - 2.0)
       + model.m(s) * fc.A * (exps.p - 1.0) * pow_abs(t, exps.p - 2.0)
       - fc.B * (exps.pstar - 1.0) * pow_abs(t, exps.pstar - 2.0)
       - lambda * fc.C * (exps.q - 1.0) * pow_abs(t, exps.q - 2.0);
}

double lambda_quotient(const FiberConstants& fc, double t,
                       const KirchhoffModel& model, const ProblemExponents& exps) {
  const double tp = pow_abs(t, exps.p);
  const double num = model.mhat(tp * fc.A) / exps.p
                   - pow_abs(t, exps.pstar) / exps.pstar * fc.B;
  return exps.q * num / (pow_abs(t, exps.q) * fc.C);
}

double theta_quotient(const FiberConstants& fc, double t,
                      const KirchhoffModel& model, const ProblemExponents& exps) {
  const double tp = pow_abs(t, exps.p);
  const double num = model.m(tp * fc.A) * fc.A * pow_abs(t, exps.p - 1.0)
                   - fc.B * pow_abs(t, exps.pstar - 1.0);
  return num / (fc.C * pow_abs(t, exps.q - 1.0));
}

namespace {

struct QuotientMin {
  double lambda = 0.0;
  double t = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

// Scan + golden refinement of a smooth quotient with endpoint blow-up.
// Multiple scan minima within tolerance are each refined and the smallest
// dilation wins (the level is unique, the dilation need not be).
template <class F>
QuotientMin quotient_min(F&& f, const FiberScanOptions& opt) {
  double lo = opt.t_lo, hi = opt.t_hi;
  for (int ext = 0;; ++ext) {
    const int n = opt.points;
    std::vector<double> ts(n), fs(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    int best = -1;
    for (int i = 0; i < n; ++i) {
      ts[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
      fs[i] = f(ts[i]);
      if (!std::isfinite(fs[i])) continue;
      if (best < 0 || fs[i] < fs[best]) best = i;
    }
    if (best < 0) throw NumericalError("fiber scan: no finite quotient values");
    const bool at_left = best == 0;
    const bool at_right = best == n - 1 || !std::isfinite(fs[best + 1]);
    if ((at_left || at_right) && opt.allow_extend && ext < 6) {
      if (at_left) lo *= 1e-6;
      if (at_right) hi *= 1e6;
      continue;
    }
    if (at_left || at_right)
      throw NumericalError("fiber scan: failed to bracket a minimum");

    // Collect near-minimal local minima.
    const double vtol = 1e-9 * (std::abs(fs[best]) + 1e-300);
    QuotientMin out;
    out.evaluations = n;
    bool have = false;
    for (int i = 1; i + 1 < n; ++i) {
      if (!std::isfinite(fs[i]) || !std::isfinite(fs[i - 1]) || !std::isfinite(fs[i + 1]))
        continue;
      if (fs[i] > fs[best] + vtol) continue;
      if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1]) {
        double fm = 0.0;
        const double tm = golden_min(f, ts[i - 1], ts[i + 1], opt.golden_reltol, &fm);
        if (!have || fm < out.lambda - vtol ||
            (std::abs(fm - out.lambda) <= vtol && tm < out.t)) {
          out.lambda = fm;
          out.t = tm;
          out.bracket_lo = ts[i - 1];
          out.bracket_hi = ts[i + 1];
          have = true;
        }
      }
    }
    if (!have) {  // plateau fallback: refine around the global scan minimum
      double fm = 0.0;
      const double tm = golden_min(f, ts[best - 1], ts[best + 1], opt.golden_reltol, &fm);
      out.lambda = fm;
      out.t = tm;
      out.bracket_lo = ts[best - 1];
      out.bracket_hi = ts[best + 1];
    }
    return out;
  }
}

}  // namespace

FiberSolution lambda0_of_u(const FiberConstants& fc, const KirchhoffModel& model,
                           const ProblemExponents& exps, const FiberScanOptions& opt) {
  const auto qm = quotient_min(
      [&](double t) { return lambda_quotient(fc, t, model, exps); }, opt);
  FiberSolution sol;
  sol.lambda0 = qm.lambda;
  sol.t0 = qm.t;
  sol.bracket_lo = qm.bracket_lo;
  sol.bracket_hi = qm.bracket_hi;
  sol.evaluations = qm.evaluations;
  if (opt.verify) {
    // The returned pair must satisfy: psi = 0 and psi' = 0 at t0, and
    // psi >= 0 on the whole ray, all at the level lambda0.
    double scale = 0.0, worst = 0.0;
    const double llo = std::log(opt.t_lo), lhi = std::log(opt.t_hi);
    for (int i = 0; i < opt.points; ++i) {
      const double t = std::exp(llo + (lhi - llo) * i / (opt.points - 1));
      const double v = psi(fc, sol.lambda0, t, model, exps);
      if (!std::isfinite(v)) continue;
      scale = std::max(scale, std::abs(v));
      worst = std::min(worst, v);
    }
    sol.scale = scale;
    const double tol = 1e-10 * scale;
    if (std::abs(psi(fc, sol.lambda0, sol.t0, model, exps)) > tol ||
        worst < -tol ||
        std::abs(d_psi(fc, sol.lambda0, sol.t0, model, exps)) * sol.t0 > 1e3 * tol)
      throw NumericalError("lambda0_of_u: zero-touch system residual exceeds tolerance");
  }
  return sol;
}

FiberSolution lambda1_of_u(const FiberConstants& fc, const KirchhoffModel& model,
                           const ProblemExponents& exps, const FiberScanOptions& opt) {
  const auto qm = quotient_min(
      [&](double t) { return theta_quotient(fc, t, model, exps); }, opt);
  FiberSolution sol;
  sol.lambda1 = qm.lambda;
  sol.t1 = qm.t;
  sol.bracket_lo = qm.bracket_lo;
  sol.bracket_hi = qm.bracket_hi;
  sol.evaluations = qm.evaluations;
  if (opt.verify) {
    double scale = 0.0, worst = 0.0;
    const double llo = std::log(opt.t_lo), lhi = std::log(opt.t_hi);
    for (int i = 0; i < opt.points; ++i) {
      const double t = std::exp(llo + (lhi - llo) * i / (opt.points - 1));
      const double v = d_psi(fc, sol.lambda1, t, model, exps);
      if (!std::isfinite(v)) continue;
      scale = std::max(scale, std::abs(v));
      worst = std::min(worst, v);
    }
    sol.scale = scale;
    const double tol = 1e-10 * scale;
    if (std::abs(d_psi(fc, sol.lambda1, sol.t1, model, exps)) > tol || worst < -tol)
      throw NumericalError("lambda1_of_u: derivative-touch system residual exceeds tolerance");
  }
  return sol;
}

std::string fiber_profile_csv(const FiberConstants& fc, double lambda,
                              const KirchhoffModel& model, const ProblemExponents& exps,
                              double t_lo, double t_hi, int points) {
  std::string out = "t,psi,dpsi,Lambda,Theta\n";
  char buf[220];
  const double llo = std::log(t_lo), lhi = std::log(t_hi);
  for (int i = -1; i < points; ++i) {
    // include t = 0 as the first row
    const double t = i < 0 ? 0.0 : std::exp(llo + (lhi - llo) * i / (points - 1));
    const double ps = psi(fc, lambda, t, model, exps);
    const double dp = d_psi(fc, lambda, t, model, exps);
    const double la = t > 0.0 ? lambda_quotient(fc, t, model, exps)
                              : std::numeric_limits<double>::quiet_NaN();
    const double th = t > 0.0 ? theta_quotient(fc, t, model, exps)
                              : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e,%.16e\n", t, ps, dp, la, th);
    out += buf;
  }
  return out;
}

}  // namespace klab
