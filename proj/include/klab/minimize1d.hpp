#ifndef KLAB_MINIMIZE1D_HPP
#define KLAB_MINIMIZE1D_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace klab {

struct ScanMinResult {
  double t = 0.0;          // argmin
  double value = 0.0;      // f(argmin)
  double scan_max = 0.0;   // max |f| seen on the scan grid (scale for tolerances)
  int scan_index = -1;     // grid index of the scan minimum
  bool interior = false;   // bracketed away from the scan ends
  bool endpoint_right = false;
  bool endpoint_left = false;
  int evaluations = 0;
};

/// Golden-section search on [lo, hi], assuming a minimum bracketed inside.
/// Shrinks until (hi - lo) <= reltol * max(|lo|, |hi|).
template <class F>
double golden_min(F&& f, double lo, double hi, double reltol,
                  double* fmin = nullptr) {
  static const double kInv = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - kInv * (hi - lo);
  double x2 = lo + kInv * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 400 && (hi - lo) > reltol * std::max(std::abs(lo), std::abs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1; f2 = f1;
      x1 = hi - kInv * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2; f1 = f2;
      x2 = lo + kInv * (hi - lo);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (lo + hi);
  if (fmin) *fmin = f(xm);
  return xm;
}

/// Minimum of f over a log-spaced grid on [lo, hi] followed by golden-section
/// refinement of the bracketing interval.  Non-finite values are excluded
/// from the scan.  When the minimum sits at a grid end the result is flagged
/// instead of refined; callers decide whether that means decay or a limit.
template <class F>
ScanMinResult log_scan_min(F&& f, double lo, double hi, int npoints,
                           double golden_reltol = 1e-12) {
  if (!(lo > 0.0) || !(hi > lo) || npoints < 3)
    throw std::invalid_argument("log_scan_min: bad scan range");
  const double llo = std::log(lo), lhi = std::log(hi);
  ScanMinResult out;
  std::vector<double> ts(npoints), fs(npoints);
  int best = -1;
  for (int i = 0; i < npoints; ++i) {
    const double t = std::exp(llo + (lhi - llo) * i / (npoints - 1));
    const double v = f(t);
    ts[i] = t;
    fs[i] = v;
    ++out.evaluations;
    if (!std::isfinite(v)) continue;
    out.scan_max = std::max(out.scan_max, std::abs(v));
    if (best < 0 || v < fs[best]) best = i;
  }
  if (best < 0) throw std::runtime_error("log_scan_min: no finite values on scan grid");
  out.scan_index = best;
  if (best == 0) {
    out.endpoint_left = true;
    out.t = ts[0];
    out.value = fs[0];
    return out;
  }
  if (best == npoints - 1 || !std::isfinite(fs[best + 1])) {
    out.endpoint_right = true;
    out.t = ts[best];
    out.value = fs[best];
    return out;
  }
  out.interior = true;
  double fm = 0.0;
  const double tm = golden_min(f, ts[best - 1], ts[best + 1], golden_reltol, &fm);
  out.evaluations += 2;  // plus golden iterations, not counted individually
  out.t = tm;
  out.value = std::min(fm, fs[best]);
  if (fs[best] < fm) out.t = ts[best];
  return out;
}

}  // namespace klab

#endif  // KLAB_MINIMIZE1D_HPP
