#ifndef KLAB_NUMERIC_HPP
#define KLAB_NUMERIC_HPP

#include <cmath>

namespace klab {

/// |x|^e with fast paths for small integer exponents (the default parameter
/// set uses 2, 3, 4 and 6 in the hot loops).
inline double pow_abs(double x, double e) {
  const double ax = std::abs(x);
  const double ri = std::nearbyint(e);
  if (ri == e && ri >= 0.0 && ri <= 16.0) {
    double acc = 1.0, base = ax;
    int k = static_cast<int>(ri);
    while (k > 0) {
      if (k & 1) acc *= base;
      base *= base;
      k >>= 1;
    }
    return acc;
  }
  return std::pow(ax, e);
}

/// sign(x) |x|^e, the derivative pattern of |x|^{e+1}/(e+1); returns 0 at 0.
inline double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  const double m = pow_abs(x, e);
  return x < 0.0 ? -m : m;
}

}  // namespace klab

#endif  // KLAB_NUMERIC_HPP
