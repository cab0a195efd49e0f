#ifndef KLAB_ERRORS_HPP
#define KLAB_ERRORS_HPP

#include <stdexcept>

namespace klab {

/// A standing hypothesis on the coefficients fails; the requested analysis
/// is outside its validity regime.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (bracketing, divergence, geometry violation).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace klab

#endif  // KLAB_ERRORS_HPP
