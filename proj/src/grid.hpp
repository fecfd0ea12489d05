#pragma once

#include <cmath>
#include <cstddef>

#include "mdpode/errors.hpp"

namespace mdpode::detail {

// Number of uniform steps covering `span` with spacing at most `step`.
inline std::size_t step_count(double span, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ParameterError("integrator: step must be positive and finite");
  }
  if (!std::isfinite(span)) throw ParameterError("integrator: span must be finite");
  // Tolerate rounding in spans that are integer multiples of the step.
  return static_cast<std::size_t>(std::ceil(std::abs(span) / step - 1e-9));
}

}  // namespace mdpode::detail
