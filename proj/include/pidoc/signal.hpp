/**
 * @file signal.hpp
 * @brief Desired control trajectory x_D(t) = amplitude * sin(t) and its derivatives.
 */
#pragma once

#include <cmath>

#include "pidoc/error.hpp"

namespace pidoc {

/// Position, velocity and acceleration of the desired trajectory at one instant.
struct SignalSample {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct DesiredSignal {
  double amplitude = 2.0;

  void validate() const {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
      throw InvalidArgument("signal: amplitude must be finite and > 0");
  }
};

[[nodiscard]] inline SignalSample desired(const DesiredSignal& sig, double t) {
  const double s = std::sin(t);
  return {sig.amplitude * s, sig.amplitude * std::cos(t), -(sig.amplitude * s)};
}

}  // namespace pidoc
