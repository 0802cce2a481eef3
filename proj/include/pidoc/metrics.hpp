/**
 * @file metrics.hpp
 * @brief Run-level estimates (relative mean error, mean loss, normalized time) and error traces.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "pidoc/error.hpp"

namespace pidoc {

/**
 * |mean_i (x_pred_i - x_D_i) / x_D_i| over the samples with |x_D_i| >= eps.
 *
 * The desired position crosses zero twice per period, so near-zero samples are
 * excluded from both the sum and the count.
 */
[[nodiscard]] inline double abs_mean_error(std::span<const double> x_pred, std::span<const double> x_desired,
                                           double eps) {
  if (x_pred.size() != x_desired.size()) throw LengthMismatch("abs_mean_error", x_pred.size(), x_desired.size());
  if (!(eps > 0.0)) throw InvalidArgument("abs_mean_error: eps must be > 0");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x_pred.size(); ++i) {
    if (std::abs(x_desired[i]) < eps) continue;
    acc += (x_pred[i] - x_desired[i]) / x_desired[i];
    ++count;
  }
  if (count == 0) throw AllPointsMasked("abs_mean_error: every sample has |x_D| < eps");
  return std::abs(acc / static_cast<double>(count));
}

[[nodiscard]] inline double mean_loss(std::span<const double> history) {
  if (history.empty()) throw EmptyHistory("mean_loss: empty loss history");
  double acc = 0.0;
  for (double v : history) acc += v;
  return acc / static_cast<double>(history.size());
}

/// Per-iteration wall time of a run relative to the benchmark's.
[[nodiscard]] inline double normalized_time(double seconds, int iterations, double bench_seconds, int bench_iterations) {
  if (!(seconds > 0.0) || iterations <= 0 || !(bench_seconds > 0.0) || bench_iterations <= 0)
    throw InvalidArgument("normalized_time: all inputs must be positive");
  return (seconds / iterations) / (bench_seconds / bench_iterations);
}

struct ErrorTraces {
  std::vector<double> velocity;      // v_D - v_pred
  std::vector<double> acceleration;  // a_D - a_pred
};

[[nodiscard]] inline ErrorTraces error_traces(std::span<const double> v_pred, std::span<const double> a_pred,
                                              std::span<const double> v_desired, std::span<const double> a_desired) {
  if (v_pred.size() != v_desired.size()) throw LengthMismatch("error_traces (velocity)", v_pred.size(), v_desired.size());
  if (a_pred.size() != a_desired.size())
    throw LengthMismatch("error_traces (acceleration)", a_pred.size(), a_desired.size());
  if (v_pred.size() != a_pred.size()) throw LengthMismatch("error_traces", v_pred.size(), a_pred.size());
  ErrorTraces out;
  out.velocity.resize(v_pred.size());
  out.acceleration.resize(a_pred.size());
  for (std::size_t i = 0; i < v_pred.size(); ++i) {
    out.velocity[i] = v_desired[i] - v_pred[i];
    out.acceleration[i] = a_desired[i] - a_pred[i];
  }
  return out;
}

/**
 * Angular frequency in [omega_lo, omega_hi] at which the Hann-windowed,
 * mean-removed signal has the largest Fourier amplitude. Scans a uniform
 * frequency grid of spacing `step`; samples may be non-uniform in t.
 */
[[nodiscard]] inline double dominant_angular_frequency(std::span<const double> t, std::span<const double> signal,
                                                       double omega_lo, double omega_hi, double step = 1e-3) {
  if (t.size() != signal.size()) throw LengthMismatch("dominant_angular_frequency", t.size(), signal.size());
  if (t.size() < 2) throw InvalidArgument("dominant_angular_frequency: need at least two samples");
  if (!(omega_hi > omega_lo) || !(step > 0.0)) throw InvalidArgument("dominant_angular_frequency: bad frequency range");
  const std::size_t n = t.size();
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(n);
  const double t0 = t.front();
  const double span = t.back() - t.front();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (t[i] - t0) / span);
    w[i] = hann * (signal[i] - mean);
  }
  double best_omega = omega_lo;
  double best_power = -1.0;
  const auto steps = static_cast<std::size_t>(std::floor((omega_hi - omega_lo) / step));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double omega = omega_lo + static_cast<double>(k) * step;
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += w[i] * std::cos(omega * t[i]);
      im += w[i] * std::sin(omega * t[i]);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  return best_omega;
}

}  // namespace pidoc
