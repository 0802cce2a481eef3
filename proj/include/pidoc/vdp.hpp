/**
 * @file vdp.hpp
 * @brief Unforced van der Pol oscillator and its adaptive Dormand-Prince integrator.
 *
 * The second-order equation x'' - mu (1 - x^2) x' + x = 0 is integrated as the
 * first-order system (x, v)' = (v, mu (1 - x^2) v - x). Output is sampled on a
 * uniform grid through cubic Hermite interpolation of the accepted steps.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"

namespace pidoc {

/// Phase-space point (position, velocity).
struct State {
  double x = 0.0;
  double v = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct VdpConfig {
  double mu = 1.0;
  State initial{1.0, 0.0};
  double t_end = 30.0;
  std::size_t n_points = 3000;
  double rtol = 1e-6;
  double atol = 1e-10;

  void validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("vdp: mu must be finite and >= 0");
    if (n_points < 2) throw InvalidArgument("vdp: n_points must be >= 2");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("vdp: t_end must be > 0");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("vdp: rtol and atol must be > 0");
    if (!std::isfinite(initial.x) || !std::isfinite(initial.v)) throw InvalidArgument("vdp: initial state must be finite");
  }
};

/// Sampled solution of the uncontrolled oscillator; the training data.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;

  [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// Right-hand side of the first-order van der Pol system.
[[nodiscard]] constexpr State vdp_rhs(State s, double mu) {
  return {s.v, mu * (1.0 - s.x * s.x) * s.v - s.x};
}

/// Uniform grid t_i = t_end * i / (n - 1); the last entry is exactly t_end.
[[nodiscard]] inline std::vector<double> uniform_grid(double t_end, std::size_t n) {
  std::vector<double> t(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_end * (static_cast<double>(i) / denom);
  t.back() = t_end;
  return t;
}

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat, where b_hat is the embedded fourth-order solution.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline State axpy(State y, double h, std::initializer_list<std::pair<double, State>> terms) {
  State acc{0.0, 0.0};
  for (const auto& [c, k] : terms) {
    acc.x += c * k.x;
    acc.v += c * k.v;
  }
  return {y.x + h * acc.x, y.v + h * acc.v};
}

// Cubic Hermite interpolant on [t0, t0 + h] from endpoint values and slopes.
inline State hermite(double theta, double h, State y0, State f0, State y1, State f1) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return {h00 * y0.x + h10 * h * f0.x + h01 * y1.x + h11 * h * f1.x,
          h00 * y0.v + h10 * h * f0.v + h01 * y1.v + h11 * h * f1.v};
}

}  // namespace detail

/**
 * Integrates the unforced oscillator with an adaptive Dormand-Prince 5(4) pair.
 *
 * Step size starts at 1e-3 and is adjusted by a PI controller on the RMS norm of
 * the embedded error estimate scaled by atol + rtol * |y|. Steps never exceed
 * the output spacing, which keeps the cubic Hermite interpolant's error well
 * below the requested tolerance. Throws StepSizeUnderflow when the step
 * shrinks below the resolution of t.
 */
[[nodiscard]] inline Trajectory integrate(const VdpConfig& cfg) {
  using detail::Dopri5;
  cfg.validate();

  Trajectory out;
  out.t = uniform_grid(cfg.t_end, cfg.n_points);
  out.x.resize(cfg.n_points);
  out.v.resize(cfg.n_points);
  out.x[0] = cfg.initial.x;
  out.v[0] = cfg.initial.v;

  constexpr double kSafety = 0.9;
  constexpr double kFacMin = 0.2;
  constexpr double kFacMax = 10.0;
  constexpr double kBeta = 0.04;
  constexpr double kAlpha = 0.2 - 0.75 * kBeta;

  const double mu = cfg.mu;
  auto f = [mu](State s) { return vdp_rhs(s, mu); };

  double t = 0.0;
  State y = cfg.initial;
  State k1 = f(y);
  const double h_max = cfg.t_end / static_cast<double>(cfg.n_points - 1);
  double h = std::min(1e-3, h_max);
  double err_prev = 1e-4;
  std::size_t next = 1;

  while (next < cfg.n_points) {
    const double remaining = cfg.t_end - t;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw StepSizeUnderflow(t, h);
    }

    const State k2 = f(detail::axpy(y, h, {{Dopri5::a21, k1}}));
    const State k3 = f(detail::axpy(y, h, {{Dopri5::a31, k1}, {Dopri5::a32, k2}}));
    const State k4 = f(detail::axpy(y, h, {{Dopri5::a41, k1}, {Dopri5::a42, k2}, {Dopri5::a43, k3}}));
    const State k5 =
        f(detail::axpy(y, h, {{Dopri5::a51, k1}, {Dopri5::a52, k2}, {Dopri5::a53, k3}, {Dopri5::a54, k4}}));
    const State k6 = f(detail::axpy(
        y, h, {{Dopri5::a61, k1}, {Dopri5::a62, k2}, {Dopri5::a63, k3}, {Dopri5::a64, k4}, {Dopri5::a65, k5}}));
    const State y_new = detail::axpy(
        y, h, {{Dopri5::b1, k1}, {Dopri5::b3, k3}, {Dopri5::b4, k4}, {Dopri5::b5, k5}, {Dopri5::b6, k6}});
    const State k7 = f(y_new);

    const State e = detail::axpy(
        State{0.0, 0.0}, h,
        {{Dopri5::e1, k1}, {Dopri5::e3, k3}, {Dopri5::e4, k4}, {Dopri5::e5, k5}, {Dopri5::e6, k6}, {Dopri5::e7, k7}});
    const double sx = cfg.atol + cfg.rtol * std::max(std::abs(y.x), std::abs(y_new.x));
    const double sv = cfg.atol + cfg.rtol * std::max(std::abs(y.v), std::abs(y_new.v));
    const double err = std::sqrt(0.5 * ((e.x / sx) * (e.x / sx) + (e.v / sv) * (e.v / sv)));

    if (!std::isfinite(err)) {
      h *= kFacMin;
      continue;
    }

    if (err <= 1.0) {
      const double t_new = last ? cfg.t_end : t + h;
      while (next < cfg.n_points && out.t[next] <= t_new) {
        const double theta = (out.t[next] - t) / h;
        const State s = detail::hermite(theta, h, y, k1, y_new, k7);
        out.x[next] = s.x;
        out.v[next] = s.v;
        ++next;
      }
      double fac = kSafety * std::pow(std::max(err, 1e-10), -kAlpha) * std::pow(err_prev, kBeta);
      fac = std::clamp(fac, kFacMin, kFacMax);
      err_prev = std::max(err, 1e-4);
      t = t_new;
      y = y_new;
      k1 = k7;
      h = std::min(h * fac, h_max);
    } else {
      const double fac = std::max(kFacMin, kSafety * std::pow(err, -kAlpha));
      h *= fac;
    }
  }
  return out;
}

/// Writes the trajectory as CSV with header t,x,v.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  CsvWriter csv(os);
  csv.header({"t", "x", "v"});
  for (std::size_t i = 0; i < traj.size(); ++i) csv.row({traj.t[i], traj.x[i], traj.v[i]});
}

}  // namespace pidoc
