/**
 * @file lbfgs.hpp
 * @brief Limited-memory BFGS with a strong-Wolfe bracketing/zoom line search.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "pidoc/error.hpp"

namespace pidoc {

struct LbfgsOptions {
  int memory = 10;  // 0 falls back to steepest descent
  int max_iters = 200000;
  double grad_tol = 1e-8;
  double f_rel_tol = 1e-12;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 50;

  void validate() const {
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
      throw InvalidArgument("lbfgs: require 0 < c1 < c2 < 1");
    if (memory < 0) throw InvalidArgument("lbfgs: memory must be >= 0");
    if (max_iters < 1) throw InvalidArgument("lbfgs: max_iters must be >= 1");
    if (max_line_search < 1) throw InvalidArgument("lbfgs: max_line_search must be >= 1");
  }
};

enum class Termination { GradTol, FRelTol, MaxIters, LineSearchFailure, NonFiniteObjective };

[[nodiscard]] inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradTol: return "GradTol";
    case Termination::FRelTol: return "FRelTol";
    case Termination::MaxIters: return "MaxIters";
    case Termination::LineSearchFailure: return "LineSearchFailure";
    case Termination::NonFiniteObjective: return "NonFiniteObjective";
  }
  return "Unknown";
}

struct OptimResult {
  Eigen::VectorXd final_params;
  double final_loss = 0.0;
  int iterations = 0;                 // accepted line-search steps
  std::vector<double> loss_history;   // objective after each accepted step
  Termination termination = Termination::MaxIters;
  int evaluations = 0;
};

namespace detail {

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), clamped into the
// central part of [lo, hi]; bisection when the cubic has no real minimizer.
inline double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double x = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) {
      const double cand = b - (b - a) * (db + d2 - d1) / denom;
      if (std::isfinite(cand)) x = cand;
    }
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(x, lo + margin, hi - margin);
}

}  // namespace detail

/**
 * Minimizes `objective(x, grad) -> f` from x0.
 *
 * `on_iteration(iteration, f)` runs after every accepted step. The accepted
 * point is always the objective's most recent evaluation, so a callback may
 * read state the objective cached during that call.
 */
template <class Objective, class Callback>
[[nodiscard]] OptimResult minimize(Objective&& objective, const Eigen::VectorXd& x0, const LbfgsOptions& opts,
                                   Callback&& on_iteration) {
  opts.validate();
  const Eigen::Index dim = x0.size();
  OptimResult res;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g(dim);
  double f = objective(static_cast<const Eigen::VectorXd&>(x), g);
  ++res.evaluations;
  if (!std::isfinite(f) || !g.allFinite()) throw NonFiniteObjective("lbfgs: objective not finite at x0");

  auto finish = [&](Termination why) {
    res.final_params = x;
    res.final_loss = f;
    res.termination = why;
    return res;
  };

  if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) return finish(Termination::GradTol);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x_trial(dim), g_trial(dim), d(dim);
  std::vector<double> alpha_buf;

  while (true) {
    // Two-loop recursion for d = -H g.
    d = -g;
    const std::size_t m = s_hist.size();
    alpha_buf.assign(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      alpha_buf[i] = rho_hist[i] * s_hist[i].dot(d);
      d.noalias() -= alpha_buf[i] * y_hist[i];
    }
    if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d.noalias() += (alpha_buf[i] - beta) * s_hist[i];
    }

    double dg0 = g.dot(d);
    if (!(dg0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      dg0 = g.dot(d);
    }

    // Without curvature information the unit step is unscaled; start from a unit-length move.
    double alpha = s_hist.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;

    // Strong-Wolfe line search: bracketing, then zoom.
    const double f0 = f;
    double a_prev = 0.0, f_prev = f0, dg_prev = dg0;
    double f_new = 0.0, dg_new = 0.0;
    bool accepted = false;
    bool non_finite = false;
    int trials = 0;

    auto eval = [&](double a) {
      x_trial = x + a * d;
      f_new = objective(static_cast<const Eigen::VectorXd&>(x_trial), g_trial);
      ++res.evaluations;
      ++trials;
      if (!std::isfinite(f_new) || !g_trial.allFinite()) {
        non_finite = true;
        return false;
      }
      dg_new = g_trial.dot(d);
      return true;
    };

    auto zoom = [&](double lo, double f_lo, double dg_lo, double hi, double f_hi, double dg_hi) {
      while (trials < opts.max_line_search) {
        const double a = detail::cubic_step(lo, f_lo, dg_lo, hi, f_hi, dg_hi);
        if (!eval(a)) return false;
        if (f_new > f0 + opts.wolfe_c1 * a * dg0 || f_new >= f_lo) {
          hi = a;
          f_hi = f_new;
          dg_hi = dg_new;
        } else {
          if (std::abs(dg_new) <= -opts.wolfe_c2 * dg0) {
            alpha = a;
            return true;
          }
          if (dg_new * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            dg_hi = dg_lo;
          }
          lo = a;
          f_lo = f_new;
          dg_lo = dg_new;
        }
        if (std::abs(hi - lo) <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo))) return false;
      }
      return false;
    };

    for (bool first = true; trials < opts.max_line_search; first = false) {
      if (!eval(alpha)) break;
      if (f_new > f0 + opts.wolfe_c1 * alpha * dg0 || (!first && f_new >= f_prev)) {
        accepted = zoom(a_prev, f_prev, dg_prev, alpha, f_new, dg_new);
        break;
      }
      if (std::abs(dg_new) <= -opts.wolfe_c2 * dg0) {
        accepted = true;
        break;
      }
      if (dg_new >= 0.0) {
        accepted = zoom(alpha, f_new, dg_new, a_prev, f_prev, dg_prev);
        break;
      }
      a_prev = alpha;
      f_prev = f_new;
      dg_prev = dg_new;
      alpha *= 2.0;
    }

    if (non_finite) return finish(Termination::NonFiniteObjective);
    if (!accepted) return finish(Termination::LineSearchFailure);

    // Accept; x_trial/g_trial/f_new are the last evaluation.
    Eigen::VectorXd s = x_trial - x;
    Eigen::VectorXd y = g_trial - g;
    x.swap(x_trial);
    g.swap(g_trial);
    f = f_new;
    ++res.iterations;
    res.loss_history.push_back(f);
    on_iteration(res.iterations, f);

    const double sy = s.dot(y);
    if (opts.memory > 0 && sy > std::numeric_limits<double>::epsilon() * y.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) return finish(Termination::GradTol);
    if (std::abs(f0 - f) <= opts.f_rel_tol * std::max({std::abs(f0), std::abs(f), 1.0}))
      return finish(Termination::FRelTol);
    if (res.iterations >= opts.max_iters) return finish(Termination::MaxIters);
  }
}

template <class Objective>
[[nodiscard]] OptimResult minimize(Objective&& objective, const Eigen::VectorXd& x0, const LbfgsOptions& opts) {
  return minimize(std::forward<Objective>(objective), x0, opts, [](int, double) {});
}

}  // namespace pidoc
