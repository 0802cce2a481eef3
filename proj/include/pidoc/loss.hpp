/**
 * @file loss.hpp
 * @brief Composite control loss: data fit + initial position + weighted control residual.
 *
 *   L = MSE_NN + MSE_I + lambda * MSE_D
 *   MSE_NN = mean |x_train - x_pred / amplitude|^2
 *   MSE_I  = |x_pred(t0) - x_D(t0)|^2
 *   MSE_D  = mean |(a_D - x_pred'') + (x_D - x_pred)|^2
 *
 * An infinite weight keeps MSE_D alone; a zero weight drops it.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"
#include "pidoc/network.hpp"
#include "pidoc/signal.hpp"

namespace pidoc {

/// Weight on the control residual term: a finite non-negative value or infinity.
class LambdaMode {
 public:
  [[nodiscard]] static LambdaMode finite(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
    return LambdaMode(false, lambda);
  }
  [[nodiscard]] static LambdaMode infinite() { return LambdaMode(true, std::numeric_limits<double>::infinity()); }

  /// Parses a number or "inf".
  [[nodiscard]] static LambdaMode parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Infinity") return infinite();
    return finite(parse_number(text));
  }

  [[nodiscard]] bool is_infinite() const { return infinite_; }
  /// Finite weight; +inf for the infinite mode.
  [[nodiscard]] double value() const { return value_; }
  [[nodiscard]] std::string to_string() const { return infinite_ ? "inf" : format_number(value_); }

  /// Multipliers applied to (MSE_NN, MSE_I, MSE_D).
  [[nodiscard]] double data_weight() const { return infinite_ ? 0.0 : 1.0; }
  [[nodiscard]] double initial_weight() const { return infinite_ ? 0.0 : 1.0; }
  [[nodiscard]] double control_weight() const { return infinite_ ? 1.0 : value_; }

  friend bool operator==(const LambdaMode&, const LambdaMode&) = default;

 private:
  LambdaMode(bool inf, double v) : infinite_(inf), value_(v) {}
  bool infinite_ = false;
  double value_ = 1.0;
};

struct LossParts {
  double mse_nn = 0.0;
  double mse_i = 0.0;
  double mse_d = 0.0;
};

struct LossBreakdown {
  double mse_nn = 0.0;
  double mse_i = 0.0;
  double mse_d = 0.0;
  LambdaMode lambda_mode = LambdaMode::finite(1.0);
  double total = 0.0;
};

namespace detail {

// Sequential left-to-right mean of squares; fixed order keeps results reproducible.
inline double mean_square(std::span<const double> r) {
  double acc = 0.0;
  for (double v : r) acc += v * v;
  return acc / static_cast<double>(r.size());
}

}  // namespace detail

[[nodiscard]] inline double mse_nn(std::span<const double> x_train, std::span<const double> x_pred, double amplitude) {
  if (x_train.size() != x_pred.size()) throw LengthMismatch("mse_nn", x_train.size(), x_pred.size());
  if (x_train.empty()) throw InvalidArgument("mse_nn: empty input");
  if (!(amplitude > 0.0)) throw InvalidArgument("mse_nn: amplitude must be > 0");
  std::vector<double> r(x_train.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = x_train[i] - x_pred[i] / amplitude;
  return detail::mean_square(r);
}

[[nodiscard]] inline double mse_i(double x_pred_0, double x_desired_0) {
  const double r = x_pred_0 - x_desired_0;
  return r * r;
}

[[nodiscard]] inline double mse_d(std::span<const Jet2> jets, std::span<const SignalSample> desired) {
  if (jets.size() != desired.size()) throw LengthMismatch("mse_d", jets.size(), desired.size());
  if (jets.empty()) throw InvalidArgument("mse_d: empty input");
  std::vector<double> r(jets.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (desired[i].a - jets[i].d2) + (desired[i].x - jets[i].val);
  return detail::mean_square(r);
}

[[nodiscard]] inline LossBreakdown total_loss(const LossParts& parts, const LambdaMode& mode) {
  LossBreakdown b{parts.mse_nn, parts.mse_i, parts.mse_d, mode, 0.0};
  if (mode.is_infinite()) {
    b.total = parts.mse_d;
  } else if (mode.value() == 0.0) {
    b.total = parts.mse_nn + parts.mse_i;
  } else {
    b.total = parts.mse_nn + parts.mse_i + mode.value() * parts.mse_d;
  }
  return b;
}

/**
 * The training objective over one shared collocation grid.
 *
 * Holds the grid, the simulated positions used as training data and the
 * desired signal sampled on the grid; evaluates the loss breakdown and its
 * gradient with respect to the flat network parameters.
 */
class ControlLoss {
 public:
  ControlLoss(std::vector<double> t, std::vector<double> x_train, DesiredSignal signal, LambdaMode mode)
      : t_(std::move(t)), x_train_(std::move(x_train)), signal_(signal), mode_(mode) {
    if (t_.size() != x_train_.size()) throw LengthMismatch("ControlLoss", t_.size(), x_train_.size());
    if (t_.empty()) throw InvalidArgument("ControlLoss: empty grid");
    signal_.validate();
    desired_.reserve(t_.size());
    for (double ti : t_) desired_.push_back(desired(signal_, ti));
  }

  [[nodiscard]] const std::vector<double>& grid() const { return t_; }
  [[nodiscard]] const std::vector<SignalSample>& desired_samples() const { return desired_; }
  [[nodiscard]] const LambdaMode& mode() const { return mode_; }

  /// Loss breakdown of the given jets; fills `adj` with dL/d(jets) when non-null.
  LossBreakdown evaluate_jets(const JetBatch& jets, JetAdjoint* adj) const {
    const std::size_t n = t_.size();
    if (jets.size() != n) throw LengthMismatch("ControlLoss::evaluate_jets", jets.size(), n);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double amp = signal_.amplitude;

    std::vector<double> r_nn(n), r_d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      r_nn[i] = x_train_[i] - jets.val[k] / amp;
      r_d[i] = (desired_[i].a - jets.d2[k]) + (desired_[i].x - jets.val[k]);
    }
    const double r_i = jets.val[0] - desired_[0].x;

    const LossParts parts{detail::mean_square(r_nn), r_i * r_i, detail::mean_square(r_d)};
    const LossBreakdown breakdown = total_loss(parts, mode_);

    if (adj != nullptr) {
      *adj = JetAdjoint::zeros(n);
      const double w_nn = mode_.data_weight();
      const double w_i = mode_.initial_weight();
      const double w_d = mode_.control_weight();
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        double g_val = 0.0;
        double g_d2 = 0.0;
        if (w_nn != 0.0) g_val += w_nn * (-2.0 * inv_n / amp) * r_nn[i];
        if (w_d != 0.0) {
          g_val += w_d * (-2.0 * inv_n) * r_d[i];
          g_d2 += w_d * (-2.0 * inv_n) * r_d[i];
        }
        adj->val[k] = g_val;
        adj->d2[k] = g_d2;
      }
      if (w_i != 0.0) adj->val[0] += w_i * 2.0 * r_i;
    }
    return breakdown;
  }

  [[nodiscard]] LossBreakdown evaluate(const NetworkParams& p) const {
    const JetTape tape = forward_jets(p, t_);
    return evaluate_jets(tape.out, nullptr);
  }

  /// Loss breakdown and gradient at `p`.
  LossBreakdown evaluate(const NetworkParams& p, Eigen::VectorXd& grad) const {
    LossBreakdown breakdown;
    auto result = loss_gradient(p, t_, [&](const JetBatch& jets, JetAdjoint& adj) {
      breakdown = evaluate_jets(jets, &adj);
      return breakdown.total;
    });
    grad = std::move(result.gradient);
    return breakdown;
  }

 private:
  std::vector<double> t_;
  std::vector<double> x_train_;
  DesiredSignal signal_;
  LambdaMode mode_;
  std::vector<SignalSample> desired_;
};

}  // namespace pidoc
