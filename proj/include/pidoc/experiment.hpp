/**
 * @file experiment.hpp
 * @brief One training run: simulate, train the controller network, evaluate, persist.
 *
 * Files written into the run directory:
 *   summary.json    deterministic run record (no timing)
 *   timing.json     wall time, normalized time, timestamp
 *   losses.csv      iteration,mse_nn,mse_i,mse_d,total
 *   trajectory.csv  t,x_pred,v_pred,a_pred,x_D,v_D,a_D,x_train,v_train
 *   params.txt      trained network checkpoint
 *   config.txt      effective configuration
 *   FAILED          present only when the run aborted
 */
#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pidoc/config.hpp"
#include "pidoc/csv.hpp"
#include "pidoc/lbfgs.hpp"
#include "pidoc/loss.hpp"
#include "pidoc/metrics.hpp"
#include "pidoc/network.hpp"
#include "pidoc/signal.hpp"
#include "pidoc/vdp.hpp"

namespace pidoc {

/// Network output and its time derivatives on the grid.
struct ControlledTrajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> a;
};

/// Everything one run produces.
struct RunRecord {
  ExperimentConfig config;
  double abs_mean_err = 0.0;
  double mask_eps = 0.0;
  double wall_time = 0.0;  // seconds spent in the optimizer
  double mean_loss = 0.0;
  double norm_time = 1.0;
  int iterations = 0;
  int evaluations = 0;
  Termination termination = Termination::MaxIters;
  LossBreakdown initial_loss;
  LossBreakdown final_loss;
  std::vector<LossBreakdown> loss_history;
  ControlledTrajectory controlled;
  Trajectory training;
  std::vector<SignalSample> desired;
  NetworkParams params;

  [[nodiscard]] std::vector<double> total_history() const {
    std::vector<double> out;
    out.reserve(loss_history.size());
    for (const auto& b : loss_history) out.push_back(b.total);
    return out;
  }
};

/// Evaluates the network on the grid (exact jets, never finite differences).
[[nodiscard]] inline ControlledTrajectory evaluate_controlled(const NetworkParams& p, const std::vector<double>& t) {
  const JetTape tape = forward_jets(p, t);
  ControlledTrajectory c;
  c.t = t;
  c.x.assign(tape.out.val.begin(), tape.out.val.end());
  c.v.assign(tape.out.d1.begin(), tape.out.d1.end());
  c.a.assign(tape.out.d2.begin(), tape.out.d2.end());
  return c;
}

/**
 * Runs the full pipeline in memory. `on_iteration(iteration, breakdown)` is
 * called after each accepted optimizer step.
 */
template <class Progress>
[[nodiscard]] RunRecord train(const ExperimentConfig& cfg, Progress&& on_iteration) {
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;
  rec.training = integrate(cfg.vdp);

  const ControlLoss loss(rec.training.t, rec.training.x, DesiredSignal{cfg.amplitude}, cfg.lambda_mode);
  rec.desired = loss.desired_samples();

  NetworkParams params = init_params(cfg.layer_spec, cfg.seed, cfg.input_scaling());
  rec.initial_loss = loss.evaluate(params);

  LossBreakdown last;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    params.set_flat(x);
    last = loss.evaluate(params, grad);
    return last.total;
  };
  auto progress = [&](int iteration, double) {
    rec.loss_history.push_back(last);
    on_iteration(iteration, static_cast<const LossBreakdown&>(last));
  };

  const Eigen::VectorXd x0 = params.flat();
  const auto start = std::chrono::steady_clock::now();
  OptimResult opt = minimize(objective, x0, cfg.effective_optimizer(), progress);
  const auto stop = std::chrono::steady_clock::now();
  rec.wall_time = std::chrono::duration<double>(stop - start).count();

  params.set_flat(opt.final_params);
  rec.params = params;
  rec.iterations = opt.iterations;
  rec.evaluations = opt.evaluations;
  rec.termination = opt.termination;
  rec.final_loss = rec.loss_history.empty() ? rec.initial_loss : rec.loss_history.back();

  rec.controlled = evaluate_controlled(params, rec.training.t);
  rec.mask_eps = cfg.effective_mask_eps();
  std::vector<double> x_d;
  x_d.reserve(rec.desired.size());
  for (const auto& s : rec.desired) x_d.push_back(s.x);
  rec.abs_mean_err = abs_mean_error(rec.controlled.x, x_d, rec.mask_eps);
  rec.mean_loss = rec.iterations > 0 ? mean_loss(rec.total_history()) : rec.final_loss.total;
  rec.norm_time = 1.0;
  return rec;
}

[[nodiscard]] inline RunRecord train(const ExperimentConfig& cfg) {
  return train(cfg, [](int, const LossBreakdown&) {});
}

namespace detail {

inline nlohmann::ordered_json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline nlohmann::ordered_json breakdown_json(const LossBreakdown& b) {
  nlohmann::ordered_json j;
  j["mse_nn"] = number_or_string(b.mse_nn);
  j["mse_i"] = number_or_string(b.mse_i);
  j["mse_d"] = number_or_string(b.mse_d);
  j["lambda"] = b.lambda_mode.to_string();
  j["total"] = number_or_string(b.total);
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace detail

/// Deterministic summary; timing lives in timing.json.
[[nodiscard]] inline nlohmann::ordered_json summary_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : config_settings(r.config)) cfg[k] = v;
  j["config"] = cfg;
  j["effective_max_iters"] = r.config.effective_optimizer().max_iters;
  j["abs_mean_err"] = detail::number_or_string(r.abs_mean_err);
  j["mask_eps"] = r.mask_eps;
  j["mean_loss"] = detail::number_or_string(r.mean_loss);
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["termination"] = to_string(r.termination);
  j["initial_loss"] = detail::breakdown_json(r.initial_loss);
  j["final_loss"] = detail::breakdown_json(r.final_loss);
  j["parameter_count"] = r.params.size();
  j["timing_file"] = "timing.json";
  return j;
}

[[nodiscard]] inline nlohmann::ordered_json timing_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["wall_time_s"] = r.wall_time;
  j["iterations"] = r.iterations;
  j["norm_time"] = detail::number_or_string(r.norm_time);
  j["timestamp_unix"] = static_cast<long long>(std::time(nullptr));
  return j;
}

inline void write_losses_csv(std::ostream& os, const RunRecord& r) {
  CsvWriter csv(os);
  csv.header({"iteration", "mse_nn", "mse_i", "mse_d", "total"});
  for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
    const auto& b = r.loss_history[i];
    csv.row({static_cast<double>(i + 1), b.mse_nn, b.mse_i, b.mse_d, b.total});
  }
}

inline void write_trajectory_csv(std::ostream& os, const RunRecord& r) {
  CsvWriter csv(os);
  csv.header({"t", "x_pred", "v_pred", "a_pred", "x_D", "v_D", "a_D", "x_train", "v_train"});
  const auto& c = r.controlled;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    const auto& d = r.desired[i];
    csv.row({c.t[i], c.x[i], c.v[i], c.a[i], d.x, d.v, d.a, r.training.x[i], r.training.v[i]});
  }
}

/// Writes timing.json; rewritten after a sweep assigns the normalized time.
inline void write_timing(const std::filesystem::path& dir, const RunRecord& r) {
  detail::write_text(dir / "timing.json", timing_json(r).dump(2) + "\n");
}

inline void persist(const std::filesystem::path& dir, const RunRecord& r) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  write_timing(dir, r);
  {
    std::ofstream out(dir / "losses.csv", std::ios::binary);
    write_losses_csv(out, r);
  }
  {
    std::ofstream out(dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(out, r);
  }
  {
    std::ofstream out(dir / "params.txt", std::ios::binary);
    write_params(out, r.params);
  }
  {
    std::ofstream out(dir / "config.txt", std::ios::binary);
    write_config(out, r.config);
  }
  std::filesystem::remove(dir / "FAILED");
}

/**
 * Trains and persists into cfg.output_dir. config.txt and losses.csv are
 * written as the run progresses so a failed run leaves partial artifacts next
 * to its FAILED marker.
 */
template <class Progress>
inline RunRecord run_one(const ExperimentConfig& cfg, Progress&& on_iteration) {
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / "FAILED");
  try {
    {
      std::ofstream out(dir / "config.txt", std::ios::binary);
      write_config(out, cfg);
    }
    std::ofstream losses(dir / "losses.csv", std::ios::binary);
    CsvWriter csv(losses);
    csv.header({"iteration", "mse_nn", "mse_i", "mse_d", "total"});
    RunRecord rec = train(cfg, [&](int it, const LossBreakdown& b) {
      csv.row({static_cast<double>(it), b.mse_nn, b.mse_i, b.mse_d, b.total});
      on_iteration(it, b);
    });
    losses.close();
    persist(dir, rec);
    return rec;
  } catch (const std::exception& e) {
    detail::write_text(dir / "FAILED", std::string(e.what()) + "\n");
    throw;
  }
}

inline RunRecord run_one(const ExperimentConfig& cfg) {
  return run_one(cfg, [](int, const LossBreakdown&) {});
}

}  // namespace pidoc
