/**
 * @file config.hpp
 * @brief Experiment configuration and its flat key = value file format.
 *
 * Example:
 *
 *     # benchmark
 *     mu = 1
 *     initial = 1, 0
 *     amplitude = 2
 *     lambda = 1
 *     layers = 6x30
 *     seed = 42
 *     profile = desk
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"
#include "pidoc/lbfgs.hpp"
#include "pidoc/loss.hpp"
#include "pidoc/network.hpp"
#include "pidoc/vdp.hpp"

namespace pidoc {

/// Iteration budget: Paper keeps the full cap, Desk limits it for laptop-scale runs.
enum class Profile { Paper, Desk };

inline constexpr int kDeskMaxIters = 5000;

[[nodiscard]] inline std::string to_string(Profile p) { return p == Profile::Paper ? "paper" : "desk"; }

[[nodiscard]] inline Profile parse_profile(const std::string& s) {
  if (s == "paper") return Profile::Paper;
  if (s == "desk") return Profile::Desk;
  throw InvalidArgument("unknown profile '" + s + "' (expected desk or paper)");
}

struct ExperimentConfig {
  VdpConfig vdp;
  double amplitude = 2.0;
  LambdaMode lambda_mode = LambdaMode::finite(1.0);
  LayerSpec layer_spec = LayerSpec::hidden(6, 30);
  std::uint64_t seed = 42;
  LbfgsOptions optimizer;
  std::filesystem::path output_dir = "pidoc-out";
  Profile profile = Profile::Desk;
  /// Map t in [0, t_end] onto [-1, 1] before the first layer.
  bool normalize_input = true;
  /// Near-zero mask for the relative error; <= 0 selects 1e-3 * amplitude.
  double mask_eps = 0.0;

  void validate() const {
    vdp.validate();
    DesiredSignal{amplitude}.validate();
    layer_spec.validate();
    optimizer.validate();
  }

  /// Optimizer options after the profile's iteration cap.
  [[nodiscard]] LbfgsOptions effective_optimizer() const {
    LbfgsOptions o = optimizer;
    if (profile == Profile::Desk) o.max_iters = std::min(o.max_iters, kDeskMaxIters);
    return o;
  }

  [[nodiscard]] double effective_mask_eps() const { return mask_eps > 0.0 ? mask_eps : 1e-3 * amplitude; }

  [[nodiscard]] InputScaling input_scaling() const {
    return normalize_input ? InputScaling::unit_interval(0.0, vdp.t_end) : InputScaling{};
  }
};

/// The reference configuration: mu = 1, initial (1, 0), amplitude 2, lambda 1, 6x30.
[[nodiscard]] inline ExperimentConfig benchmark_config() { return ExperimentConfig{}; }

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("cannot parse boolean '" + v + "'");
}

inline long long parse_integer(const std::string& v) {
  const double d = parse_number(v);
  if (d != std::floor(d) || !std::isfinite(d)) throw InvalidArgument("expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

}  // namespace detail

/// Parses "x, v" or "(x, v)".
[[nodiscard]] inline State parse_state(std::string text) {
  text.erase(std::remove_if(text.begin(), text.end(), [](char c) { return c == '(' || c == ')' || c == ' '; }),
             text.end());
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InvalidArgument("expected 'x, v', got '" + text + "'");
  return {parse_number(text.substr(0, comma)), parse_number(text.substr(comma + 1))};
}

/// Applies one key/value setting; throws InvalidArgument on unknown keys or bad values.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "mu") cfg.vdp.mu = parse_number(value);
    else if (key == "initial") cfg.vdp.initial = parse_state(value);
    else if (key == "x0") cfg.vdp.initial.x = parse_number(value);
    else if (key == "v0") cfg.vdp.initial.v = parse_number(value);
    else if (key == "t_end") cfg.vdp.t_end = parse_number(value);
    else if (key == "n_points") cfg.vdp.n_points = static_cast<std::size_t>(detail::parse_integer(value));
    else if (key == "rtol") cfg.vdp.rtol = parse_number(value);
    else if (key == "atol") cfg.vdp.atol = parse_number(value);
    else if (key == "amplitude") cfg.amplitude = parse_number(value);
    else if (key == "lambda") cfg.lambda_mode = LambdaMode::parse(value);
    else if (key == "layers") cfg.layer_spec = LayerSpec::parse(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_integer(value));
    else if (key == "memory") cfg.optimizer.memory = static_cast<int>(detail::parse_integer(value));
    else if (key == "max_iters") cfg.optimizer.max_iters = static_cast<int>(detail::parse_integer(value));
    else if (key == "grad_tol") cfg.optimizer.grad_tol = parse_number(value);
    else if (key == "f_rel_tol") cfg.optimizer.f_rel_tol = parse_number(value);
    else if (key == "wolfe_c1") cfg.optimizer.wolfe_c1 = parse_number(value);
    else if (key == "wolfe_c2") cfg.optimizer.wolfe_c2 = parse_number(value);
    else if (key == "profile") cfg.profile = parse_profile(value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "normalize_input") cfg.normalize_input = detail::parse_bool(value);
    else if (key == "mask_eps") cfg.mask_eps = parse_number(value);
    else throw InvalidArgument("unknown key");
  } catch (const Error& e) {
    throw InvalidArgument("config key '" + key + "': " + e.what());
  }
}

[[nodiscard]] inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig cfg = benchmark_config()) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_config(in);
}

/// Round-trippable key = value rendering (output_dir excluded).
[[nodiscard]] inline std::map<std::string, std::string> config_settings(const ExperimentConfig& cfg) {
  return {
      {"mu", format_number(cfg.vdp.mu)},
      {"initial", format_number(cfg.vdp.initial.x) + ", " + format_number(cfg.vdp.initial.v)},
      {"t_end", format_number(cfg.vdp.t_end)},
      {"n_points", std::to_string(cfg.vdp.n_points)},
      {"rtol", format_number(cfg.vdp.rtol)},
      {"atol", format_number(cfg.vdp.atol)},
      {"amplitude", format_number(cfg.amplitude)},
      {"lambda", cfg.lambda_mode.to_string()},
      {"layers", cfg.layer_spec.to_string()},
      {"seed", std::to_string(cfg.seed)},
      {"memory", std::to_string(cfg.optimizer.memory)},
      {"max_iters", std::to_string(cfg.optimizer.max_iters)},
      {"grad_tol", format_number(cfg.optimizer.grad_tol)},
      {"f_rel_tol", format_number(cfg.optimizer.f_rel_tol)},
      {"wolfe_c1", format_number(cfg.optimizer.wolfe_c1)},
      {"wolfe_c2", format_number(cfg.optimizer.wolfe_c2)},
      {"profile", to_string(cfg.profile)},
      {"normalize_input", cfg.normalize_input ? "true" : "false"},
      {"mask_eps", format_number(cfg.mask_eps)},
  };
}

inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  for (const auto& [k, v] : config_settings(cfg)) os << k << " = " << v << '\n';
}

}  // namespace pidoc
