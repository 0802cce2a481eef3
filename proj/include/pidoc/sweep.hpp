/**
 * @file sweep.hpp
 * @brief Parameter sweeps over one configuration axis and their comparison tables.
 *
 * A sweep root directory contains
 *   table.csv        one row per successful cell: swept columns + abs_mean_err,T,mean_loss,T_norm
 *   sweep.json       kind, cells, benchmark cell, status of every cell
 *   cells/NN_<label>/ per-cell run artifacts (see experiment.hpp)
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pidoc/config.hpp"
#include "pidoc/csv.hpp"
#include "pidoc/experiment.hpp"
#include "pidoc/metrics.hpp"

namespace pidoc {

enum class SweepKind { Amplitude, InitialPosition, Nonlinearity, NetworkShape, LambdaWeight };

[[nodiscard]] inline std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Amplitude: return "amplitude";
    case SweepKind::InitialPosition: return "initial";
    case SweepKind::Nonlinearity: return "mu";
    case SweepKind::NetworkShape: return "shape";
    case SweepKind::LambdaWeight: return "lambda";
  }
  return "unknown";
}

[[nodiscard]] inline SweepKind parse_sweep_kind(const std::string& s) {
  if (s == "amplitude") return SweepKind::Amplitude;
  if (s == "initial") return SweepKind::InitialPosition;
  if (s == "mu") return SweepKind::Nonlinearity;
  if (s == "shape") return SweepKind::NetworkShape;
  if (s == "lambda") return SweepKind::LambdaWeight;
  throw InvalidArgument("unknown sweep kind '" + s + "' (expected amplitude|initial|mu|shape|lambda)");
}

/// Preset grids, one per comparison table.
[[nodiscard]] inline std::vector<std::string> preset_values(SweepKind k) {
  switch (k) {
    case SweepKind::Amplitude: return {"1", "2", "3", "4", "5"};
    case SweepKind::InitialPosition: return {"1,0", "5,0", "0,5"};
    case SweepKind::Nonlinearity: return {"1", "3", "5", "7", "9"};
    case SweepKind::NetworkShape: return {"1x30", "3x30", "6x30", "1x10", "3x10", "6x10"};
    case SweepKind::LambdaWeight: return {"0", "1", "10", "1000", "inf"};
  }
  return {};
}

/// Swept-parameter columns of the comparison table.
[[nodiscard]] inline std::vector<std::string> config_columns(SweepKind k) {
  switch (k) {
    case SweepKind::Amplitude: return {"amplitude"};
    case SweepKind::InitialPosition: return {"initial"};
    case SweepKind::Nonlinearity: return {"mu"};
    case SweepKind::NetworkShape: return {"layers", "neurons"};
    case SweepKind::LambdaWeight: return {"lambda"};
  }
  return {};
}

inline const std::vector<std::string> kEstimateColumns = {"abs_mean_err", "T", "mean_loss", "T_norm"};

[[nodiscard]] inline std::vector<std::string> table_columns(SweepKind k) {
  auto cols = config_columns(k);
  cols.insert(cols.end(), kEstimateColumns.begin(), kEstimateColumns.end());
  return cols;
}

struct SweepSpec {
  SweepKind kind = SweepKind::Amplitude;
  std::vector<std::string> values;
  ExperimentConfig base;
};

struct SweepCell {
  std::size_t index = 0;
  std::string label;
  std::vector<std::string> config_values;  // rendered table cells for config_columns(kind)
  ExperimentConfig config;
  bool benchmark = false;
};

namespace detail {

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  return s;
}

inline bool uniform_hidden(const LayerSpec& s, std::size_t& layers, std::size_t& width) {
  layers = s.hidden_layers();
  width = s.sizes[1];
  for (std::size_t i = 1; i + 1 < s.sizes.size(); ++i)
    if (s.sizes[i] != width) return false;
  return true;
}

}  // namespace detail

/**
 * Expands a sweep into per-cell configurations. The benchmark cell is the one
 * whose swept value equals the base configuration's; the first cell otherwise.
 */
[[nodiscard]] inline std::vector<SweepCell> expand(const SweepSpec& spec) {
  if (spec.values.empty()) throw InvalidArgument("sweep: no values");
  std::vector<SweepCell> cells;
  std::optional<std::size_t> bench;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const std::string& raw = spec.values[i];
    SweepCell cell;
    cell.index = i;
    cell.config = spec.base;
    bool matches_base = false;
    switch (spec.kind) {
      case SweepKind::Amplitude: {
        cell.config.amplitude = parse_number(raw);
        matches_base = cell.config.amplitude == spec.base.amplitude;
        cell.config_values = {format_number(cell.config.amplitude)};
        break;
      }
      case SweepKind::InitialPosition: {
        cell.config.vdp.initial = parse_state(raw);
        matches_base = cell.config.vdp.initial == spec.base.vdp.initial;
        cell.config_values = {"(" + format_number(cell.config.vdp.initial.x) + ", " +
                              format_number(cell.config.vdp.initial.v) + ")"};
        break;
      }
      case SweepKind::Nonlinearity: {
        cell.config.vdp.mu = parse_number(raw);
        matches_base = cell.config.vdp.mu == spec.base.vdp.mu;
        cell.config_values = {format_number(cell.config.vdp.mu)};
        break;
      }
      case SweepKind::NetworkShape: {
        cell.config.layer_spec = LayerSpec::parse(raw);
        std::size_t layers = 0, width = 0;
        if (!detail::uniform_hidden(cell.config.layer_spec, layers, width))
          throw InvalidArgument("sweep: shape values must be 'layers x width', got '" + raw + "'");
        matches_base = cell.config.layer_spec == spec.base.layer_spec;
        cell.config_values = {std::to_string(layers), std::to_string(width)};
        break;
      }
      case SweepKind::LambdaWeight: {
        cell.config.lambda_mode = LambdaMode::parse(raw);
        matches_base = cell.config.lambda_mode == spec.base.lambda_mode;
        cell.config_values = {cell.config.lambda_mode.to_string()};
        break;
      }
    }
    cell.config.validate();
    std::string label = to_string(spec.kind) + "_";
    for (std::size_t k = 0; k < cell.config_values.size(); ++k) label += (k ? "x" : "") + cell.config_values[k];
    cell.label = detail::sanitize(label);
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu_", i);
    cell.config.output_dir = spec.base.output_dir / "cells" / (prefix + cell.label);
    if (matches_base && !bench) bench = i;
    cells.push_back(std::move(cell));
  }
  cells[bench.value_or(0)].benchmark = true;
  return cells;
}

struct CellOutcome {
  SweepCell cell;
  std::optional<RunRecord> record;
  std::string error;
};

struct SweepResult {
  SweepKind kind = SweepKind::Amplitude;
  std::vector<CellOutcome> cells;
  std::size_t benchmark_index = 0;  // cell whose per-iteration time normalizes T_norm
  bool parallel = false;

  [[nodiscard]] std::vector<RunRecord> records() const {
    std::vector<RunRecord> out;
    for (const auto& c : cells)
      if (c.record) out.push_back(*c.record);
    return out;
  }
};

/// Assigns T_norm of every successful cell against the benchmark cell.
inline void assign_normalized_times(SweepResult& result) {
  const auto has_time = [](const CellOutcome& c) { return c.record && c.record->iterations > 0 && c.record->wall_time > 0; };
  if (!has_time(result.cells[result.benchmark_index])) {
    // Designated benchmark failed; fall back to the first usable cell.
    for (std::size_t i = 0; i < result.cells.size(); ++i)
      if (has_time(result.cells[i])) {
        result.benchmark_index = i;
        break;
      }
  }
  const auto& bench = result.cells[result.benchmark_index];
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    auto& c = result.cells[i];
    if (!c.record) continue;
    if (i == result.benchmark_index) {
      c.record->norm_time = 1.0;
    } else if (has_time(c) && has_time(bench)) {
      c.record->norm_time = normalized_time(c.record->wall_time, c.record->iterations, bench.record->wall_time,
                                            bench.record->iterations);
    } else {
      c.record->norm_time = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

inline void write_table_csv(std::ostream& os, const SweepResult& result) {
  CsvWriter csv(os);
  csv.header(table_columns(result.kind));
  for (const auto& c : result.cells) {
    if (!c.record) continue;
    std::vector<std::string> fields = c.cell.config_values;
    fields.push_back(format_number(c.record->abs_mean_err));
    fields.push_back(format_number(c.record->wall_time));
    fields.push_back(format_number(c.record->mean_loss));
    fields.push_back(format_number(c.record->norm_time));
    csv.text_row(fields);
  }
}

[[nodiscard]] inline nlohmann::ordered_json sweep_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(result.kind);
  j["columns"] = table_columns(result.kind);
  j["benchmark_cell"] = result.benchmark_index;
  j["timing"] = result.parallel ? "indicative (cells ran in parallel)" : "serial";
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : result.cells) {
    nlohmann::ordered_json e;
    e["index"] = c.cell.index;
    e["label"] = c.cell.label;
    e["dir"] = "cells/" + c.cell.config.output_dir.filename().generic_string();
    e["values"] = c.cell.config_values;
    e["benchmark"] = c.cell.index == result.benchmark_index;
    e["status"] = c.record ? "ok" : "failed";
    if (!c.record) e["error"] = c.error;
    cells.push_back(e);
  }
  j["cells"] = cells;
  return j;
}

/**
 * Runs every cell (each retrains from scratch, including the benchmark cell)
 * and writes table.csv and sweep.json into spec.base.output_dir. A failed cell
 * is recorded and skipped. With `serial == false` cells run on worker threads;
 * their wall times are then only indicative.
 */
inline SweepResult run_sweep(const SweepSpec& spec, bool serial = true, std::ostream* log = nullptr) {
  const auto cells = expand(spec);
  SweepResult result;
  result.kind = spec.kind;
  result.cells.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    result.cells[i].cell = cells[i];
    if (cells[i].benchmark) result.benchmark_index = i;
  }
  std::filesystem::create_directories(spec.base.output_dir);

  std::mutex log_mutex;
  auto run_cell = [&](std::size_t i) {
    auto& outcome = result.cells[i];
    try {
      outcome.record = run_one(outcome.cell.config);
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "cell " << outcome.cell.label << ": " << outcome.record->iterations << " iterations, final loss "
             << format_number(outcome.record->final_loss.total) << '\n';
      }
    } catch (const std::exception& e) {
      outcome.error = e.what();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "cell " << outcome.cell.label << " failed: " << e.what() << '\n';
      }
    }
  };

  const std::size_t workers =
      serial ? 1 : std::max<std::size_t>(1, std::min<std::size_t>(cells.size(), std::thread::hardware_concurrency()));
  result.parallel = workers > 1;
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  assign_normalized_times(result);
  for (const auto& c : result.cells)
    if (c.record) write_timing(c.cell.config.output_dir, *c.record);

  {
    std::ofstream out(spec.base.output_dir / "table.csv", std::ios::binary);
    write_table_csv(out, result);
  }
  {
    std::ofstream out(spec.base.output_dir / "sweep.json", std::ios::binary);
    out << sweep_json(result).dump(2) << '\n';
  }
  return result;
}

}  // namespace pidoc
