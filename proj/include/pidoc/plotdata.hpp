/**
 * @file plotdata.hpp
 * @brief Plot-ready CSV bundles built from persisted run or sweep directories.
 *
 * Output goes to <dir>/figdata/. Grid-aligned panels (phase portraits, time
 * traces) are wide CSVs; loss curves are long CSVs (series,iteration,loss)
 * because cells stop after different iteration counts. manifest.json lists
 * every file with its panel title and which columns form each series.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"
#include "pidoc/vdp.hpp"

namespace pidoc {

namespace detail {

struct CellData {
  std::string label;
  std::vector<std::string> values;
  double mu = 1.0;
  NumericTable traj;
  NumericTable losses;
  std::vector<double> a_train;
};

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

inline CellData load_cell(const std::filesystem::path& dir, std::string label) {
  CellData c;
  c.label = std::move(label);
  const auto summary = read_json(dir / "summary.json");
  c.mu = parse_number(summary.at("config").at("mu").get<std::string>());
  c.traj = read_numeric_csv((dir / "trajectory.csv").string());
  c.losses = read_numeric_csv((dir / "losses.csv").string());
  const auto& x = c.traj.column("x_train");
  const auto& v = c.traj.column("v_train");
  c.a_train.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c.a_train[i] = vdp_rhs({x[i], v[i]}, c.mu).v;
  return c;
}

struct Series {
  std::string label;
  std::vector<const std::vector<double>*> data;  // one vector per column
};

class FigureBundle {
 public:
  explicit FigureBundle(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    manifest_["files"] = nlohmann::ordered_json::array();
  }

  void set_source(const std::string& source) { manifest_["source"] = source; }

  /// Phase portrait: each series contributes <label>_x,<label>_v.
  void phase(const std::string& file, const std::string& title, const std::vector<Series>& series) {
    write_wide(file, title, "phase", nullptr, series, {"_x", "_v"});
  }

  /// Time traces sharing one t column.
  void traces(const std::string& file, const std::string& title, const std::string& quantity,
              const std::vector<double>& t, const std::vector<Series>& series) {
    write_wide(file, title, quantity, &t, series, {""});
  }

  void losses(const std::string& file, const std::string& title, const std::vector<CellData>& cells) {
    std::ofstream out(dir_ / file, std::ios::binary);
    CsvWriter csv(out);
    csv.header({"series", "iteration", "loss"});
    nlohmann::ordered_json entry;
    entry["file"] = file;
    entry["title"] = title;
    entry["kind"] = "loss";
    entry["layout"] = "long";
    entry["series"] = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
      const auto& it = c.losses.column("iteration");
      const auto& total = c.losses.column("total");
      for (std::size_t i = 0; i < it.size(); ++i) csv.text_row({c.label, format_number(it[i]), format_number(total[i])});
      entry["series"].push_back({{"label", c.label}});
    }
    add(entry);
  }

  std::vector<std::filesystem::path> finish() {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest_.dump(2) << '\n';
    written_.push_back(dir_ / "manifest.json");
    return written_;
  }

 private:
  void write_wide(const std::string& file, const std::string& title, const std::string& kind,
                  const std::vector<double>* t, const std::vector<Series>& series,
                  const std::vector<std::string>& suffixes) {
    std::vector<std::string> header;
    std::vector<const std::vector<double>*> cols;
    nlohmann::ordered_json entry;
    entry["file"] = file;
    entry["title"] = title;
    entry["kind"] = kind;
    entry["layout"] = "wide";
    if (t) {
      header.push_back("t");
      cols.push_back(t);
      entry["x"] = "t";
    }
    entry["series"] = nlohmann::ordered_json::array();
    for (const auto& s : series) {
      if (s.data.size() != suffixes.size()) throw Error("plotdata: series column count mismatch");
      nlohmann::ordered_json names = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < suffixes.size(); ++k) {
        header.push_back(s.label + suffixes[k]);
        names.push_back(s.label + suffixes[k]);
        cols.push_back(s.data[k]);
      }
      entry["series"].push_back({{"label", s.label}, {"columns", names}});
    }
    std::ofstream out(dir_ / file, std::ios::binary);
    CsvWriter csv(out);
    csv.header(header);
    const std::size_t rows = cols.empty() ? 0 : cols.front()->size();
    std::vector<double> row(cols.size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < cols.size(); ++k) row[k] = (*cols[k])[i];
      csv.row(row);
    }
    add(entry);
  }

  void add(const nlohmann::ordered_json& entry) {
    manifest_["files"].push_back(entry);
    written_.push_back(dir_ / entry["file"].get<std::string>());
  }

  std::filesystem::path dir_;
  nlohmann::ordered_json manifest_;
  std::vector<std::filesystem::path> written_;
};

inline Series desired_phase(const CellData& c) {
  return {"desired", {&c.traj.column("x_D"), &c.traj.column("v_D")}};
}
inline Series vdp_phase(const CellData& c, const std::string& label) {
  return {label, {&c.traj.column("x_train"), &c.traj.column("v_train")}};
}
inline Series pidoc_phase(const CellData& c, const std::string& label) {
  return {label, {&c.traj.column("x_pred"), &c.traj.column("v_pred")}};
}

inline std::vector<std::filesystem::path> emit_run(const std::filesystem::path& dir, const std::filesystem::path& out) {
  const CellData c = load_cell(dir, "benchmark");
  FigureBundle fig(out);
  fig.set_source("run");
  const auto& t = c.traj.column("t");
  fig.phase("benchmark_phase.csv", "Phase portrait: desired, controlled, uncontrolled",
            {desired_phase(c), pidoc_phase(c, "pidoc"), vdp_phase(c, "vdp")});
  fig.traces("benchmark_position.csv", "Position x(t)", "position", t,
             {{"desired", {&c.traj.column("x_D")}}, {"pidoc", {&c.traj.column("x_pred")}},
              {"vdp", {&c.traj.column("x_train")}}});
  fig.traces("benchmark_acceleration.csv", "Acceleration x''(t)", "acceleration", t,
             {{"desired", {&c.traj.column("a_D")}}, {"pidoc", {&c.traj.column("a_pred")}}, {"vdp", {&c.a_train}}});
  return fig.finish();
}

inline std::vector<std::filesystem::path> emit_sweep(const std::filesystem::path& dir,
                                                     const std::filesystem::path& out) {
  const auto sweep = read_json(dir / "sweep.json");
  const std::string kind = sweep.at("kind").get<std::string>();
  std::vector<CellData> cells;
  std::size_t bench = 0;
  for (const auto& e : sweep.at("cells")) {
    if (e.at("status").get<std::string>() != "ok") continue;
    if (e.at("benchmark").get<bool>()) bench = cells.size();
    CellData c = load_cell(dir / e.at("dir").get<std::string>(), e.at("label").get<std::string>());
    c.values = e.at("values").get<std::vector<std::string>>();
    cells.push_back(std::move(c));
  }
  if (cells.empty()) throw Error("plotdata: sweep has no successful cells");
  const CellData& ref = cells[bench];
  const auto& t = ref.traj.column("t");

  FigureBundle fig(out);
  fig.set_source(kind);

  auto per_cell = [&](const std::string& prefix, auto&& column_of) {
    std::vector<Series> s;
    for (const auto& c : cells) s.push_back({prefix + c.label, {column_of(c)}});
    return s;
  };
  auto with = [](Series first, std::vector<Series> rest) {
    rest.insert(rest.begin(), std::move(first));
    return rest;
  };
  auto pidoc_phases = [&] {
    std::vector<Series> s;
    for (const auto& c : cells) s.push_back(pidoc_phase(c, "pidoc_" + c.label));
    return s;
  };
  auto vdp_phases = [&] {
    std::vector<Series> s;
    for (const auto& c : cells) s.push_back(vdp_phase(c, "vdp_" + c.label));
    return s;
  };
  auto col = [](const char* name) { return [name](const CellData& c) { return &c.traj.column(name); }; };

  if (kind == "amplitude") {
    std::vector<Series> s = {vdp_phase(ref, "vdp")};
    for (const auto& c : cells) {
      s.push_back({"desired_" + c.label, {&c.traj.column("x_D"), &c.traj.column("v_D")}});
      s.push_back(pidoc_phase(c, "pidoc_" + c.label));
    }
    fig.phase("amplitude_phase.csv", "Phase portraits for each desired amplitude", s);
    fig.losses("amplitude_loss.csv", "Loss vs iteration", cells);
  } else if (kind == "initial") {
    std::vector<Series> s = {desired_phase(ref)};
    for (const auto& c : cells) {
      s.push_back(vdp_phase(c, "vdp_" + c.label));
      s.push_back(pidoc_phase(c, "pidoc_" + c.label));
    }
    fig.phase("initial_phase.csv", "Phase portraits for each initial position", s);
    fig.losses("initial_loss.csv", "Loss vs iteration", cells);
    std::vector<Series> a = {{"desired", {&ref.traj.column("a_D")}}};
    for (const auto& c : cells) {
      a.push_back({"vdp_" + c.label, {&c.a_train}});
      a.push_back({"pidoc_" + c.label, {&c.traj.column("a_pred")}});
    }
    fig.traces("initial_acceleration.csv", "Acceleration x''(t)", "acceleration", t, a);
  } else if (kind == "mu") {
    fig.phase("mu_vdp_phase.csv", "Uncontrolled phase portraits", with(desired_phase(ref), vdp_phases()));
    fig.phase("mu_phase.csv", "Controlled phase portraits", with(desired_phase(ref), pidoc_phases()));
    fig.traces("mu_vdp_position.csv", "Uncontrolled position x(t)", "position", t,
               per_cell("vdp_", col("x_train")));
    fig.traces("mu_position.csv", "Controlled position x(t)", "position", t, per_cell("pidoc_", col("x_pred")));
    fig.losses("mu_loss.csv", "Loss vs iteration", cells);

    // Error traces: desired minus predicted.
    std::vector<std::vector<double>> e_acc(cells.size()), e_vel(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& c = cells[k];
      const auto& a_d = c.traj.column("a_D");
      const auto& a_p = c.traj.column("a_pred");
      const auto& v_d = c.traj.column("v_D");
      const auto& v_p = c.traj.column("v_pred");
      for (std::size_t i = 0; i < a_d.size(); ++i) {
        e_acc[k].push_back(a_d[i] - a_p[i]);
        e_vel[k].push_back(v_d[i] - v_p[i]);
      }
    }
    std::vector<Series> sa, sv;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      sa.push_back({"error_" + cells[k].label, {&e_acc[k]}});
      sv.push_back({"error_" + cells[k].label, {&e_vel[k]}});
    }
    fig.traces("mu_acceleration.csv", "Controlled acceleration x''(t)", "acceleration", t,
               with({"desired", {&ref.traj.column("a_D")}}, per_cell("pidoc_", col("a_pred"))));
    fig.traces("mu_error_acceleration.csv", "Acceleration error a_D - a_pred", "error", t, sa);
    fig.traces("mu_velocity.csv", "Controlled velocity x'(t)", "velocity", t,
               with({"desired", {&ref.traj.column("v_D")}}, per_cell("pidoc_", col("v_pred"))));
    fig.traces("mu_error_velocity.csv", "Velocity error v_D - v_pred", "error", t, sv);
  } else if (kind == "shape") {
    auto s = pidoc_phases();
    s.insert(s.begin(), {desired_phase(ref), vdp_phase(ref, "vdp")});
    fig.phase("shape_phase.csv", "Controlled phase portraits per network shape", s);
    fig.losses("shape_loss.csv", "Loss vs iteration", cells);
  } else if (kind == "lambda") {
    auto s = pidoc_phases();
    s.insert(s.begin(), {desired_phase(ref), vdp_phase(ref, "vdp")});
    fig.phase("lambda_phase.csv", "Controlled phase portraits per control weight", s);
    std::vector<Series> zoom;
    for (const auto& c : cells) {
      const std::string& v = c.values.empty() ? std::string() : c.values.front();
      if (v == "inf" || parse_number(v) >= 1000.0) zoom.push_back(pidoc_phase(c, "pidoc_" + c.label));
    }
    fig.phase("lambda_phase_zoom.csv", "Zoomed phase portraits for large control weights", zoom);
    fig.traces("lambda_position.csv", "Position x(t)", "position", t,
               with({"desired", {&ref.traj.column("x_D")}},
                    with({"vdp", {&ref.traj.column("x_train")}}, per_cell("pidoc_", col("x_pred")))));
    fig.traces("lambda_acceleration.csv", "Acceleration x''(t)", "acceleration", t,
               with({"desired", {&ref.traj.column("a_D")}},
                    with({"vdp", {&ref.a_train}}, per_cell("pidoc_", col("a_pred")))));
    fig.losses("lambda_loss.csv", "Loss vs iteration", cells);
  } else {
    throw Error("plotdata: unknown sweep kind '" + kind + "'");
  }
  return fig.finish();
}

}  // namespace detail

/// Writes <dir>/figdata/ for a run directory (summary.json) or a sweep directory (sweep.json).
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir) {
  const auto out = dir / "figdata";
  if (std::filesystem::exists(dir / "sweep.json")) return detail::emit_sweep(dir, out);
  if (std::filesystem::exists(dir / "summary.json")) return detail::emit_run(dir, out);
  throw Error("plotdata: " + dir.string() + " holds neither sweep.json nor summary.json");
}

}  // namespace pidoc
