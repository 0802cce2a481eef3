// pidoc command line: run | sweep | plotdata
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pidoc/pidoc.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--profile", o.profile, "iteration budget: desk (5000) or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", o.seed, "network initialization seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.settings, "override a config key (key=value), repeatable");
}

pidoc::ExperimentConfig resolve(const Overrides& o) {
  pidoc::ExperimentConfig cfg = o.config.empty() ? pidoc::benchmark_config() : pidoc::load_config(o.config);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw pidoc::InvalidArgument("--set expects key=value, got '" + s + "'");
    pidoc::apply_setting(cfg, pidoc::detail::trim(s.substr(0, eq)), pidoc::detail::trim(s.substr(eq + 1)));
  }
  if (!o.profile.empty()) cfg.profile = pidoc::parse_profile(o.profile);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

void warn_profile(const pidoc::ExperimentConfig& cfg) {
  if (cfg.profile == pidoc::Profile::Desk)
    std::cerr << "warning: desk profile caps L-BFGS at " << pidoc::kDeskMaxIters
              << " iterations; wall-clock columns are not comparable with full-budget runs\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed controller training for the van der Pol oscillator"};
  app.require_subcommand(1);

  Overrides run_opts;
  bool run_serial = false;
  int report_every = 100;
  auto* run = app.add_subcommand("run", "train one configuration");
  add_common(run, run_opts);
  run->add_flag("--serial", run_serial, "accepted for symmetry with sweep; a single run is always serial");
  run->add_option("--report-every", report_every, "print the loss every N iterations (0 = quiet)");

  Overrides sweep_opts;
  std::string kind;
  std::vector<std::string> values;
  bool sweep_serial = false;
  auto* sweep = app.add_subcommand("sweep", "train every cell of a preset sweep");
  add_common(sweep, sweep_opts);
  sweep->add_option("--kind", kind, "amplitude | initial | mu | shape | lambda")->required();
  sweep->add_option("--values", values, "override the preset grid");
  sweep->add_flag("--serial", sweep_serial, "run cells one at a time (comparable wall times)");

  std::string from;
  auto* plot = app.add_subcommand("plotdata", "write figdata/ from a run or sweep directory");
  plot->add_option("--from", from, "run or sweep output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      warn_profile(cfg);
      const auto rec = pidoc::run_one(cfg, [&](int it, const pidoc::LossBreakdown& b) {
        if (report_every > 0 && it % report_every == 0)
          std::cout << "iter " << it << "  loss " << pidoc::format_number(b.total) << '\n';
      });
      std::cout << "termination: " << pidoc::to_string(rec.termination) << '\n'
                << "iterations:  " << rec.iterations << '\n'
                << "final loss:  " << pidoc::format_number(rec.final_loss.total) << '\n'
                << "|E|:         " << pidoc::format_number(rec.abs_mean_err) << '\n'
                << "mean loss:   " << pidoc::format_number(rec.mean_loss) << '\n'
                << "wall time:   " << pidoc::format_number(rec.wall_time) << " s\n"
                << "output:      " << cfg.output_dir.string() << '\n';
    } else if (*sweep) {
      pidoc::SweepSpec spec;
      spec.kind = pidoc::parse_sweep_kind(kind);
      spec.base = resolve(sweep_opts);
      spec.values = values.empty() ? pidoc::preset_values(spec.kind) : values;
      warn_profile(spec.base);
      const auto result = pidoc::run_sweep(spec, sweep_serial, &std::cout);
      if (result.parallel) std::cerr << "warning: cells ran in parallel; T and T_norm are indicative only\n";
      pidoc::write_table_csv(std::cout, result);
    } else if (*plot) {
      for (const auto& f : pidoc::emit_plot_data(from)) std::cout << f.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
