// Command-line front end: generate synthetic aligned networks, run a single
// method, sweep the full experiment grid, or re-aggregate a results CSV.
//
// Exit codes: 0 success, 1 cell failure or runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scanps/scanps.hpp"

namespace {

struct FlagValues {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<double> rho;
  std::optional<std::string> ratios;
  std::optional<std::string> methods;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> jobs;
  std::optional<std::string> data;
  std::optional<std::string> sampling_dump;
};

void add_common_flags(CLI::App* cmd, FlagValues& flags) {
  cmd->add_option("--config", flags.config, "key = value config file");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "generator seed");
  cmd->add_option("--theta", flags.theta, "diversity weight in the sampling objective");
  cmd->add_option("--rho", flags.rho, "retained old-user fraction under personalized sampling");
  cmd->add_option("--ratios", flags.ratios, "comma-separated remaining-information ratios");
  cmd->add_option("--methods", flags.methods, "comma-separated method names");
  cmd->add_option("--folds", flags.folds, "cross-validation folds");
  cmd->add_option("--jobs", flags.jobs, "worker threads for the sweep");
  cmd->add_option("--data", flags.data, "directory of generated data files to load");
  cmd->add_option("--dump-sampling", flags.sampling_dump,
                  "directory for per-cell sampling debug CSVs");
}

scanps::ExperimentSpec build_spec(const FlagValues& flags) {
  scanps::ExperimentSpec spec;
  if (flags.config) scanps::load_config(spec, *flags.config);
  if (flags.out) scanps::apply_setting(spec, "out", *flags.out);
  if (flags.seed) scanps::apply_setting(spec, "seed", std::to_string(*flags.seed));
  if (flags.theta) scanps::apply_setting(spec, "theta", std::to_string(*flags.theta));
  if (flags.rho) scanps::apply_setting(spec, "rho", std::to_string(*flags.rho));
  if (flags.ratios) scanps::apply_setting(spec, "ratios", *flags.ratios);
  if (flags.methods) scanps::apply_setting(spec, "methods", *flags.methods);
  if (flags.folds) scanps::apply_setting(spec, "folds", std::to_string(*flags.folds));
  if (flags.jobs) scanps::apply_setting(spec, "jobs", std::to_string(*flags.jobs));
  if (flags.data) scanps::apply_setting(spec, "data_dir", *flags.data);
  if (flags.sampling_dump) scanps::apply_setting(spec, "sampling_dump_dir", *flags.sampling_dump);
  return spec;
}

int do_generate(const scanps::ExperimentSpec& spec) {
  scanps::AlignedPair pair = scanps::generate(spec.gen);
  scanps::write_generated(pair, spec.gen, spec.out_dir);
  std::cout << "wrote " << scanps::generated_file_names().size()
            << " network files + anchors.txt + manifest.txt to " << spec.out_dir << "\n";
  std::cout << "target: " << pair.target().user_count() << " users, "
            << pair.target().link_count() << " links; source: " << pair.source().user_count()
            << " users, " << pair.source().link_count() << " links; anchors: "
            << pair.anchor_count() << "\n";
  return 0;
}

int run_cells_and_report(const scanps::ExperimentSpec& spec) {
  scanps::AlignedPair pair = scanps::load_or_generate(spec);
  scanps::SweepOutcome outcome = scanps::run_sweep(spec, pair);

  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  std::string results_path = (fs::path(spec.out_dir) / "results.csv").string();
  scanps::write_results_csv(outcome.rows, results_path);
  auto aggregates = scanps::aggregate_results(outcome.rows);
  std::string report = scanps::render_report(aggregates);
  scanps::write_report_csv(aggregates, (fs::path(spec.out_dir) / "report.csv").string());
  {
    std::ofstream txt((fs::path(spec.out_dir) / "report.txt").string());
    txt << report;
  }
  std::cout << report;
  std::cout << "\nwrote " << outcome.rows.size() << " rows to " << results_path << "\n";

  if (!outcome.failures.empty()) {
    for (const auto& failure : outcome.failures) std::cerr << "FAILED " << failure << "\n";
    return 1;
  }
  return 0;
}

int do_report(const std::string& csv_path, const scanps::ExperimentSpec& spec) {
  auto rows = scanps::load_results_csv(csv_path);
  auto aggregates = scanps::aggregate_results(rows);
  std::string report = scanps::render_report(aggregates);
  std::cout << report;
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  scanps::write_report_csv(aggregates, (fs::path(spec.out_dir) / "report.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-network social link prediction for new users"};
  app.require_subcommand(1);

  FlagValues gen_flags, run_flags, sweep_flags, report_flags;
  std::string report_csv;

  CLI::App* cmd_generate = app.add_subcommand("generate", "write a synthetic aligned pair to disk");
  add_common_flags(cmd_generate, gen_flags);
  CLI::App* cmd_run = app.add_subcommand("run", "run one method over the ratio/seed grid");
  add_common_flags(cmd_run, run_flags);
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run the full method/ratio/seed grid");
  add_common_flags(cmd_sweep, sweep_flags);
  CLI::App* cmd_report = app.add_subcommand("report", "aggregate a results CSV into tables");
  add_common_flags(cmd_report, report_flags);
  cmd_report->add_option("csv", report_csv, "results.csv produced by run/sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help/usage message
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_generate->parsed()) return do_generate(build_spec(gen_flags));
    if (cmd_run->parsed()) {
      scanps::ExperimentSpec spec = build_spec(run_flags);
      if (spec.methods.size() != 1) {
        std::cerr << "run: exactly one method required (use --methods NAME; sweep runs many)\n";
        return 2;
      }
      return run_cells_and_report(spec);
    }
    if (cmd_sweep->parsed()) return run_cells_and_report(build_spec(sweep_flags));
    if (cmd_report->parsed()) return do_report(report_csv, build_spec(report_flags));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
