#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "survbench/cli_commands.hpp"
#include "survbench/textio.hpp"

namespace {

// Applies --config first, then individual flags on top.
struct CommonFlags {
  std::string input;
  std::string config_path;
  std::string out_dir;
  std::string covariates;
  double tau = -1.0;
  double alpha = -1.0;
  long min_center_size = -1;
  bool no_impute = false;
  long long seed = -1;
  long bootstrap = -1;
  std::string multiplicity;

  survbench::RunConfig resolve() const {
    survbench::RunConfig rc;
    if (!config_path.empty()) rc = survbench::load_run_config(config_path);
    if (!input.empty()) rc.input = input;
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (!covariates.empty()) {
      rc.covariates.clear();
      for (const auto& c : survbench::split(covariates, ',')) {
        const std::string t = survbench::trim(c);
        if (!t.empty()) rc.covariates.push_back(t);
      }
    }
    if (tau > 0.0) rc.tau = tau;
    if (alpha > 0.0) rc.alpha = alpha;
    if (min_center_size >= 0) rc.min_center_size = static_cast<int>(min_center_size);
    if (no_impute) rc.imputation = false;
    if (seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);
    if (bootstrap > 0) rc.bootstrap_replicates = static_cast<int>(bootstrap);
    if (!multiplicity.empty()) {
      if (multiplicity == "none")
        rc.multiplicity = survbench::Multiplicity::none;
      else if (multiplicity == "bonferroni")
        rc.multiplicity = survbench::Multiplicity::bonferroni;
      else
        throw CLI::ValidationError("--multiplicity must be none or bonferroni");
    }
    return rc;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--input,-i", flags.input, "Subject-level CSV file");
  cmd->add_option("--config,-c", flags.config_path, "Key-value config file");
  cmd->add_option("--out-dir,-o", flags.out_dir, "Output directory");
  cmd->add_option("--covariates", flags.covariates,
                  "Comma-separated case-mix column names");
  cmd->add_option("--tau", flags.tau, "Benchmark horizon in months");
  cmd->add_option("--alpha", flags.alpha, "Nominal level for the inner funnel");
  cmd->add_option("--min-center-size", flags.min_center_size,
                  "Skip centers below this volume");
  cmd->add_flag("--no-impute", flags.no_impute,
                "Disable favorable-outcome median imputation");
  cmd->add_option("--seed", flags.seed, "Random seed");
  cmd->add_option("--bootstrap", flags.bootstrap,
                  "Bootstrap replicates for the pseudo comparator");
  cmd->add_option("--multiplicity", flags.multiplicity,
                  "Outer-funnel adjustment: none or bonferroni");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "survbench: case-mix-adjusted funnel plots for censored survival "
      "outcomes"};
  app.require_subcommand(1);

  CommonFlags mortality_flags, followup_flags, pseudo_flags, report_flags;
  bool report_stratified = false;

  CLI::App* mortality = app.add_subcommand(
      "funnel-mortality", "Benchmark deaths within tau against the pooled model");
  add_common_flags(mortality, mortality_flags);

  CLI::App* followup = app.add_subcommand(
      "funnel-followup", "Benchmark losses to follow-up within tau");
  add_common_flags(followup, followup_flags);

  CLI::App* pseudo = app.add_subcommand(
      "pseudo-compare", "Pseudo-observation comparator with bootstrap intervals");
  add_common_flags(pseudo, pseudo_flags);

  CLI::App* report = app.add_subcommand(
      "fit-report", "Fit the benchmark model and write its report");
  add_common_flags(report, report_flags);
  report->add_flag("--stratified", report_stratified, "Stratify by center");

  std::string scenario_path;
  survbench::SimulateOptions sim_options;
  long long sim_seed = -1;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run an operating-characteristics scenario");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--out-dir,-o", sim_options.out_dir, "Output directory");
  simulate->add_flag("--paper-scale", sim_options.paper_scale,
                     "Run the scenario at its full configured scale");
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--threads", sim_options.threads,
                       "Worker threads (results are thread-count independent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mortality->parsed())
      survbench::cmd_funnel_mortality(mortality_flags.resolve(), std::cout, std::cerr);
    else if (followup->parsed())
      survbench::cmd_funnel_followup(followup_flags.resolve(), std::cout, std::cerr);
    else if (pseudo->parsed())
      survbench::cmd_pseudo_compare(pseudo_flags.resolve(), std::cout, std::cerr);
    else if (report->parsed())
      survbench::cmd_fit_report(report_flags.resolve(), report_stratified,
                                std::cout, std::cerr);
    else if (simulate->parsed()) {
      if (sim_seed >= 0) {
        sim_options.seed_override = true;
        sim_options.seed = static_cast<std::uint64_t>(sim_seed);
      }
      survbench::cmd_simulate(scenario_path, sim_options, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
