#include "survbench/cli_commands.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "survbench/csv.hpp"
#include "survbench/pseudo.hpp"
#include "survbench/scenario_io.hpp"
#include "survbench/svg.hpp"
#include "survbench/textio.hpp"

namespace survbench {

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void emit_warnings(const std::vector<std::string>& warnings, std::ostream& diag) {
  for (const auto& w : warnings) diag << "warning: " << w << "\n";
}

void emit_imputation(const std::vector<ImputationEntry>& report,
                     std::ostream& diag) {
  for (const auto& entry : report)
    diag << "warning: imputed " << entry.n_imputed << " values of "
         << entry.covariate << " with " << fmt_g(entry.fill_value) << "\n";
}

BenchmarkConfig to_benchmark_config(const RunConfig& rc) {
  BenchmarkConfig bc;
  bc.tau = rc.tau;
  bc.alpha = rc.alpha;
  bc.multiplicity = rc.multiplicity;
  bc.min_center_size = rc.min_center_size;
  bc.imputation_enabled = rc.imputation;
  return bc;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig c;
  for (const auto& kv : parse_key_value_text(text)) {
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    if (k == "input") c.input = v;
    else if (k == "covariates") {
      c.covariates.clear();
      for (const auto& name : split(v, ',')) {
        const std::string t = trim(name);
        if (!t.empty()) c.covariates.push_back(t);
      }
    } else if (k == "tau") c.tau = parse_double(v);
    else if (k == "alpha") c.alpha = parse_double(v);
    else if (k == "multiplicity") {
      if (v == "none") c.multiplicity = Multiplicity::none;
      else if (v == "bonferroni") c.multiplicity = Multiplicity::bonferroni;
      else throw std::invalid_argument("multiplicity must be none or bonferroni");
    } else if (k == "min_center_size") c.min_center_size = static_cast<int>(parse_long(v));
    else if (k == "imputation") c.imputation = parse_bool(v);
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_long(v));
    else if (k == "bootstrap_replicates") c.bootstrap_replicates = static_cast<int>(parse_long(v));
    else
      throw std::invalid_argument("unknown config field: " + k + " (line " +
                                  std::to_string(kv.line_no) + ")");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config_text(read_text_file(path));
}

void cmd_funnel_mortality(const RunConfig& config, std::ostream& out,
                          std::ostream& diag) {
  if (config.input.empty()) throw std::invalid_argument("no input file given");
  const Dataset data = load_dataset_csv(config.input, config.covariates);
  const BenchmarkConfig bench = to_benchmark_config(config);
  MortalityBenchmark result = benchmark_mortality(data, bench);
  emit_imputation(result.imputation, diag);
  emit_warnings(result.warnings, diag);

  write_text_file(out_path(config.out_dir, "centers.csv"),
                  center_summaries_csv(result.summaries));
  write_text_file(out_path(config.out_dir, "fit_report.txt"),
                  fit_report_text(result.fit));
  const FunnelChart chart = build_funnel_chart(result.summaries, result.geometry);
  render_funnel_svg(chart, out_path(config.out_dir, "funnel_mortality.svg"));

  out << "centers: " << result.summaries.size() << "\n";
  out << "Over: " << chart.count_over << "  Target: " << chart.count_target
      << "  Under: " << chart.count_under << "\n";
}

void cmd_funnel_followup(const RunConfig& config, std::ostream& out,
                         std::ostream& diag) {
  if (config.input.empty()) throw std::invalid_argument("no input file given");
  const Dataset data = load_dataset_csv(config.input, config.covariates);
  const BenchmarkConfig bench = to_benchmark_config(config);
  FollowupBenchmark result = benchmark_followup(data, bench);
  emit_imputation(result.imputation, diag);
  emit_warnings(result.warnings, diag);

  write_text_file(out_path(config.out_dir, "followup.csv"),
                  center_summaries_csv(result.summaries));
  if (result.degenerate) {
    out << "centers: " << result.summaries.size() << "\n";
    out << "no losses to follow-up within tau; funnel not drawn\n";
    return;
  }
  const FunnelChart chart = build_funnel_chart(result.summaries, result.geometry);
  render_funnel_svg(chart, out_path(config.out_dir, "funnel_followup.svg"));
  out << "centers: " << result.summaries.size() << "\n";
  out << "Over: " << chart.count_over << "  Target: " << chart.count_target
      << "  Under: " << chart.count_under << "\n";
}

void cmd_pseudo_compare(const RunConfig& config, std::ostream& out,
                        std::ostream& diag) {
  if (config.input.empty()) throw std::invalid_argument("no input file given");
  Dataset data = load_dataset_csv(config.input, config.covariates);
  if (config.imputation) {
    ImputationResult imp = impute_case_mix(data, config.tau);
    data = std::move(imp.data);
    for (const auto& entry : imp.report)
      diag << "warning: imputed " << entry.n_imputed << " values of "
           << entry.covariate << " with " << fmt_g(entry.fill_value) << "\n";
  }
  const PseudoComparison cmp = run_pseudo_comparator(
      data, config.tau, config.bootstrap_replicates, config.alpha, config.seed);
  for (const auto& c : cmp.result.flagged_centers)
    diag << "warning: center " << c
         << " has nobody under follow-up at tau; its observed value holds the "
            "last estimate\n";

  write_text_file(out_path(config.out_dir, "pseudo.csv"),
                  prediction_intervals_csv(cmp.result.intervals));

  std::size_t over = 0, target = 0, under = 0;
  for (const auto& pi : cmp.result.intervals) {
    if (pi.classification == Classification::over) ++over;
    if (pi.classification == Classification::target) ++target;
    if (pi.classification == Classification::under) ++under;
  }
  out << "centers: " << cmp.result.intervals.size() << "\n";
  out << "Over: " << over << "  Target: " << target << "  Under: " << under
      << "\n";
}

void cmd_fit_report(const RunConfig& config, bool stratified, std::ostream& out,
                    std::ostream& diag) {
  if (config.input.empty()) throw std::invalid_argument("no input file given");
  Dataset data = load_dataset_csv(config.input, config.covariates);
  if (config.imputation) {
    ImputationResult imp = impute_case_mix(data, config.tau);
    data = std::move(imp.data);
    for (const auto& entry : imp.report)
      diag << "warning: imputed " << entry.n_imputed << " values of "
           << entry.covariate << " with " << fmt_g(entry.fill_value) << "\n";
  }
  ModelSpec spec;
  spec.covariate_names = data.covariate_names;
  spec.stratify_by_center = stratified;
  const CoxFit fit = fit_cox(data, spec);
  if (!fit.converged)
    diag << "warning: model did not converge (score norm " << fmt_g(fit.score_norm)
         << ")\n";
  write_text_file(out_path(config.out_dir, "fit_report.txt"), fit_report_text(fit));
  write_text_file(out_path(config.out_dir, "baseline_jumps.csv"),
                  baseline_jumps_csv(fit));
  out << fit_report_text(fit);
}

void cmd_simulate(const std::string& scenario_path, const SimulateOptions& options,
                  std::ostream& out, std::ostream& diag) {
  ScenarioConfig config = load_scenario_file(scenario_path);
  if (!options.paper_scale) config = desk_scale(config);
  if (options.seed_override) config.seed = options.seed;

  const ScenarioResult result = run_scenario(config, options.threads);
  if (result.summary.replications_dropped > 0)
    diag << "warning: dropped " << result.summary.replications_dropped
         << " replicates\n";

  write_text_file(out_path(options.out_dir, "summary.csv"),
                  summarize_table({result.summary}));
  write_text_file(out_path(options.out_dir, "diagnostics.csv"),
                  diagnostics_csv(result.diagnostics));

  out << "scenario " << config.name << ": " << config.n_centers << " centers, "
      << result.summary.replications << " replicates\n";
  out << summarize_table({result.summary});
}

}  // namespace survbench
