#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "survbench/funnel.hpp"

namespace survbench {

// Settings shared by the dataset-driven commands. Loadable from a strict
// key-value config file; command-line flags override file values.
struct RunConfig {
  std::string input;
  std::vector<std::string> covariates;
  double tau = 12.0;
  double alpha = 0.05;
  Multiplicity multiplicity = Multiplicity::bonferroni;
  int min_center_size = 1;
  bool imputation = true;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int bootstrap_replicates = 1000;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

struct SimulateOptions {
  std::string out_dir = ".";
  bool paper_scale = false;
  bool seed_override = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Each command writes its artifacts under out_dir, prints a short human
// summary to `out` and warnings to `diag`, and throws on error.
void cmd_funnel_mortality(const RunConfig& config, std::ostream& out,
                          std::ostream& diag);
void cmd_funnel_followup(const RunConfig& config, std::ostream& out,
                         std::ostream& diag);
void cmd_pseudo_compare(const RunConfig& config, std::ostream& out,
                        std::ostream& diag);
void cmd_fit_report(const RunConfig& config, bool stratified, std::ostream& out,
                    std::ostream& diag);
void cmd_simulate(const std::string& scenario_path, const SimulateOptions& options,
                  std::ostream& out, std::ostream& diag);

}  // namespace survbench
