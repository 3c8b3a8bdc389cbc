#include "survbench/scenario_io.hpp"

#include <stdexcept>

#include "survbench/textio.hpp"

namespace survbench {

ScenarioConfig parse_scenario_text(const std::string& text) {
  ScenarioConfig c;
  for (const auto& kv : parse_key_value_text(text)) {
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    try {
      if (k == "name") c.name = v;
      else if (k == "n_centers") c.n_centers = static_cast<int>(parse_long(v));
      else if (k == "center_size_mean") c.center_size_mean = parse_double(v);
      else if (k == "center_size_sd") c.center_size_sd = parse_double(v);
      else if (k == "censoring_log_shape_mean") c.censoring_log_shape_mean = parse_double(v);
      else if (k == "censoring_log_rate_mean") c.censoring_log_rate_mean = parse_double(v);
      else if (k == "censoring_log_shape_sd") c.censoring_log_shape_sd = parse_double(v);
      else if (k == "censoring_log_rate_sd") c.censoring_log_rate_sd = parse_double(v);
      else if (k == "censoring_log_corr") c.censoring_log_corr = parse_double(v);
      else if (k == "covariate_between_var") c.covariate_between_var = parse_double(v);
      else if (k == "covariate_within_var") c.covariate_within_var = parse_double(v);
      else if (k == "covariate_beta") c.covariate_beta = parse_double(v);
      else if (k == "baseline_shape") c.baseline_shape = parse_double(v);
      else if (k == "baseline_rate") c.baseline_rate = parse_double(v);
      else if (k == "frailty_log_variance") c.frailty_log_variance = parse_double(v);
      else if (k == "same_followup") c.same_followup = parse_bool(v);
      else if (k == "same_followup_log_shape") c.same_followup_log_shape = parse_double(v);
      else if (k == "same_followup_log_rate") c.same_followup_log_rate = parse_double(v);
      else if (k == "non_ph") c.non_ph = parse_bool(v);
      else if (k == "tau") c.tau = parse_double(v);
      else if (k == "replications") c.replications = static_cast<int>(parse_long(v));
      else if (k == "bootstrap_replicates") c.bootstrap_replicates = static_cast<int>(parse_long(v));
      else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_long(v));
      else
        throw std::invalid_argument("unknown scenario field: " + k +
                                    " (line " + std::to_string(kv.line_no) + ")");
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).rfind("unknown scenario field", 0) == 0) throw;
      throw std::invalid_argument("scenario field " + k + " (line " +
                                  std::to_string(kv.line_no) + "): " + e.what());
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  return parse_scenario_text(read_text_file(path));
}

std::string scenario_to_text(const ScenarioConfig& c) {
  std::string out;
  out += "name " + c.name + "\n";
  out += "n_centers " + std::to_string(c.n_centers) + "\n";
  out += "center_size_mean " + fmt_g(c.center_size_mean) + "\n";
  out += "center_size_sd " + fmt_g(c.center_size_sd) + "\n";
  out += "censoring_log_shape_mean " + fmt_g(c.censoring_log_shape_mean) + "\n";
  out += "censoring_log_rate_mean " + fmt_g(c.censoring_log_rate_mean) + "\n";
  out += "censoring_log_shape_sd " + fmt_g(c.censoring_log_shape_sd) + "\n";
  out += "censoring_log_rate_sd " + fmt_g(c.censoring_log_rate_sd) + "\n";
  out += "censoring_log_corr " + fmt_g(c.censoring_log_corr) + "\n";
  out += "covariate_between_var " + fmt_g(c.covariate_between_var) + "\n";
  out += "covariate_within_var " + fmt_g(c.covariate_within_var) + "\n";
  out += "covariate_beta " + fmt_g(c.covariate_beta) + "\n";
  out += "baseline_shape " + fmt_g(c.baseline_shape) + "\n";
  out += "baseline_rate " + fmt_g(c.baseline_rate) + "\n";
  out += "frailty_log_variance " + fmt_g(c.frailty_log_variance) + "\n";
  out += std::string("same_followup ") + (c.same_followup ? "true" : "false") + "\n";
  out += "same_followup_log_shape " + fmt_g(c.same_followup_log_shape) + "\n";
  out += "same_followup_log_rate " + fmt_g(c.same_followup_log_rate) + "\n";
  out += std::string("non_ph ") + (c.non_ph ? "true" : "false") + "\n";
  out += "tau " + fmt_g(c.tau) + "\n";
  out += "replications " + std::to_string(c.replications) + "\n";
  out += "bootstrap_replicates " + std::to_string(c.bootstrap_replicates) + "\n";
  out += "seed " + std::to_string(c.seed) + "\n";
  return out;
}

}  // namespace survbench
