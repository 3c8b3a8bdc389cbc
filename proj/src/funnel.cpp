#include "survbench/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "survbench/estimators.hpp"
#include "survbench/normal.hpp"
#include "survbench/poisson_binomial.hpp"
#include "survbench/textio.hpp"

namespace survbench {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::over: return "Over";
    case Classification::target: return "Target";
    case Classification::under: return "Under";
  }
  return "?";
}

void ProbabilityDiagnostics::note(double raw) {
  if (raw > 1.0 + 1e-6) {
    ++clamped;
    worst_excess = std::max(worst_excess, raw - 1.0);
  }
}

namespace {

// Walks a step function's value just before each target time; targets must be
// visited in ascending order.
class LeftValueWalker {
 public:
  explicit LeftValueWalker(const StepFunction& f) : f_(f) {}
  double at(double t) {
    const auto& knots = f_.knots();
    while (pos_ < knots.size() && knots[pos_] < t) ++pos_;
    return pos_ == 0 ? f_.initial_value() : f_.values()[pos_ - 1];
  }

 private:
  const StepFunction& f_;
  std::size_t pos_ = 0;
};

double clamp01(double raw, ProbabilityDiagnostics* diag) {
  if (diag) diag->note(raw);
  return std::min(1.0, std::max(0.0, raw));
}

}  // namespace

double event_probability(const CoxFit& fit, const std::vector<double>& x,
                         const StepFunction& center_followup, double tau,
                         ProbabilityDiagnostics* diag) {
  if (fit.stratified)
    throw std::invalid_argument(
        "event probability requires a pooled (unstratified) benchmark model");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  const double risk = std::exp(linear_predictor(fit, x));
  const StepFunction& h0 = fit.baselines[0];
  LeftValueWalker g(center_followup);
  double sum = 0.0, prev_cum = 0.0;
  for (std::size_t k = 0; k < h0.size() && h0.knots()[k] <= tau; ++k) {
    const double jump = h0.values()[k] - prev_cum;
    sum += jump * risk * std::exp(-risk * prev_cum) * g.at(h0.knots()[k]);
    prev_cum = h0.values()[k];
  }
  return clamp01(sum, diag);
}

double followup_probability(const CoxFit& stratified_fit,
                            const StepFunction& pooled_followup,
                            const StepFunction& censoring_hazard,
                            const std::vector<double>& x,
                            const std::string& center, double tau,
                            ProbabilityDiagnostics* diag) {
  if (!stratified_fit.stratified)
    throw std::invalid_argument(
        "follow-up probability requires a center-stratified model");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  const StepFunction& h0 = stratified_fit.baseline(center);
  const double risk = std::exp(linear_predictor(stratified_fit, x));
  LeftValueWalker g(pooled_followup);
  LeftValueWalker base(h0);
  double sum = 0.0, prev_cum = 0.0;
  const auto& knots = censoring_hazard.knots();
  for (std::size_t k = 0; k < knots.size() && knots[k] <= tau; ++k) {
    const double jump = censoring_hazard.values()[k] - prev_cum;
    prev_cum = censoring_hazard.values()[k];
    const double surv = std::exp(-risk * base.at(knots[k]));
    sum += jump * g.at(knots[k]) * surv;
  }
  return clamp01(sum, diag);
}

double pooled_event_proportion(const Dataset& data, double tau,
                               OutcomeKind kind) {
  if (data.records.empty()) throw std::invalid_argument("empty cohort");
  const int wanted = kind == OutcomeKind::death ? 1 : 0;
  std::size_t hits = 0;
  for (const auto& r : data.records)
    if (r.status == wanted && r.time <= tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.records.size());
}

CenterSummary summarize_center(const Dataset& data,
                               const std::vector<std::size_t>& indices,
                               const std::vector<double>& probs,
                               const BenchmarkConfig& config, double p0,
                               OutcomeKind kind) {
  if (indices.size() != probs.size())
    throw std::invalid_argument("probs must align with records");
  if (indices.empty()) throw std::invalid_argument("empty center");

  CenterSummary s;
  s.center_id = data.records[indices[0]].center_id;
  s.n = indices.size();
  const int wanted = kind == OutcomeKind::death ? 1 : 0;
  for (std::size_t i : indices) {
    const auto& r = data.records[i];
    if (r.status == wanted && r.time <= config.tau) ++s.observed;
  }
  for (double p : probs) {
    s.expected += p;
    s.variance += p * (1.0 - p);
  }
  s.p_exact = poisson_binomial_p_value(poisson_binomial_pmf(probs), s.observed);
  if (s.variance <= 0.0) {
    s.degenerate = true;
    s.z = std::numeric_limits<double>::quiet_NaN();
    s.eff_n = std::numeric_limits<double>::quiet_NaN();
    s.oe_ratio = s.expected > 0.0
                     ? s.observed / s.expected
                     : std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.z = (s.observed - s.expected) / std::sqrt(s.variance);
  s.oe_ratio = s.observed / s.expected;
  s.eff_n = effective_sample_size(s.expected, s.variance, p0);
  const double zc = normal_quantile(1.0 - config.alpha / 2.0);
  if (s.z < -zc)
    s.classification = Classification::over;
  else if (s.z > zc)
    s.classification = Classification::under;
  else
    s.classification = Classification::target;
  return s;
}

double effective_sample_size(double expected, double variance, double p0) {
  if (!(variance > 0.0))
    throw std::invalid_argument("effective sample size requires V > 0");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("p0 must lie in (0,1)");
  return (expected * expected / variance) * (1.0 - p0) / p0;
}

FunnelGeometry make_funnel_geometry(double p0, double alpha,
                                    Multiplicity multiplicity,
                                    std::size_t n_centers) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  FunnelGeometry g;
  g.p0 = p0;
  g.alpha = alpha;
  g.alpha_prime = multiplicity == Multiplicity::bonferroni && n_centers > 0
                      ? alpha / static_cast<double>(n_centers)
                      : alpha;
  g.z_inner = normal_quantile(1.0 - alpha / 2.0);
  g.z_outer = normal_quantile(1.0 - g.alpha_prime / 2.0);
  return g;
}

std::pair<double, double> funnel_limits(double x, const FunnelGeometry& g,
                                        FunnelLevel level) {
  if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
  if (!(g.p0 > 0.0 && g.p0 < 1.0))
    throw std::invalid_argument("p0 must lie in (0,1)");
  const double z = level == FunnelLevel::inner ? g.z_inner : g.z_outer;
  const double half = z * std::sqrt((1.0 - g.p0) / g.p0) / std::sqrt(x);
  return {1.0 - half, 1.0 + half};
}

std::pair<double, double> funnel_limits_raw(double x, const FunnelGeometry& g,
                                            FunnelLevel level) {
  if (!(x > 0.0)) throw std::invalid_argument("x must be > 0");
  const double z = level == FunnelLevel::inner ? g.z_inner : g.z_outer;
  const double half = z / std::sqrt(x);
  return {1.0 - half, 1.0 + half};
}

ImputationResult impute_case_mix(const Dataset& data, double tau) {
  ImputationResult out;
  out.data = data;
  const std::size_t p = data.covariate_arity();

  // Favorable outcome: known alive at tau.
  std::vector<std::size_t> favorable;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    const bool alive_at_tau =
        (r.status == 0 && r.time >= tau) || (r.status == 1 && r.time > tau);
    if (alive_at_tau) favorable.push_back(i);
  }

  for (std::size_t k = 0; k < p; ++k) {
    std::size_t n_missing = 0;
    for (const auto& r : data.records)
      if (is_missing(r.covariates[k])) ++n_missing;
    if (n_missing == 0) continue;

    std::vector<double> values;
    for (std::size_t i : favorable)
      if (!is_missing(data.records[i].covariates[k]))
        values.push_back(data.records[i].covariates[k]);
    if (values.empty())
      throw std::invalid_argument(
          "covariate missing for all favorable-outcome patients: " +
          data.covariate_names[k]);
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    const double median = m % 2 == 1
                              ? values[m / 2]
                              : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    for (auto& r : out.data.records)
      if (is_missing(r.covariates[k])) r.covariates[k] = median;
    out.report.push_back({data.covariate_names[k], n_missing, median});
  }
  return out;
}

FunnelChart build_funnel_chart(const std::vector<CenterSummary>& summaries,
                               const FunnelGeometry& geometry) {
  FunnelChart chart;
  chart.geometry = geometry;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : summaries) {
    if (s.degenerate) continue;
    if (chart.points.empty()) {
      lo = hi = s.eff_n;
    } else {
      lo = std::min(lo, s.eff_n);
      hi = std::max(hi, s.eff_n);
    }
    chart.points.push_back({s.center_id, s.eff_n, s.oe_ratio, s.classification});
    switch (s.classification) {
      case Classification::over: ++chart.count_over; break;
      case Classification::target: ++chart.count_target; break;
      case Classification::under: ++chart.count_under; break;
    }
  }
  if (chart.points.empty())
    throw std::invalid_argument("all centers degenerate; nothing to plot");
  if (lo == hi) {
    lo *= 0.5;
    hi *= 1.5;
  }
  const std::size_t samples = 200;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const auto inner = funnel_limits(x, geometry, FunnelLevel::inner);
    const auto outer = funnel_limits(x, geometry, FunnelLevel::outer);
    chart.curve_x.push_back(x);
    chart.inner_lower.push_back(inner.first);
    chart.inner_upper.push_back(inner.second);
    chart.outer_lower.push_back(outer.first);
    chart.outer_upper.push_back(outer.second);
  }
  return chart;
}

std::string funnel_chart_to_text(const FunnelChart& chart) {
  std::string out = "funnelchart 1\n";
  out += "p0 " + fmt_g(chart.geometry.p0) + "\n";
  out += "alpha " + fmt_g(chart.geometry.alpha) + "\n";
  out += "alpha_prime " + fmt_g(chart.geometry.alpha_prime) + "\n";
  out += "z_inner " + fmt_g(chart.geometry.z_inner) + "\n";
  out += "z_outer " + fmt_g(chart.geometry.z_outer) + "\n";
  out += "counts " + std::to_string(chart.count_over) + " " +
         std::to_string(chart.count_target) + " " +
         std::to_string(chart.count_under) + "\n";
  out += "curves " + std::to_string(chart.curve_x.size()) + "\n";
  for (std::size_t i = 0; i < chart.curve_x.size(); ++i)
    out += fmt_g(chart.curve_x[i]) + " " + fmt_g(chart.inner_lower[i]) + " " +
           fmt_g(chart.inner_upper[i]) + " " + fmt_g(chart.outer_lower[i]) +
           " " + fmt_g(chart.outer_upper[i]) + "\n";
  out += "points " + std::to_string(chart.points.size()) + "\n";
  for (const auto& pt : chart.points)
    out += fmt_g(pt.eff_n) + " " + fmt_g(pt.oe_ratio) + " " +
           to_string(pt.classification) + " " + pt.center_id + "\n";
  return out;
}

FunnelChart funnel_chart_from_text(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  std::size_t at = 0;
  auto next = [&]() -> std::string {
    while (at < lines.size() && trim(lines[at]).empty()) ++at;
    if (at >= lines.size())
      throw std::invalid_argument("truncated funnel chart document");
    return lines[at++];
  };
  if (trim(next()) != "funnelchart 1")
    throw std::invalid_argument("not a funnel chart document");
  FunnelChart chart;
  auto field = [&](const std::string& key) {
    std::string line = next();
    auto sep = line.find(' ');
    if (sep == std::string::npos || line.substr(0, sep) != key)
      throw std::invalid_argument("expected field '" + key + "'");
    return trim(line.substr(sep + 1));
  };
  chart.geometry.p0 = parse_double(field("p0"));
  chart.geometry.alpha = parse_double(field("alpha"));
  chart.geometry.alpha_prime = parse_double(field("alpha_prime"));
  chart.geometry.z_inner = parse_double(field("z_inner"));
  chart.geometry.z_outer = parse_double(field("z_outer"));
  {
    auto parts = split(field("counts"), ' ');
    if (parts.size() != 3) throw std::invalid_argument("bad counts line");
    chart.count_over = static_cast<std::size_t>(parse_long(parts[0]));
    chart.count_target = static_cast<std::size_t>(parse_long(parts[1]));
    chart.count_under = static_cast<std::size_t>(parse_long(parts[2]));
  }
  const long n_curves = parse_long(field("curves"));
  for (long i = 0; i < n_curves; ++i) {
    auto parts = split(trim(next()), ' ');
    if (parts.size() != 5) throw std::invalid_argument("bad curve row");
    chart.curve_x.push_back(parse_double(parts[0]));
    chart.inner_lower.push_back(parse_double(parts[1]));
    chart.inner_upper.push_back(parse_double(parts[2]));
    chart.outer_lower.push_back(parse_double(parts[3]));
    chart.outer_upper.push_back(parse_double(parts[4]));
  }
  const long n_points = parse_long(field("points"));
  for (long i = 0; i < n_points; ++i) {
    std::string line = trim(next());
    auto parts = split(line, ' ');
    if (parts.size() < 4) throw std::invalid_argument("bad point row");
    ChartPoint pt;
    pt.eff_n = parse_double(parts[0]);
    pt.oe_ratio = parse_double(parts[1]);
    if (parts[2] == "Over")
      pt.classification = Classification::over;
    else if (parts[2] == "Target")
      pt.classification = Classification::target;
    else if (parts[2] == "Under")
      pt.classification = Classification::under;
    else
      throw std::invalid_argument("bad classification: " + parts[2]);
    pt.center_id = parts[3];
    for (std::size_t k = 4; k < parts.size(); ++k) pt.center_id += " " + parts[k];
    chart.points.push_back(std::move(pt));
  }
  return chart;
}

std::string center_summaries_csv(const std::vector<CenterSummary>& summaries) {
  std::string out =
      "center_id,n,O,E,V,Z,oe_ratio,eff_n,p_exact,classification\n";
  for (const auto& s : summaries) {
    out += s.center_id + "," + std::to_string(s.n) + "," +
           std::to_string(s.observed) + "," + fmt_g(s.expected) + "," +
           fmt_g(s.variance) + ",";
    if (s.degenerate) {
      out += ",";
      out += std::isnan(s.oe_ratio) ? "" : fmt_g(s.oe_ratio);
      out += ",," + fmt_g(s.p_exact) + ",Degenerate\n";
    } else {
      out += fmt_g(s.z) + "," + fmt_g(s.oe_ratio) + "," + fmt_g(s.eff_n) +
             "," + fmt_g(s.p_exact) + "," + to_string(s.classification) + "\n";
    }
  }
  return out;
}

MortalityBenchmark benchmark_mortality(const Dataset& data,
                                       const BenchmarkConfig& config) {
  data.validate();
  if (!(config.tau > 0.0)) throw std::invalid_argument("tau must be > 0");

  MortalityBenchmark result;
  Dataset working = data;
  if (config.imputation_enabled) {
    ImputationResult imp = impute_case_mix(data, config.tau);
    working = std::move(imp.data);
    result.imputation = std::move(imp.report);
  }

  const double p0 = pooled_event_proportion(working, config.tau);
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::runtime_error(
        "pooled event proportion within tau is degenerate (" + fmt_g(p0) + ")");

  ModelSpec spec;
  spec.covariate_names = working.covariate_names;
  spec.stratify_by_center = false;
  result.fit = fit_cox(working, spec);
  if (!result.fit.converged)
    result.warnings.push_back("benchmark model did not converge (score norm " +
                              fmt_g(result.fit.score_norm) + ")");

  // Precompute the baseline jumps at or before tau once; per-center follow-up
  // values are then walked against the same grid.
  const StepFunction& h0 = result.fit.baselines[0];
  std::vector<double> jump_time, jump_size, cum_before;
  double prev = 0.0;
  for (std::size_t k = 0; k < h0.size() && h0.knots()[k] <= config.tau; ++k) {
    jump_time.push_back(h0.knots()[k]);
    jump_size.push_back(h0.values()[k] - prev);
    cum_before.push_back(prev);
    prev = h0.values()[k];
  }

  StepFunction pooled_g = reverse_kaplan_meier(working.records);
  ProbabilityDiagnostics diag;
  std::vector<double> g_left(jump_time.size());

  for (const auto& [center, indices] : working.center_index) {
    if (indices.size() < static_cast<std::size_t>(config.min_center_size)) {
      result.warnings.push_back("center " + center + " below minimum volume (" +
                                std::to_string(indices.size()) + "); skipped");
      continue;
    }
    const bool pooled_fallback =
        indices.size() < static_cast<std::size_t>(config.g_pool_threshold);
    if (pooled_fallback)
      result.warnings.push_back("center " + center +
                                " too small for its own follow-up curve; "
                                "pooled follow-up used");
    const StepFunction g_center =
        pooled_fallback ? pooled_g : reverse_kaplan_meier(working, indices);

    LeftValueWalker walker(g_center);
    for (std::size_t k = 0; k < jump_time.size(); ++k)
      g_left[k] = walker.at(jump_time[k]);

    std::vector<double> probs;
    probs.reserve(indices.size());
    for (std::size_t i : indices) {
      const double risk =
          std::exp(linear_predictor(result.fit, working.records[i].covariates));
      double sum = 0.0;
      for (std::size_t k = 0; k < jump_time.size(); ++k)
        sum += jump_size[k] * risk * std::exp(-risk * cum_before[k]) * g_left[k];
      diag.note(sum);
      probs.push_back(std::min(1.0, std::max(0.0, sum)));
    }
    result.summaries.push_back(
        summarize_center(working, indices, probs, config, p0));
    if (result.summaries.back().degenerate)
      result.warnings.push_back("center " + center +
                                " has zero variance; excluded from funnel");
  }
  result.clamped_probabilities = diag.clamped;
  if (diag.clamped > 0)
    result.warnings.push_back(
        std::to_string(diag.clamped) + " event probabilities exceeded 1 (worst +" +
        fmt_g(diag.worst_excess) + "); clamped");
  result.geometry = make_funnel_geometry(p0, config.alpha, config.multiplicity,
                                         result.summaries.size());
  return result;
}

FollowupBenchmark benchmark_followup(const Dataset& data,
                                     const BenchmarkConfig& config) {
  data.validate();
  if (!(config.tau > 0.0)) throw std::invalid_argument("tau must be > 0");

  FollowupBenchmark result;
  Dataset working = data;
  if (config.imputation_enabled) {
    ImputationResult imp = impute_case_mix(data, config.tau);
    working = std::move(imp.data);
    result.imputation = std::move(imp.report);
  }

  // Strata without any death cannot carry a Breslow baseline; they contribute
  // nothing to the partial likelihood, so they are fitted out and given an
  // empty (zero) baseline afterwards.
  std::vector<std::string> no_event_centers;
  for (const auto& [center, indices] : working.center_index) {
    bool has_event = false;
    for (std::size_t i : indices)
      if (working.records[i].status == 1) {
        has_event = true;
        break;
      }
    if (!has_event) no_event_centers.push_back(center);
  }
  Dataset fit_data = working;
  if (!no_event_centers.empty()) {
    fit_data.records.clear();
    for (const auto& r : working.records) {
      bool skip = std::binary_search(no_event_centers.begin(),
                                     no_event_centers.end(), r.center_id);
      if (!skip) fit_data.records.push_back(r);
    }
    fit_data.rebuild_index();
    for (const auto& c : no_event_centers)
      result.warnings.push_back("center " + c +
                                " has no events; flat survival stratum used");
  }

  ModelSpec spec;
  spec.covariate_names = working.covariate_names;
  spec.stratify_by_center = true;
  result.fit = fit_cox(fit_data, spec);
  if (!result.fit.converged)
    result.warnings.push_back("stratified model did not converge (score norm " +
                              fmt_g(result.fit.score_norm) + ")");
  for (const auto& c : no_event_centers) {
    result.fit.baselines.emplace_back(0.0);
    result.fit.strata.push_back(c);
    result.fit.stratum_index[c] = result.fit.baselines.size() - 1;
  }

  const StepFunction pooled_g = reverse_kaplan_meier(working.records);
  const StepFunction censoring_hazard = hazard_steps_from_survival(pooled_g);

  const double p0 = pooled_event_proportion(working, config.tau,
                                            OutcomeKind::loss_to_followup);
  result.degenerate = !(p0 > 0.0 && p0 < 1.0);

  ProbabilityDiagnostics diag;
  for (const auto& [center, indices] : working.center_index) {
    if (indices.size() < static_cast<std::size_t>(config.min_center_size)) {
      result.warnings.push_back("center " + center + " below minimum volume (" +
                                std::to_string(indices.size()) + "); skipped");
      continue;
    }
    std::vector<double> probs;
    probs.reserve(indices.size());
    for (std::size_t i : indices)
      probs.push_back(followup_probability(result.fit, pooled_g,
                                           censoring_hazard,
                                           working.records[i].covariates,
                                           center, config.tau, &diag));
    // p0 = 0 (no losses anywhere) still yields well-defined O/E/V summaries;
    // eff_n needs a proper p0 and is NaN in the degenerate case.
    CenterSummary s;
    if (result.degenerate) {
      s = summarize_center(working, indices, probs, config, 0.5,
                           OutcomeKind::loss_to_followup);
      s.eff_n = std::numeric_limits<double>::quiet_NaN();
      s.degenerate = true;
    } else {
      s = summarize_center(working, indices, probs, config, p0,
                           OutcomeKind::loss_to_followup);
    }
    result.summaries.push_back(std::move(s));
    if (result.summaries.back().degenerate && !result.degenerate)
      result.warnings.push_back("center " + center +
                                " has zero variance; excluded from funnel");
  }
  if (diag.clamped > 0)
    result.warnings.push_back(std::to_string(diag.clamped) +
                              " follow-up probabilities exceeded 1 (worst +" +
                              fmt_g(diag.worst_excess) + "); clamped");
  if (result.degenerate) {
    result.warnings.push_back(
        "no losses to follow-up within tau anywhere; funnel is degenerate");
    result.geometry.p0 = p0;
    result.geometry.alpha = config.alpha;
    result.geometry.alpha_prime = config.alpha;
    result.geometry.z_inner = normal_quantile(1.0 - config.alpha / 2.0);
    result.geometry.z_outer = result.geometry.z_inner;
  } else {
    result.geometry = make_funnel_geometry(
        p0, config.alpha, config.multiplicity, result.summaries.size());
  }
  return result;
}

}  // namespace survbench
