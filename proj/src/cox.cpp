#include "survbench/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "survbench/textio.hpp"

namespace survbench {

namespace {

// Dense symmetric positive-definite solve via Cholesky. Returns false when a
// pivot collapses, which signals a collinear design.
bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                    std::size_t p, std::vector<double>& out) {
  // a is row-major p x p, overwritten by the factor L.
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (!(diag > 1e-12)) return false;
    const double l = std::sqrt(diag);
    a[j * p + j] = l;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < p; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * p + k] * b[k];
    b[i] = v / a[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) v -= a[k * p + ii] * b[k];
    b[ii] = v / a[ii * p + ii];
  }
  out = std::move(b);
  return true;
}

struct StratumData {
  std::string id;
  std::vector<double> entry;
  std::vector<double> time;
  std::vector<int> status;
  std::vector<double> x;  // row-major n x p, centered
  std::vector<std::size_t> by_time;   // indices sorted by time asc
  std::vector<std::size_t> by_entry;  // indices sorted by entry asc
  std::size_t n_events = 0;
};

struct LikelihoodEval {
  double loglik = 0.0;
  std::vector<double> score;
  std::vector<double> info;  // p x p
};

// One sweep over a stratum: risk-set sums maintained incrementally as
// subjects enter (entry < s) and leave (time < s) while event times advance.
void accumulate_stratum(const StratumData& st, const std::vector<double>& beta,
                        std::size_t p, bool want_derivs, LikelihoodEval& out,
                        std::vector<double>* baseline_times,
                        std::vector<double>* baseline_jumps) {
  const std::size_t n = st.time.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t k = 0; k < p; ++k) eta += beta[k] * st.x[i * p + k];
    w[i] = std::exp(eta);
  }

  double s0 = 0.0;
  std::vector<double> s1(p, 0.0), s2(p * p, 0.0);
  auto add = [&](std::size_t i, double sign) {
    s0 += sign * w[i];
    for (std::size_t a = 0; a < p; ++a) {
      const double wx = sign * w[i] * st.x[i * p + a];
      s1[a] += wx;
      for (std::size_t b = a; b < p; ++b) s2[a * p + b] += wx * st.x[i * p + b];
    }
  };

  std::size_t enter = 0;  // next index in by_entry to add
  std::size_t leave = 0;  // next index in by_time to remove
  std::size_t i = 0;
  std::vector<double> xsum(p);
  while (i < n) {
    const double t = st.time[st.by_time[i]];
    while (enter < n && st.entry[st.by_entry[enter]] < t) add(st.by_entry[enter++], +1.0);
    while (leave < n && st.time[st.by_time[leave]] < t) add(st.by_time[leave++], -1.0);

    std::size_t d = 0, tied = 0;
    std::fill(xsum.begin(), xsum.end(), 0.0);
    double eta_sum = 0.0;
    while (i + tied < n && st.time[st.by_time[i + tied]] == t) {
      const std::size_t idx = st.by_time[i + tied];
      if (st.status[idx] == 1) {
        ++d;
        for (std::size_t k = 0; k < p; ++k) {
          xsum[k] += st.x[idx * p + k];
          eta_sum += beta[k] * st.x[idx * p + k];
        }
      }
      ++tied;
    }
    if (d > 0) {
      if (!(s0 > 0.0)) throw std::runtime_error("empty risk set in stratum " + st.id);
      out.loglik += eta_sum - static_cast<double>(d) * std::log(s0);
      if (want_derivs) {
        for (std::size_t a = 0; a < p; ++a) {
          const double mean_a = s1[a] / s0;
          out.score[a] += xsum[a] - static_cast<double>(d) * mean_a;
          for (std::size_t b = a; b < p; ++b)
            out.info[a * p + b] +=
                static_cast<double>(d) * (s2[a * p + b] / s0 - mean_a * s1[b] / s0);
        }
      }
      if (baseline_times) {
        baseline_times->push_back(t);
        baseline_jumps->push_back(static_cast<double>(d) / s0);
      }
    }
    i += tied;
  }
}

std::vector<double> event_weighted_means(const Dataset& data, std::size_t p) {
  std::vector<double> center(p, 0.0);
  std::size_t total_events = 0;
  for (const auto& r : data.records) {
    if (r.status == 1) {
      ++total_events;
      for (std::size_t k = 0; k < p; ++k) center[k] += r.covariates[k];
    }
  }
  if (total_events == 0) throw std::invalid_argument("dataset has no events");
  for (std::size_t k = 0; k < p; ++k)
    center[k] /= static_cast<double>(total_events);
  return center;
}

std::vector<StratumData> build_strata(const Dataset& data, const ModelSpec& spec,
                                      bool centered) {
  const std::size_t p = spec.covariate_names.size();
  for (std::size_t i = 0; i < data.records.size(); ++i)
    for (double v : data.records[i].covariates)
      if (is_missing(v))
        throw std::invalid_argument("missing covariate at record " +
                                    std::to_string(i) +
                                    "; apply imputation first");

  const std::vector<double> center =
      centered ? event_weighted_means(data, p) : std::vector<double>(p, 0.0);

  std::vector<StratumData> strata;
  auto fill = [&](StratumData& st, const std::vector<std::size_t>* idx) {
    const std::size_t m = idx ? idx->size() : data.records.size();
    for (std::size_t j = 0; j < m; ++j) {
      const auto& r = data.records[idx ? (*idx)[j] : j];
      st.entry.push_back(r.entry_time);
      st.time.push_back(r.time);
      st.status.push_back(r.status);
      for (std::size_t k = 0; k < p; ++k)
        st.x.push_back(r.covariates[k] - center[k]);
      if (r.status == 1) ++st.n_events;
    }
  };
  if (spec.stratify_by_center) {
    strata.reserve(data.center_index.size());
    for (const auto& [id, idx] : data.center_index) {
      StratumData st;
      st.id = id;
      fill(st, &idx);
      if (st.n_events == 0)
        throw std::invalid_argument("stratum without events: " + id);
      strata.push_back(std::move(st));
    }
  } else {
    StratumData st;
    st.id = "all";
    fill(st, nullptr);
    if (st.n_events == 0) throw std::invalid_argument("dataset has no events");
    strata.push_back(std::move(st));
  }

  for (auto& st : strata) {
    const std::size_t n = st.time.size();
    st.by_time.resize(n);
    st.by_entry.resize(n);
    std::iota(st.by_time.begin(), st.by_time.end(), std::size_t{0});
    std::iota(st.by_entry.begin(), st.by_entry.end(), std::size_t{0});
    std::sort(st.by_time.begin(), st.by_time.end(), [&](std::size_t a, std::size_t b) {
      return st.time[a] != st.time[b] ? st.time[a] < st.time[b] : a < b;
    });
    std::sort(st.by_entry.begin(), st.by_entry.end(), [&](std::size_t a, std::size_t b) {
      return st.entry[a] != st.entry[b] ? st.entry[a] < st.entry[b] : a < b;
    });
  }
  return strata;
}

}  // namespace

const StepFunction& CoxFit::baseline(
    const std::optional<std::string>& stratum) const {
  if (!stratified) {
    if (stratum.has_value())
      throw std::invalid_argument("model is not stratified");
    return baselines[0];
  }
  if (!stratum.has_value())
    throw std::invalid_argument("stratified model requires a stratum");
  auto it = stratum_index.find(*stratum);
  if (it == stratum_index.end())
    throw std::invalid_argument("unknown stratum: " + *stratum);
  return baselines[it->second];
}

CoxFit fit_cox(const Dataset& data, const ModelSpec& spec) {
  const std::size_t p = spec.covariate_names.size();
  if (data.records.empty()) throw std::invalid_argument("empty cohort");
  if (p != data.covariate_arity())
    throw std::invalid_argument("model covariates do not match dataset");
  if (!(spec.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  const std::vector<StratumData> strata = build_strata(data, spec, true);

  // Event-weighted covariate means, the internal centering applied by
  // build_strata.
  std::vector<double> center = event_weighted_means(data, p);

  auto evaluate = [&](const std::vector<double>& beta, bool want_derivs) {
    LikelihoodEval ev;
    ev.score.assign(p, 0.0);
    ev.info.assign(p * p, 0.0);
    for (const auto& st : strata)
      accumulate_stratum(st, beta, p, want_derivs, ev, nullptr, nullptr);
    return ev;
  };

  std::vector<double> beta(p, 0.0);
  LikelihoodEval ev = evaluate(beta, true);
  int iterations = 0;

  auto score_norm = [&](const std::vector<double>& s) {
    double m = 0.0;
    for (double v : s) m = std::max(m, std::fabs(v));
    return m;
  };

  // A design with a covariate constant across every risk set has a singular
  // information matrix at the start; reject it before iterating.
  if (p > 0) {
    std::vector<double> info_full(ev.info);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b)
        info_full[a * p + b] = info_full[b * p + a];
    std::vector<double> probe(p, 0.0);
    std::vector<double> unused;
    if (!cholesky_solve(info_full, probe, p, unused))
      throw std::runtime_error("collinear case mix");
  }

  bool hit_singular = false;
  for (; p > 0 && iterations < spec.max_iter; ++iterations) {
    if (score_norm(ev.score) < 1e-8) break;

    // Mirror the upper triangle before solving.
    std::vector<double> info_full(ev.info);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b)
        info_full[a * p + b] = info_full[b * p + a];

    std::vector<double> delta;
    if (!cholesky_solve(info_full, ev.score, p, delta)) {
      if (iterations == 0) throw std::runtime_error("collinear case mix");
      hit_singular = true;
      break;
    }

    // Step-halving keeps the log-likelihood non-decreasing.
    double step = 1.0;
    std::vector<double> cand(p);
    LikelihoodEval ev_new;
    for (int h = 0; h < 30; ++h) {
      for (std::size_t k = 0; k < p; ++k) cand[k] = beta[k] + step * delta[k];
      ev_new = evaluate(cand, true);
      if (ev_new.loglik >= ev.loglik - 1e-12) break;
      step *= 0.5;
    }
    const double rel_change =
        std::fabs(ev_new.loglik - ev.loglik) / (std::fabs(ev.loglik) + 1.0);
    beta = cand;
    ev = std::move(ev_new);
    if (rel_change < spec.tolerance) {
      ++iterations;
      break;
    }
  }

  CoxFit fit;
  fit.covariate_names = spec.covariate_names;
  fit.beta = beta;
  fit.stratified = spec.stratify_by_center;
  fit.log_likelihood = ev.loglik;
  fit.iterations = iterations;
  fit.score_norm = p == 0 ? 0.0 : score_norm(ev.score);
  fit.converged = !hit_singular && fit.score_norm <= 1e-6;

  // Breslow baseline jumps at the converged beta, reported on the original
  // covariate scale: h0_orig = h0_centered * exp(-beta' center).
  double shift = 0.0;
  for (std::size_t k = 0; k < p; ++k) shift += beta[k] * center[k];
  const double rescale = std::exp(-shift);
  for (const auto& st : strata) {
    LikelihoodEval scratch;
    scratch.score.assign(p, 0.0);
    scratch.info.assign(p * p, 0.0);
    std::vector<double> times, jumps;
    accumulate_stratum(st, beta, p, false, scratch, &times, &jumps);
    std::vector<double> cum(times.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      acc += jumps[k] * rescale;
      cum[k] = acc;
    }
    fit.baselines.emplace_back(0.0, std::move(times), std::move(cum));
    if (spec.stratify_by_center) {
      fit.strata.push_back(st.id);
      fit.stratum_index[st.id] = fit.baselines.size() - 1;
    }
  }
  return fit;
}

CoxLikelihood cox_partial_likelihood(const Dataset& data, const ModelSpec& spec,
                                     const std::vector<double>& beta) {
  const std::size_t p = spec.covariate_names.size();
  if (beta.size() != p) throw std::invalid_argument("beta arity mismatch");
  const std::vector<StratumData> strata = build_strata(data, spec, false);
  LikelihoodEval ev;
  ev.score.assign(p, 0.0);
  ev.info.assign(p * p, 0.0);
  for (const auto& st : strata)
    accumulate_stratum(st, beta, p, true, ev, nullptr, nullptr);
  CoxLikelihood out;
  out.loglik = ev.loglik;
  out.score = std::move(ev.score);
  out.information = std::move(ev.info);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < a; ++b)
      out.information[a * p + b] = out.information[b * p + a];
  return out;
}

double linear_predictor(const CoxFit& fit, const std::vector<double>& x) {
  if (x.size() != fit.beta.size())
    throw std::invalid_argument("covariate arity mismatch");
  double eta = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) eta += fit.beta[k] * x[k];
  return eta;
}

double cumulative_hazard(const CoxFit& fit, const std::vector<double>& x,
                         const std::optional<std::string>& stratum, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  return fit.baseline(stratum).eval(t) * std::exp(linear_predictor(fit, x));
}

double cumulative_hazard_left(const CoxFit& fit, const std::vector<double>& x,
                              const std::optional<std::string>& stratum,
                              double t) {
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  return fit.baseline(stratum).eval_left(t) * std::exp(linear_predictor(fit, x));
}

double survival(const CoxFit& fit, const std::vector<double>& x,
                const std::optional<std::string>& stratum, double t) {
  return std::exp(-cumulative_hazard(fit, x, stratum, t));
}

double survival_left(const CoxFit& fit, const std::vector<double>& x,
                     const std::optional<std::string>& stratum, double t) {
  return std::exp(-cumulative_hazard_left(fit, x, stratum, t));
}

std::string fit_report_text(const CoxFit& fit) {
  std::string out;
  out += "Proportional hazards benchmark fit\n";
  out += "==================================\n";
  out += "covariate            coef        exp(coef)\n";
  for (std::size_t k = 0; k < fit.beta.size(); ++k) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-20s %-11.6f %-11.6f\n",
                  fit.covariate_names[k].c_str(), fit.beta[k],
                  std::exp(fit.beta[k]));
    out += line;
  }
  if (fit.beta.empty()) out += "(baseline only)\n";
  out += "\nlog partial likelihood: " + fmt_g(fit.log_likelihood) + "\n";
  out += "iterations: " + std::to_string(fit.iterations) + "\n";
  out += std::string("converged: ") + (fit.converged ? "yes" : "no") + "\n";
  out += "strata: " +
         std::to_string(fit.stratified ? fit.strata.size() : 1) + "\n";
  return out;
}

std::string baseline_jumps_csv(const CoxFit& fit) {
  std::string out = "stratum,time,jump\n";
  const std::size_t nb = fit.baselines.size();
  for (std::size_t s = 0; s < nb; ++s) {
    const std::string id = fit.stratified ? fit.strata[s] : "all";
    const auto& bl = fit.baselines[s];
    for (std::size_t k = 0; k < bl.size(); ++k)
      out += id + "," + fmt_g(bl.knots()[k]) + "," + fmt_g(bl.jump(k)) + "\n";
  }
  return out;
}

}  // namespace survbench
