#include "survbench/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "survbench/estimators.hpp"
#include "survbench/normal.hpp"
#include "survbench/rng.hpp"
#include "survbench/textio.hpp"

namespace survbench {

namespace {

// The Pearson scale sqrt(mu(1-mu)) must stay away from 0 or a handful of
// boundary subjects dominate the resampled residual pool. A floor of 0.025
// bounds |r| by ~6.3.
double pearson_clamp(double mu) {
  return std::min(0.975, std::max(0.025, mu));
}

// Product over a prefix range, tracked as (count of exactly-zero factors,
// sum of logs of the positive ones) so that ranges crossing a zero stay exact.
struct LogProductPrefix {
  std::vector<std::size_t> zeros;  // zeros[k]: zero factors among first k
  std::vector<double> logs;        // logs[k]: log-sum among first k

  explicit LogProductPrefix(const std::vector<double>& factors) {
    zeros.resize(factors.size() + 1, 0);
    logs.resize(factors.size() + 1, 0.0);
    for (std::size_t k = 0; k < factors.size(); ++k) {
      zeros[k + 1] = zeros[k] + (factors[k] <= 0.0 ? 1 : 0);
      logs[k + 1] = logs[k] + (factors[k] > 0.0 ? std::log(factors[k]) : 0.0);
    }
  }

  // product of factors[from..to)
  double range(std::size_t from, std::size_t to) const {
    if (zeros[to] - zeros[from] > 0) return 0.0;
    return std::exp(logs[to] - logs[from]);
  }
};

}  // namespace

std::vector<double> pseudo_observations(const std::vector<SubjectRecord>& records,
                                        double tau) {
  const std::size_t n = records.size();
  if (n < 2)
    throw std::invalid_argument("pseudo-observations require at least 2 subjects");

  // Distinct event times with event counts and risk-set sizes.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].time < records[b].time;
  });
  std::vector<double> entries(n);
  for (std::size_t i = 0; i < n; ++i) entries[i] = records[i].entry_time;
  std::sort(entries.begin(), entries.end());

  std::vector<double> event_time;
  std::vector<std::size_t> d_k, n_k;
  {
    std::size_t i = 0, entered = 0, left = 0;
    while (i < n) {
      const double t = records[order[i]].time;
      std::size_t d = 0, tied = 0;
      while (i + tied < n && records[order[i + tied]].time == t) {
        if (records[order[i + tied]].status == 1) ++d;
        ++tied;
      }
      if (d > 0) {
        while (entered < n && entries[entered] < t) ++entered;
        const std::size_t at_risk = entered - left;
        if (at_risk == 0) throw std::invalid_argument("empty risk set");
        event_time.push_back(t);
        d_k.push_back(d);
        n_k.push_back(at_risk);
      }
      i += tied;
      left += tied;
    }
  }

  const std::size_t k_tau = static_cast<std::size_t>(
      std::upper_bound(event_time.begin(), event_time.end(), tau) -
      event_time.begin());

  // Factor arrays: full-sample factors and their at-risk leave-one-out
  // counterparts (risk set shrunk by one, events unchanged).
  std::vector<double> full(event_time.size()), loo(event_time.size());
  for (std::size_t k = 0; k < event_time.size(); ++k) {
    full[k] = 1.0 - static_cast<double>(d_k[k]) / static_cast<double>(n_k[k]);
    loo[k] = n_k[k] >= 2 ? 1.0 - static_cast<double>(d_k[k]) /
                                     static_cast<double>(n_k[k] - 1)
                         : 1.0;  // never used: a non-event subject at risk
                                 // implies n_k >= 2
  }
  LogProductPrefix full_prefix(full), loo_prefix(loo);

  const double surv_full = full_prefix.range(0, k_tau);
  const double f_full = 1.0 - surv_full;

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = records[i].entry_time;
    const double t = records[i].time;
    // event times in (e, .) use leave-one-out factors
    const std::size_t a = static_cast<std::size_t>(
        std::upper_bound(event_time.begin(), event_time.end(), e) -
        event_time.begin());
    double surv;
    if (t > tau) {
      surv = full_prefix.range(0, std::min(a, k_tau)) *
             (a < k_tau ? loo_prefix.range(a, k_tau) : 1.0);
    } else {
      const std::size_t b = static_cast<std::size_t>(
          std::lower_bound(event_time.begin(), event_time.end(), t) -
          event_time.begin());  // event times < t
      surv = full_prefix.range(0, std::min(a, b));
      if (a < b) surv *= loo_prefix.range(a, b);
      std::size_t resume = b;
      if (b < event_time.size() && event_time[b] == t) {
        // tied with an event time: adjust that factor for this subject
        const std::size_t dm = d_k[b], nm = n_k[b];
        double factor;
        if (records[i].status == 1) {
          factor = nm >= 2 ? 1.0 - static_cast<double>(dm - 1) /
                                       static_cast<double>(nm - 1)
                           : 1.0;  // lone subject: the event time vanishes
        } else {
          factor = 1.0 - static_cast<double>(dm) / static_cast<double>(nm - 1);
        }
        surv *= factor;
        resume = b + 1;
      }
      if (resume < k_tau) surv *= full_prefix.range(resume, k_tau);
    }
    const double f_loo = 1.0 - surv;
    out[i] = static_cast<double>(n) * f_full -
             static_cast<double>(n - 1) * f_loo;
  }
  return out;
}

namespace {

double cloglog_mean(double eta) {
  const double e = std::min(30.0, std::max(-30.0, eta));
  return 1.0 - std::exp(-std::exp(e));
}

double cloglog_slope(double eta) {
  const double e = std::min(30.0, std::max(-30.0, eta));
  return std::exp(e - std::exp(e));
}

// Solves the p x p normal equations in place; throws on a singular design.
std::vector<double> spd_solve(std::vector<double> a, std::vector<double> b,
                              std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (!(diag > 1e-10)) throw std::runtime_error("singular design");
    a[j * p + j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / a[j * p + j];
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * p + k] * b[k];
    b[i] /= a[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < p; ++k) b[ii] -= a[k * p + ii] * b[k];
    b[ii] /= a[ii * p + ii];
  }
  return b;
}

}  // namespace

PseudoFit fit_pseudo_model(const std::vector<double>& pseudo_values,
                           const std::vector<std::vector<double>>& design_rows) {
  const std::size_t n = pseudo_values.size();
  if (design_rows.size() != n)
    throw std::invalid_argument("design rows must align with pseudo-values");
  if (n == 0) throw std::invalid_argument("empty design");
  const std::size_t p = design_rows[0].size();
  if (p == 0) throw std::invalid_argument("design needs at least an intercept");
  for (const auto& row : design_rows)
    if (row.size() != p) throw std::invalid_argument("ragged design matrix");

  // Independence estimating equations with a complementary-log-log mean,
  // mu = 1 - exp(-exp(X beta)), solved by Gauss-Newton. The curved link keeps
  // fitted death probabilities inside (0,1), which the Pearson scaling of the
  // bootstrap depends on.
  double ybar = 0.0;
  for (double y : pseudo_values) ybar += y;
  ybar /= static_cast<double>(n);
  ybar = std::min(1.0 - 1e-6, std::max(1e-6, ybar));

  std::vector<double> beta(p, 0.0);
  beta[0] = std::log(-std::log(1.0 - ybar));

  std::vector<double> eta(n), mu(n);
  auto refresh = [&]() {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (std::size_t a = 0; a < p; ++a) e += design_rows[i][a] * beta[a];
      eta[i] = e;
      mu[i] = cloglog_mean(e);
      sse += (pseudo_values[i] - mu[i]) * (pseudo_values[i] - mu[i]);
    }
    return sse;
  };

  double sse = refresh();
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> dtd(p * p, 0.0), dtr(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = cloglog_slope(eta[i]);
      const double resid = pseudo_values[i] - mu[i];
      for (std::size_t a = 0; a < p; ++a) {
        const double da = w * design_rows[i][a];
        dtr[a] += da * resid;
        for (std::size_t b = a; b < p; ++b)
          dtd[a * p + b] += da * w * design_rows[i][b];
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b) dtd[a * p + b] = dtd[b * p + a];
    // On the first pass the weights are a positive constant, so a singular
    // system means a rank-deficient design. Later on it means the fit ran
    // into the boundary and the weights collapsed; stop there.
    std::vector<double> delta;
    try {
      delta = spd_solve(std::move(dtd), dtr, p);
    } catch (const std::runtime_error&) {
      if (iter == 0) throw;
      break;
    }

    double step = 1.0;
    const std::vector<double> beta_old = beta;
    const double sse_old = sse;
    double max_move = 0.0;
    for (int h = 0; h < 25; ++h) {
      max_move = 0.0;
      for (std::size_t a = 0; a < p; ++a) {
        beta[a] = beta_old[a] + step * delta[a];
        max_move = std::max(max_move, std::fabs(step * delta[a]));
      }
      sse = refresh();
      if (sse <= sse_old + 1e-12) break;
      step *= 0.5;
    }
    if (max_move < 1e-10) break;
  }

  PseudoFit fit;
  fit.coefficients = beta;
  fit.fitted.resize(n);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = mu[i];
    if (m < -0.2 || m > 1.2) {
      ++fit.n_band_clamped;
      m = std::min(1.2, std::max(-0.2, m));
    }
    fit.fitted[i] = m;
    const double mu_c = pearson_clamp(m);
    fit.residuals[i] =
        (pseudo_values[i] - mu_c) / std::sqrt(mu_c * (1.0 - mu_c));
  }
  return fit;
}

BootstrapIntervals bootstrap_prediction_intervals(const PseudoFit& fit,
                                                  const Dataset& data,
                                                  int replicates, double alpha,
                                                  std::uint64_t seed,
                                                  double tau) {
  const std::size_t n = data.records.size();
  if (fit.fitted.size() != n || fit.residuals.size() != n)
    throw std::invalid_argument("fit does not match dataset");
  if (replicates < 100)
    throw std::invalid_argument("at least 100 bootstrap replicates required");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");

  BootstrapIntervals out;

  // Per-subject reconstruction scale and per-center slots. The resampled
  // residual pool is centered, the usual residual-bootstrap convention.
  std::vector<double> mu_c(n), scale(n);
  double r_mean = 0.0;
  for (double r : fit.residuals) r_mean += r;
  r_mean /= static_cast<double>(n);
  std::vector<double> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = fit.residuals[i] - r_mean;
  for (std::size_t i = 0; i < n; ++i) {
    mu_c[i] = pearson_clamp(fit.fitted[i]);
    scale[i] = std::sqrt(mu_c[i] * (1.0 - mu_c[i]));
  }
  std::vector<std::size_t> slot_of(n);
  std::vector<std::string> slot_center;
  std::vector<std::size_t> slot_size;
  for (const auto& [center, indices] : data.center_index) {
    for (std::size_t i : indices) slot_of[i] = slot_center.size();
    slot_center.push_back(center);
    slot_size.push_back(indices.size());
  }
  const std::size_t n_slots = slot_center.size();

  const std::size_t b_count = static_cast<std::size_t>(replicates);
  std::vector<double> draws(n_slots * b_count, 0.0);
  for (std::size_t b = 0; b < b_count; ++b) {
    Rng rng(derive_seed(seed, b));
    for (std::size_t i = 0; i < n; ++i) {
      const double r_star = pool[rng.uniform_int(n)];
      draws[slot_of[i] * b_count + b] += mu_c[i] + r_star * scale[i];
    }
  }

  const std::size_t rank =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::floor(alpha / 2.0 * replicates)));

  for (const auto& [center, indices] : data.center_index) {
    // A center whose follow-up dies out before tau still gets classified
    // (its KM holds its last value), but is flagged for the caller.
    bool at_risk = false;
    for (std::size_t i : indices) {
      const auto& r = data.records[i];
      if (r.entry_time < tau && r.time >= tau) {
        at_risk = true;
        break;
      }
    }
    if (!at_risk) out.flagged_centers.push_back(center);

    PredictionInterval pi;
    pi.center_id = center;
    pi.observed = 1.0 - kaplan_meier(data, indices).eval(tau);

    const std::size_t slot = slot_of[indices[0]];
    std::vector<double> means(b_count);
    for (std::size_t b = 0; b < b_count; ++b)
      means[b] = draws[slot * b_count + b] / static_cast<double>(slot_size[slot]);
    std::sort(means.begin(), means.end());
    pi.lower = means[rank - 1];
    pi.upper = means[b_count - rank];
    if (pi.observed < pi.lower)
      pi.classification = Classification::over;
    else if (pi.observed > pi.upper)
      pi.classification = Classification::under;
    else
      pi.classification = Classification::target;
    pi.z_pseudo = pi.upper > pi.lower
                      ? pseudo_z(pi, alpha)
                      : std::numeric_limits<double>::quiet_NaN();
    out.intervals.push_back(std::move(pi));
  }
  return out;
}

double pseudo_z(const PredictionInterval& interval, double alpha) {
  if (!(interval.upper > interval.lower))
    throw std::invalid_argument("zero-width prediction interval");
  const double mid = 0.5 * (interval.lower + interval.upper);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double s = (interval.upper - interval.lower) / (2.0 * z);
  return (interval.observed - mid) / s;
}

PseudoComparison run_pseudo_comparator(const Dataset& data, double tau,
                                       int replicates, double alpha,
                                       std::uint64_t seed) {
  PseudoComparison out;
  const std::vector<double> pseudo = pseudo_observations(data.records, tau);
  std::vector<std::vector<double>> design(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    auto& row = design[i];
    row.reserve(1 + data.covariate_arity());
    row.push_back(1.0);
    for (double v : data.records[i].covariates) {
      if (is_missing(v))
        throw std::invalid_argument("missing covariate; apply imputation first");
      row.push_back(v);
    }
  }
  out.fit = fit_pseudo_model(pseudo, design);
  out.result = bootstrap_prediction_intervals(out.fit, data, replicates, alpha,
                                              seed, tau);
  return out;
}

std::string prediction_intervals_csv(
    const std::vector<PredictionInterval>& intervals) {
  std::string out = "center_id,observed,lower,upper,z_pseudo,classification\n";
  for (const auto& pi : intervals) {
    out += pi.center_id + "," + fmt_g(pi.observed) + "," + fmt_g(pi.lower) +
           "," + fmt_g(pi.upper) + ",";
    out += std::isnan(pi.z_pseudo) ? "" : fmt_g(pi.z_pseudo);
    out += "," + to_string(pi.classification) + "\n";
  }
  return out;
}

}  // namespace survbench
