#include "survbench/poisson_binomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace survbench {

std::vector<double> poisson_binomial_pmf(const std::vector<double>& probs) {
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("invalid probability");

  std::vector<double> pmf(probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t count = 0;
  for (double p : probs) {
    ++count;
    for (std::size_t k = count; k > 0; --k)
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    pmf[0] *= 1.0 - p;
  }
  return pmf;
}

double poisson_binomial_p_value(const std::vector<double>& pmf, int k) {
  if (pmf.empty()) throw std::invalid_argument("empty pmf");
  if (k < 0 || static_cast<std::size_t>(k) >= pmf.size())
    throw std::invalid_argument("observed count outside {0..n}");
  double lower = 0.0, upper = 0.0;
  for (int j = 0; j <= k; ++j) lower += pmf[static_cast<std::size_t>(j)];
  for (std::size_t j = static_cast<std::size_t>(k); j < pmf.size(); ++j)
    upper += pmf[j];
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace survbench
