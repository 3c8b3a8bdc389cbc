#pragma once

#include <vector>

namespace survbench {

// Exact PMF over {0..n} of a sum of independent Bernoulli(p_j), by iterative
// convolution (O(n^2)). Throws "invalid probability" if any p is outside
// [0,1].
std::vector<double> poisson_binomial_pmf(const std::vector<double>& probs);

// Two-sided exact p-value for an observed count k against a PMF:
// 2 * min(P(O <= k), P(O >= k)), capped at 1. k must lie in [0, n].
double poisson_binomial_p_value(const std::vector<double>& pmf, int k);

}  // namespace survbench
