#pragma once

namespace survbench {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, accurate to better than 1e-12 absolute.
// Throws std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace survbench
