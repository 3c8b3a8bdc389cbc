#pragma once

#include <cstdint>
#include <random>

namespace survbench {

// splitmix64 mix; used to derive independent substream seeds from a master
// seed so that parallel replicates reproduce bit-identically in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Deterministic random source. All samplers are implemented here (inverse-CDF
// normal, Marsaglia-Tsang gamma, chunked Knuth Poisson) instead of the
// implementation-defined <random> distributions, so that a fixed seed pins
// the byte-exact output of every command.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform01();

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

  double normal();
  double normal(double mean, double sd);

  // Bivariate normal with the given means, sds and correlation.
  void binormal(double mean1, double sd1, double mean2, double sd2,
                double corr, double& out1, double& out2);

  // Gamma with given shape and scale (mean = shape * scale).
  double gamma(double shape, double scale);

  int poisson(double lambda);

  // Mean/sd parameterization via the Poisson-Gamma mixture; falls back to
  // plain Poisson when sd^2 <= mean.
  int negative_binomial(double mean, double sd);

  // Event time with cumulative hazard H(t) = (rate * t)^shape, scaled by a
  // multiplicative hazard factor: H_total(t) = H(t) * hazard_scale.
  double weibull_time(double shape, double rate, double hazard_scale = 1.0);

 private:
  std::mt19937_64 gen_;
};

}  // namespace survbench
