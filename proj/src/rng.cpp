#include "survbench/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "survbench/normal.hpp"

namespace survbench {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0xa0761d6478bd642fULL * (index + 1));
  std::uint64_t s = splitmix64(state);
  return splitmix64(state) ^ s;
}

Rng::Rng(std::uint64_t seed) {
  // Expand the single word through splitmix64, the recommended seeding for
  // mt19937_64.
  std::uint64_t state = seed;
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state))};
  gen_.seed(seq);
}

double Rng::uniform01() {
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
  // Rejection sampling on the top bits keeps the draw unbiased.
  const std::uint64_t limit = n * (~0ULL / n);
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() { return normal_quantile(uniform01()); }

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

void Rng::binormal(double mean1, double sd1, double mean2, double sd2,
                   double corr, double& out1, double& out2) {
  const double z1 = normal();
  const double z2 = normal();
  out1 = mean1 + sd1 * z1;
  out2 = mean2 + sd2 * (corr * z1 + std::sqrt(1.0 - corr * corr) * z2);
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("gamma: shape and scale must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang).
    const double u = uniform01();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

int Rng::poisson(double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("poisson: lambda must be >= 0");
  // Knuth's product method, chunked so exp(-chunk) never underflows.
  int total = 0;
  while (lambda > 0.0) {
    const double chunk = lambda > 500.0 ? 500.0 : lambda;
    lambda -= chunk;
    const double threshold = std::exp(-chunk);
    double prod = uniform01();
    int k = 0;
    while (prod > threshold) {
      ++k;
      prod *= uniform01();
    }
    total += k;
  }
  return total;
}

int Rng::negative_binomial(double mean, double sd) {
  if (!(mean > 0.0)) throw std::invalid_argument("negative_binomial: mean must be > 0");
  const double var = sd * sd;
  if (var <= mean) return poisson(mean);
  const double r = mean * mean / (var - mean);
  const double lambda = gamma(r, mean / r);
  return poisson(lambda);
}

double Rng::weibull_time(double shape, double rate, double hazard_scale) {
  if (!(shape > 0.0) || !(rate > 0.0) || !(hazard_scale > 0.0))
    throw std::invalid_argument("weibull_time: parameters must be positive");
  // Inverse CDF under H(t) = (rate*t)^shape * hazard_scale.
  const double u = uniform01();
  return std::pow(-std::log(u) / hazard_scale, 1.0 / shape) / rate;
}

}  // namespace survbench
