#include "mixtobit/rng.hpp"

#include <cmath>

#include "mixtobit/distributions.hpp"
#include "mixtobit/errors.hpp"

namespace mixtobit {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double RngStream::normal() { return normal_quantile(uniform()); }

double RngStream::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw ValidationError("gamma draw: shape must be a positive finite real");
  }
  if (shape < 1.0) {
    // boost: G_a = G_{a+1} * U^{1/a}
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(mix_seed(seed_ ^ mix_seed(index + 1)));
}

}  // namespace mixtobit
