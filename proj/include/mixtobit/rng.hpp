#ifndef MIXTOBIT_RNG_HPP_
#define MIXTOBIT_RNG_HPP_

#include <cstdint>
#include <random>

namespace mixtobit {

// Explicit random stream passed to every sampler. No global state.
// Same seed yields a bit-identical sequence of draws; every transform in
// this library is built on uniform() so the guarantee does not depend on
// implementation-defined std:: distribution algorithms.
//
// A stream must not be shared between concurrent callers; each chain or
// replicate owns its own.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1).
  double uniform() {
    const std::uint64_t bits = gen_() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via inverse CDF; consumes exactly one uniform.
  double normal();

  // Gamma(shape, scale 1) via Marsaglia-Tsang.
  double gamma(double shape);

  // Independent stream derived deterministically from this stream's seed
  // and an index. Used to give replicates/chains their own streams.
  RngStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used for seed derivation and data digests.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace mixtobit

#endif  // MIXTOBIT_RNG_HPP_
