#pragma once

#include <cstdint>
#include <random>

namespace locasso {

/// Deterministic random stream. mt19937_64 supplies the bits; the uniform
/// and gaussian transforms are implemented here instead of <random>'s
/// distributions, whose output is implementation-defined. Identical seeds
/// give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double gaussian();

 private:
  std::mt19937_64 gen_;
};

/// Child seed for stream `stream`, element `index`, derived from `master`
/// by splitmix64 mixing. Children are independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index);

}  // namespace locasso
