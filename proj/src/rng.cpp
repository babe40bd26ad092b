#include "locasso/rng.hpp"

#include <cmath>
#include <numbers>

namespace locasso {

double Rng::gaussian() {
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

namespace {
// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  std::uint64_t s = mix(master ^ 0x6c6f636173736f31ull);
  s = mix(s ^ mix(stream + 1));
  s = mix(s ^ mix(index + 1));
  return s;
}

}  // namespace locasso
