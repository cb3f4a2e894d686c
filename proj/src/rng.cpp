#include "tnl/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace tnl {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t parent, uint64_t salt) {
  return splitmix64(parent ^ splitmix64(salt + 0x632be59bd9b4e019ULL));
}

double uniform_at(uint64_t stream, uint64_t counter) {
  const uint64_t bits = splitmix64(stream ^ splitmix64(counter));
  // 53-bit mantissa shifted into (0,1); +1 keeps log() finite
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

GaussPair gauss_at(uint64_t stream, uint64_t counter) {
  const double u1 = uniform_at(stream, 2 * counter);
  const double u2 = uniform_at(stream, 2 * counter + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

double mask_low_bits(double x, int bits) {
  uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  u &= ~((uint64_t(1) << bits) - 1);
  std::memcpy(&x, &u, sizeof x);
  return x;
}

}  // namespace tnl
