#include "rcreg/rng.hpp"

#include <cmath>
#include <limits>

namespace rcreg {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(splitmix64(seed) ^ replication) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

double StreamRng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t StreamRng::below(std::uint64_t m) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % m;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % m;
}

double StreamRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace rcreg
