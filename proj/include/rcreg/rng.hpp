#pragma once

#include <cstdint>
#include <random>

namespace rcreg {

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator per (seed, replication, stream) triple, so results do
/// not depend on which thread runs a replication or in what order.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  /// Uniform integer on {0, ..., m-1}, unbiased.
  std::uint64_t below(std::uint64_t m);
  /// Standard normal, Marsaglia polar method.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rcreg
