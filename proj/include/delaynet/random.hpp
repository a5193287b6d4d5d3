#pragma once

#include <cstdint>
#include <random>

namespace delaynet {

/// Per-stream seeds derived from one master seed with the SplitMix64
/// finalizer: stream k gets mix(master + (k + 1) * golden_gamma). Every
/// trial can therefore be replayed on its own.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with a portable uniform mapping (top 53 bits), so draws do
/// not depend on the standard library's distribution implementation.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace delaynet
