#pragma once

#include <cstdint>

namespace qsvm {

// splitmix64: the usual 64-bit finalizer-based generator. Used everywhere a
// deterministic, platform-independent stream is required (std:: distributions
// are implementation-defined and would break byte-identical reproducibility).
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

  bool next_bit() { return (next() >> 63) != 0; }
};

// Decorrelates seeds for independent runs/restarts/cells: hashes the pair
// (seed, index) through the splitmix64 finalizer twice.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
  g.next();
  return g.next();
}

}  // namespace qsvm
