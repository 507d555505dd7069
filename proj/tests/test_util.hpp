#pragma once

// Shared helpers for the test suites: deterministic generators for random
// QUBO instances and small labeled datasets.

#include <vector>

#include "qsvm/dataset.hpp"
#include "qsvm/qubo.hpp"
#include "qsvm/rng.hpp"

namespace qsvm::testutil {

// Dense symmetric matrix with entries uniform in [-scale, scale].
inline std::vector<double> random_symmetric(std::uint64_t seed, std::size_t n,
                                            double scale = 1.0) {
  SplitMix64 rng(seed);
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = (2.0 * rng.next_double() - 1.0) * scale;
      dense[i * n + j] = v;
      dense[j * n + i] = v;
    }
  }
  return dense;
}

inline QuboInstance random_qubo(std::uint64_t seed, std::size_t n, double scale = 1.0) {
  return QuboInstance::from_dense(n, random_symmetric(seed, n, scale));
}

inline BinaryVector random_bits(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  BinaryVector z(n);
  for (auto& b : z) b = rng.next_bit() ? 1 : 0;
  return z;
}

// Random dataset with both classes guaranteed, features uniform in [-1, 1].
inline SvmDataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim) {
  SplitMix64 rng(seed);
  SvmDataset data;
  data.name = "random-" + std::to_string(seed);
  data.n = n;
  data.dim = dim;
  data.x.resize(n * dim);
  for (auto& v : data.x) v = 2.0 * rng.next_double() - 1.0;
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.y[i] = rng.next_bit() ? 1 : -1;
  data.y[0] = 1;  // force both classes
  data.y[1] = -1;
  return data;
}

// Linearly separable toy set, two points per class mirrored through the
// origin. Scaled so the 1-bit encoding at C = 1 has negative-energy balanced
// supports (cross-class distances below 2), keeping training non-degenerate.
inline SvmDataset toy_separable() {
  SvmDataset data;
  data.name = "toy";
  data.n = 4;
  data.dim = 2;
  data.x = {0.6, 0.6, 0.5, 0.7, -0.6, -0.6, -0.5, -0.7};
  data.y = {1, 1, -1, -1};
  return data;
}

// Separable set with 5 points per class, enough for 5-fold stratified CV.
inline SvmDataset toy_separable_10() {
  SvmDataset data;
  data.name = "toy10";
  data.n = 10;
  data.dim = 2;
  data.x.clear();
  data.y.clear();
  for (int i = 0; i < 5; ++i) {
    data.x.push_back(0.5 + 0.05 * i);
    data.x.push_back(0.5 - 0.025 * i);
    data.y.push_back(1);
  }
  for (int i = 0; i < 5; ++i) {
    data.x.push_back(-0.5 - 0.05 * i);
    data.x.push_back(-0.5 + 0.025 * i);
    data.y.push_back(-1);
  }
  return data;
}

}  // namespace qsvm::testutil
