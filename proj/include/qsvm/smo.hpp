#pragma once

#include <cstdint>
#include <functional>

#include "qsvm/dataset.hpp"
#include "qsvm/encoding.hpp"

namespace qsvm {

// Two-variable SMO over the soft-margin dual, the full-precision baseline the
// discretized models are compared against.
struct SmoConfig {
  double tolerance = 1e-3;        // KKT violation threshold
  std::uint64_t max_passes = 0;   // 0 means the default 10 * N selection rounds
  std::uint64_t rng_seed = 0;

  // Optional trace of the dual objective, invoked after every accepted step.
  std::function<void(double dual_objective)> on_step;
};

// 1'alpha - 1/2 alpha' (y y' (.) K) alpha, evaluated exactly as defined.
double dual_objective(const SvmDataset& data, const std::vector<double>& alpha);

// Trains the linear SVM dual by sequential minimal optimization: the first
// index is the maximal KKT violator, the second maximizes |E_i - E_j| with
// Platt's random-sweep fallbacks. Returns the best iterate with `converged`
// set false if the pass budget runs out.
TrainedModel smo_train(const SvmDataset& data, double c, const SmoConfig& cfg = {});

}  // namespace qsvm
