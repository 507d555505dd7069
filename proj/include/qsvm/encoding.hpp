#pragma once

#include <cstdint>
#include <vector>

#include "qsvm/dataset.hpp"
#include "qsvm/qubo.hpp"
#include "qsvm/tabu.hpp"

namespace qsvm {

// k-bit discretization of a dual weight in [0, C]: alpha_i is represented by
// k bits with per-bit weights p_j = C * 2^(j-1) / (2^k - 1), so the all-ones
// pattern decodes to exactly C and the interval is sampled evenly.
struct PrecisionEncoding {
  int k = 1;
  double c = 1.0;
  std::vector<double> p;  // length k, strictly increasing, sums to c

  // Integer scale: alpha_i = c * v_i / levels() with v_i in {0, ..., levels()}.
  long long levels() const { return (1LL << k) - 1; }
};

PrecisionEncoding make_encoding(int k, double c);

// A built k-bit QUBO-SVM training instance. The binary vector layout
// concatenates the k bits of each point: variable index = point * k + bit.
struct QuboSvmProblem {
  PrecisionEncoding encoding;
  double lambda = 1.0;
  std::size_t n_points = 0;
  QuboInstance qubo;
};

// Recovered primal classifier together with the dual weights it came from.
struct TrainedModel {
  std::vector<double> w;      // length d
  double b = 0.0;
  std::vector<double> alpha;  // length N, in [0, C]
  std::vector<bool> support_mask;
  double lambda_used = 1.0;
  bool degenerate = false;  // alpha == 0: no classifier can be recovered
  bool converged = true;    // set false by solvers that report non-convergence
  std::uint64_t solver_evaluations = 0;  // total solver effort behind this model
};

// alpha = P z with P = I_N (x) p': per point, the bit group dotted with p.
// Computed through the integer scale so endpoints are exact.
std::vector<double> decode_alpha(const PrecisionEncoding& enc, const BinaryVector& z);

// Builds the QUBO whose energy is
//   -1' P z + z' P' (1/2 (y y' (.) K) + lambda y y') P z
// with K the linear-kernel Gram matrix; linear terms are folded onto the
// diagonal. Requires labels in {+1,-1} with both classes present.
QuboSvmProblem build_qubo(const SvmDataset& data, const PrecisionEncoding& enc, double lambda);

// Integer equality-constraint residual sum_i y_i v_i with
// v_i = sum_j 2^(j-1) z_{i,j}; zero iff alpha'y == 0 exactly.
long long constraint_residual(const SvmDataset& data, const PrecisionEncoding& enc,
                              const BinaryVector& z);

// Mean of (w'x_i - y_i) over support vectors with 0 < alpha_i < C, falling
// back to all alpha_i > 0 when the strict interior is empty (always the case
// for k = 1). Throws NoSupportVectors when alpha == 0.
double recover_bias(const SvmDataset& data, const std::vector<double>& w,
                    const std::vector<double>& alpha, double c);

// sign(w'x - b); a score of exactly zero maps to +1.
int predict(const TrainedModel& model, std::span<const double> x);

// Lambda-doubling training loop: build_qubo -> multistart_best ->
// constraint_residual, doubling lambda until the solver's best assignment has
// residual zero. A degenerate all-zero solution is reported on the model, not
// an error; exhausting max_doublings throws ConstraintUnsatisfied.
struct TrainOptions {
  double lambda0 = 1.0;
  int max_doublings = 32;
  std::uint64_t solver_runs = 20;  // multistart_best runs per lambda attempt
};

TrainedModel train(const SvmDataset& data, const PrecisionEncoding& enc, const TabuConfig& solver,
                   const TrainOptions& opts = {});

// Fraction of (x, y) rows of `data` with predict(model, x) == y.
double accuracy(const TrainedModel& model, const SvmDataset& data);

}  // namespace qsvm
