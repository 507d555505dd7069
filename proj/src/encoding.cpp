#include "qsvm/encoding.hpp"

#include <cmath>

#include "qsvm/errors.hpp"

namespace qsvm {

PrecisionEncoding make_encoding(int k, double c) {
  if (k < 1) throw ValidationError("encoding: k must be >= 1");
  if (k > 62) throw ValidationError("encoding: k must be <= 62");
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("encoding: C must be positive");
  PrecisionEncoding enc;
  enc.k = k;
  enc.c = c;
  enc.p.resize(k);
  const double denom = static_cast<double>(enc.levels());
  for (int j = 0; j < k; ++j) enc.p[j] = c * static_cast<double>(1LL << j) / denom;
  return enc;
}

std::vector<double> decode_alpha(const PrecisionEncoding& enc, const BinaryVector& z) {
  const std::size_t k = static_cast<std::size_t>(enc.k);
  if (z.size() % k != 0)
    throw DimensionMismatch("bit vector (multiple of k = " + std::to_string(enc.k) + ")",
                            z.size() / k * k, z.size());
  const std::size_t n = z.size() / k;
  const double denom = static_cast<double>(enc.levels());
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long v = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (z[i * k + j]) v += 1LL << j;
    alpha[i] = enc.c * static_cast<double>(v) / denom;
  }
  return alpha;
}

QuboSvmProblem build_qubo(const SvmDataset& data, const PrecisionEncoding& enc, double lambda) {
  data.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("build_qubo: lambda must be positive");
  const std::size_t n = data.n;
  const std::size_t k = static_cast<std::size_t>(enc.k);
  const std::size_t nv = n * k;
  const std::vector<double> gram = gram_matrix(data);

  // Folded upper triangle of the (N k) x (N k) coefficient matrix. For rows
  // r = (i, j) and columns c = (i', j'): the symmetric quadratic coefficient
  // is p_j p_j' A_{i i'} with A = 1/2 (y y' (.) K) + lambda y y'; the linear
  // term -p_j sits on the diagonal.
  std::vector<double> upper(nv * (nv + 1) / 2);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < nv; ++r) {
    const std::size_t i = r / k, j = r % k;
    const double pr = enc.p[j];
    for (std::size_t c = r; c < nv; ++c, ++idx) {
      const std::size_t i2 = c / k, j2 = c % k;
      const double yy = static_cast<double>(data.y[i] * data.y[i2]);
      const double a = 0.5 * yy * gram[i * n + i2] + lambda * yy;
      const double coeff = pr * enc.p[j2] * a;
      upper[idx] = (r == c) ? coeff - pr : 2.0 * coeff;
    }
  }

  QuboSvmProblem prob{enc, lambda, n, QuboInstance::from_upper(nv, std::move(upper))};
  return prob;
}

long long constraint_residual(const SvmDataset& data, const PrecisionEncoding& enc,
                              const BinaryVector& z) {
  const std::size_t k = static_cast<std::size_t>(enc.k);
  if (z.size() != data.n * k) throw DimensionMismatch("bit vector", data.n * k, z.size());
  long long residual = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    long long v = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (z[i * k + j]) v += 1LL << j;
    residual += data.y[i] * v;
  }
  return residual;
}

double recover_bias(const SvmDataset& data, const std::vector<double>& w,
                    const std::vector<double>& alpha, double c) {
  if (alpha.size() != data.n) throw DimensionMismatch("alpha", data.n, alpha.size());
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0.0 && alpha[i] < c) chosen.push_back(i);
  if (chosen.empty()) {
    // k = 1 puts every support vector at the bound; average over all of them.
    for (std::size_t i = 0; i < alpha.size(); ++i)
      if (alpha[i] > 0.0) chosen.push_back(i);
  }
  if (chosen.empty()) throw NoSupportVectors("recover_bias: alpha is all zero");
  double b = 0.0;
  for (std::size_t i : chosen) b += dot({w.data(), w.size()}, data.row(i)) - data.y[i];
  return b / static_cast<double>(chosen.size());
}

int predict(const TrainedModel& model, std::span<const double> x) {
  if (model.degenerate) throw NoSupportVectors("predict: degenerate model");
  if (x.size() != model.w.size()) throw DimensionMismatch("feature vector", model.w.size(), x.size());
  const double score = dot({model.w.data(), model.w.size()}, x) - model.b;
  return score >= 0.0 ? 1 : -1;
}

TrainedModel train(const SvmDataset& data, const PrecisionEncoding& enc, const TabuConfig& solver,
                   const TrainOptions& opts) {
  data.validate();
  if (!(opts.lambda0 > 0.0)) throw ValidationError("train: lambda0 must be positive");
  if (opts.max_doublings < 1) throw ValidationError("train: max_doublings must be >= 1");

  double lambda = opts.lambda0;
  long long residual = 0;
  std::uint64_t evaluations = 0;
  for (int attempt = 0; attempt <= opts.max_doublings; ++attempt) {
    const QuboSvmProblem prob = build_qubo(data, enc, lambda);
    const SolverReport rep = multistart_best(prob.qubo, solver, opts.solver_runs);
    evaluations += rep.evaluations;
    residual = constraint_residual(data, enc, rep.best_assignment);
    if (residual != 0) {
      lambda *= 2.0;
      continue;
    }
    TrainedModel model;
    model.alpha = decode_alpha(enc, rep.best_assignment);
    model.lambda_used = lambda;
    model.solver_evaluations = evaluations;
    model.support_mask.resize(data.n);
    bool any = false;
    for (std::size_t i = 0; i < data.n; ++i) {
      model.support_mask[i] = model.alpha[i] > 0.0;
      any = any || model.support_mask[i];
    }
    model.degenerate = !any;
    model.w.assign(data.dim, 0.0);
    if (!model.degenerate) {
      for (std::size_t i = 0; i < data.n; ++i) {
        if (model.alpha[i] == 0.0) continue;
        const double coef = model.alpha[i] * data.y[i];
        const auto row = data.row(i);
        for (std::size_t f = 0; f < data.dim; ++f) model.w[f] += coef * row[f];
      }
      model.b = recover_bias(data, model.w, model.alpha, enc.c);
    }
    return model;
  }
  throw ConstraintUnsatisfied(residual, opts.max_doublings);
}

double accuracy(const TrainedModel& model, const SvmDataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i)
    if (predict(model, data.row(i)) == data.y[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

}  // namespace qsvm
