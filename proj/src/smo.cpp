#include "qsvm/smo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsvm/errors.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

double dual_objective(const SvmDataset& data, const std::vector<double>& alpha) {
  if (alpha.size() != data.n) throw DimensionMismatch("alpha", data.n, alpha.size());
  double linear = 0.0;
  for (double a : alpha) linear += a;
  double quad = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < data.n; ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * data.y[i] * data.y[j] * dot(data.row(i), data.row(j));
    }
  }
  return linear - 0.5 * quad;
}

namespace {

struct SmoState {
  const SvmDataset& data;
  double c;
  std::vector<double> gram;
  std::vector<double> alpha;
  std::vector<double> f;  // f_i = sum_j alpha_j y_j K_ij (threshold not included)
  double b = 0.0;         // threshold, score(x) = w'x - b

  SmoState(const SvmDataset& d, double cc) : data(d), c(cc), gram(gram_matrix(d)) {
    alpha.assign(d.n, 0.0);
    f.assign(d.n, 0.0);
  }

  double k(std::size_t i, std::size_t j) const { return gram[i * data.n + j]; }
  double error(std::size_t i) const { return f[i] - b - data.y[i]; }

  // Analytic solution of the two-variable subproblem (Platt). Returns false
  // when no progress is possible for this pair.
  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha[i1], a2 = alpha[i2];
    const double y1 = data.y[i1], y2 = data.y[i2];
    const double e1 = error(i1), e2 = error(i2);
    const double s = y1 * y2;
    double lo, hi;
    if (s > 0) {
      lo = std::max(0.0, a1 + a2 - c);
      hi = std::min(c, a1 + a2);
    } else {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c, c + a2 - a1);
    }
    if (lo >= hi) return false;
    const double eta = k(i1, i1) + k(i2, i2) - 2.0 * k(i1, i2);
    double a2_new;
    if (eta > 0) {
      a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Flat or concave direction: pick the better endpoint.
      const double gain_lo = objective_at(i1, i2, lo);
      const double gain_hi = objective_at(i1, i2, hi);
      if (gain_lo == gain_hi) return false;
      a2_new = gain_lo > gain_hi ? lo : hi;
    }
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    double a1_new = a1 + s * (a2 - a2_new);
    // keep the box exact: rounding in the constraint-line step can push an
    // endpoint a few ulp outside [0, C]
    if (a1_new < 1e-12 * c) a1_new = 0.0;
    if (a1_new > c * (1.0 - 1e-12)) a1_new = c;

    // Threshold update: keep KKT consistent for the updated pair.
    const double b1 =
        b + e1 + y1 * (a1_new - a1) * k(i1, i1) + y2 * (a2_new - a2) * k(i1, i2);
    const double b2 =
        b + e2 + y1 * (a1_new - a1) * k(i1, i2) + y2 * (a2_new - a2) * k(i2, i2);
    if (a1_new > 0 && a1_new < c) b = b1;
    else if (a2_new > 0 && a2_new < c) b = b2;
    else b = 0.5 * (b1 + b2);

    for (std::size_t j = 0; j < data.n; ++j)
      f[j] += y1 * (a1_new - a1) * k(i1, j) + y2 * (a2_new - a2) * k(i2, j);
    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
    return true;
  }

  // Dual objective restricted to moving alpha_{i2} to value v (and alpha_{i1}
  // along the constraint line); used only for the eta <= 0 endpoint test.
  double objective_at(std::size_t i1, std::size_t i2, double v) const {
    const double y1 = data.y[i1], y2 = data.y[i2];
    const double s = y1 * y2;
    const double a1v = alpha[i1] + s * (alpha[i2] - v);
    const double e1 = error(i1), e2 = error(i2);
    // Platt's L_obj/H_obj form, constant terms dropped.
    const double f1 = y1 * (e1 + b) - alpha[i1] * k(i1, i1) - s * alpha[i2] * k(i1, i2);
    const double f2 = y2 * (e2 + b) - alpha[i2] * k(i2, i2) - s * alpha[i1] * k(i1, i2);
    return -(a1v * f1 + v * f2 + 0.5 * a1v * a1v * k(i1, i1) + 0.5 * v * v * k(i2, i2) +
             s * a1v * v * k(i1, i2));
  }

  // KKT violation of point i given the current threshold.
  double violation(std::size_t i) const {
    const double r = data.y[i] * error(i);  // y_i (u_i - y_i) = y_i u_i - 1
    if (r < 0 && alpha[i] < c) return -r;
    if (r > 0 && alpha[i] > 0) return r;
    return 0.0;
  }
};

}  // namespace

TrainedModel smo_train(const SvmDataset& data, double c, const SmoConfig& cfg) {
  data.validate();
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("smo_train: C must be positive");
  if (!(cfg.tolerance > 0.0)) throw ValidationError("smo_train: tolerance must be positive");

  SmoState st(data, c);
  SplitMix64 rng(mix_seed(cfg.rng_seed, 0x5f0e));
  const std::uint64_t max_passes = cfg.max_passes > 0 ? cfg.max_passes : 10ULL * data.n;

  bool converged = false;
  std::uint64_t steps = 0;
  for (std::uint64_t pass = 0; pass < max_passes; ++pass) {
    std::size_t i1 = data.n;
    double worst = cfg.tolerance;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double v = st.violation(i);
      if (v > worst) {
        worst = v;
        i1 = i;
      }
    }
    if (i1 == data.n) {
      converged = true;
      break;
    }

    bool stepped = false;
    // Second-choice heuristic: maximize |E1 - E2| over non-bound points.
    const double e1 = st.error(i1);
    std::size_t i2 = data.n;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      if (i == i1 || st.alpha[i] <= 0.0 || st.alpha[i] >= c) continue;
      const double gap = std::abs(e1 - st.error(i));
      if (gap > best_gap) {
        best_gap = gap;
        i2 = i;
      }
    }
    if (i2 < data.n) stepped = st.take_step(i1, i2);

    if (!stepped) {
      // Platt fallback: sweep non-bound points from a random start, then all.
      const std::size_t offset = static_cast<std::size_t>(rng.next_below(data.n));
      for (std::size_t t = 0; t < data.n && !stepped; ++t) {
        const std::size_t i = (offset + t) % data.n;
        if (i == i1 || st.alpha[i] <= 0.0 || st.alpha[i] >= c) continue;
        stepped = st.take_step(i1, i);
      }
      for (std::size_t t = 0; t < data.n && !stepped; ++t) {
        const std::size_t i = (offset + t) % data.n;
        if (i == i1) continue;
        stepped = st.take_step(i1, i);
      }
    }
    if (!stepped) break;  // numerically stuck on the worst violator
    ++steps;
    if (cfg.on_step) cfg.on_step(dual_objective(data, st.alpha));
  }

  TrainedModel model;
  model.alpha = st.alpha;
  model.converged = converged;
  model.solver_evaluations = steps;
  model.support_mask.resize(data.n);
  bool any = false;
  for (std::size_t i = 0; i < data.n; ++i) {
    model.support_mask[i] = st.alpha[i] > 0.0;
    any = any || model.support_mask[i];
  }
  model.degenerate = !any;
  model.w.assign(data.dim, 0.0);
  if (!model.degenerate) {
    for (std::size_t i = 0; i < data.n; ++i) {
      if (st.alpha[i] == 0.0) continue;
      const double coef = st.alpha[i] * data.y[i];
      const auto row = data.row(i);
      for (std::size_t f = 0; f < data.dim; ++f) model.w[f] += coef * row[f];
    }
    model.b = recover_bias(data, model.w, model.alpha, c);
  }
  return model;
}

}  // namespace qsvm
