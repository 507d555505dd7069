#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "qsvm/dataset.hpp"
#include "qsvm/encoding.hpp"
#include "qsvm/errors.hpp"
#include "qsvm/smo.hpp"
#include "test_util.hpp"

using namespace qsvm;

namespace {

const std::string kDataDir = resolve_data_dir("");

// KKT witness check: some threshold b' must satisfy every box-side condition
// within the tolerance. Returns true when the feasible b' interval is nonempty.
bool kkt_holds(const SvmDataset& data, const std::vector<double>& alpha, double c, double tol) {
  std::vector<double> f(data.n, 0.0);
  for (std::size_t i = 0; i < data.n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < data.n; ++j)
      s += alpha[j] * data.y[j] * dot(data.row(i), data.row(j));
    f[i] = s;
  }
  double lo = -1e300, hi = 1e300;
  for (std::size_t i = 0; i < data.n; ++i) {
    if (alpha[i] < c) {
      // y_i (f_i - b) >= 1 - tol
      if (data.y[i] > 0) hi = std::min(hi, f[i] - 1.0 + tol);
      else lo = std::max(lo, f[i] + 1.0 - tol);
    }
    if (alpha[i] > 0) {
      // y_i (f_i - b) <= 1 + tol
      if (data.y[i] > 0) lo = std::max(lo, f[i] - 1.0 - tol);
      else hi = std::min(hi, f[i] + 1.0 + tol);
    }
  }
  return lo <= hi + 1e-12;
}

}  // namespace

TEST_CASE("dual_objective: documented values") {
  const auto data = testutil::random_dataset(9, 5, 3);
  CHECK(dual_objective(data, std::vector<double>(5, 0.0)) == 0.0);

  std::vector<double> e1(5, 0.0);
  e1[0] = 1.0;
  const double norm0 = dot(data.row(0), data.row(0));
  CHECK(dual_objective(data, e1) == doctest::Approx(1.0 - 0.5 * norm0));

  CHECK_THROWS_AS(dual_objective(data, std::vector<double>(4, 0.0)), DimensionMismatch);
}

TEST_CASE("smo_train: two-point analytic solution") {
  SvmDataset data;
  data.name = "pair";
  data.n = 2;
  data.dim = 1;
  data.x = {1.0, -1.0};
  data.y = {1, -1};
  const auto model = smo_train(data, 10.0, {});
  REQUIRE(model.converged);
  CHECK(model.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(model.alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(model.w[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(model.b == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("smo_train: separable data reaches full training accuracy") {
  const auto data = testutil::toy_separable_10();
  const auto model = smo_train(data, 4.0, {});
  REQUIRE(!model.degenerate);
  CHECK(accuracy(model, data) == doctest::Approx(1.0));
}

TEST_CASE("smo_train: feasibility and KKT on iris") {
  const auto data = load_dataset("iris", kDataDir);
  for (double c : {0.25, 1.0, 4.0}) {
    SmoConfig cfg;
    cfg.max_passes = 100000;
    const auto model = smo_train(data, c, cfg);
    double a_dot_y = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
      CHECK(model.alpha[i] >= 0.0);
      CHECK(model.alpha[i] <= c);
      a_dot_y += model.alpha[i] * data.y[i];
    }
    CHECK(std::abs(a_dot_y) <= 1e-8 * c);
    CHECK(model.converged);
    CHECK(kkt_holds(data, model.alpha, c, cfg.tolerance * 1.01));
  }
}

TEST_CASE("smo_train: objective trace is monotone non-decreasing") {
  const auto data = testutil::random_dataset(31, 20, 3);
  SmoConfig cfg;
  std::vector<double> trace;
  cfg.on_step = [&](double obj) { trace.push_back(obj); };
  smo_train(data, 2.0, cfg);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] >= trace[i - 1] - 1e-9 * std::max(1.0, std::abs(trace[i - 1])));
}

TEST_CASE("smo_train: agrees with the dense QP reference on iris folds") {
  const auto data = load_dataset("iris", kDataDir);
  const auto plan = make_folds(data, 5, 7);
  const auto train_set = subset(data, plan.train_indices(0));
  for (double c : {0.5, 2.0}) {
    SmoConfig cfg;
    cfg.max_passes = 100000;
    const auto model = smo_train(train_set, c, cfg);
    const auto ref_alpha = oracle::dense_qp_reference(train_set, c);
    const double obj_smo = dual_objective(train_set, model.alpha);
    const double obj_ref = dual_objective(train_set, ref_alpha);
    CHECK(obj_smo == doctest::Approx(obj_ref).epsilon(1e-3));
  }
}

TEST_CASE("smo_train: dual objective dominates a discretized feasible point") {
  const auto data = load_dataset("iris", kDataDir);
  const auto plan = make_folds(data, 5, 7);
  const auto train_set = subset(data, plan.train_indices(1));
  const double c = 1.0;

  TabuConfig solver;
  solver.restarts = 4;
  solver.iterations_per_restart = 2000;
  solver.rng_seed = 13;
  const auto qubo_model = train(train_set, make_encoding(1, c), solver, {});

  SmoConfig cfg;
  cfg.max_passes = 100000;
  const auto smo_model = smo_train(train_set, c, cfg);
  if (!qubo_model.degenerate) {
    CHECK(dual_objective(train_set, smo_model.alpha) >=
          dual_objective(train_set, qubo_model.alpha) - 1e-9);
  }
}

TEST_CASE("smo_train: validation") {
  const auto data = testutil::toy_separable();
  CHECK_THROWS_AS(smo_train(data, -1.0, {}), ValidationError);
  SmoConfig cfg;
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(smo_train(data, 1.0, cfg), ValidationError);
}

TEST_CASE("smo_train: exhausted pass budget reports non-convergence") {
  const auto data = testutil::random_dataset(77, 30, 4);
  SmoConfig cfg;
  cfg.max_passes = 1;
  const auto model = smo_train(data, 2.0, cfg);
  CHECK(!model.converged);  // best iterate still returned
  CHECK(model.alpha.size() == data.n);
}
