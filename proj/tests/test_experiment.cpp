#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qsvm/errors.hpp"
#include "qsvm/experiment.hpp"
#include "test_util.hpp"

using namespace qsvm;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/qsvm_exp_") + name + "_" + std::to_string(::getpid());
}

GridConfig tiny_grid() {
  GridConfig cfg;
  cfg.c_values = {0.5, 1.0};
  cfg.k_values = {1};
  cfg.n_folds = 2;
  cfg.seed = 9;
  cfg.solver.restarts = 2;
  cfg.solver.iterations_per_restart = 300;
  cfg.train.solver_runs = 2;
  cfg.threads = 1;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// drops the wall_time column (index 10) from every row
std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field;
    int idx = 0;
    while (std::getline(fields, field, ',')) {
      if (idx != 10) out << field << ',';
      ++idx;
    }
    out << '\n';
  }
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QSVM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("run_grid: record layout on a separable toy set") {
  const auto data = testutil::toy_separable_10();
  const auto records = run_grid(data, tiny_grid());
  // 1 k-value x 2 C x 2 folds qubo + 2 C x 2 folds baseline
  CHECK(records.size() == 8);

  std::uint64_t hash = records.front().fold_hash;
  for (const auto& r : records) {
    CHECK(r.fold_hash == hash);  // one shared fold plan
    CHECK((r.method == "qubo_svm" || r.method == "baseline"));
    if (r.method == "baseline") CHECK(r.k == 0);
    if (r.status == "ok") {
      REQUIRE(r.accuracy.has_value());
      CHECK(*r.accuracy == doctest::Approx(1.0));  // separable: every cell perfect
      CHECK(!r.degenerate);
    } else {
      CHECK(!r.accuracy.has_value());
    }
  }
}

TEST_CASE("run_grid: full default grid has the documented cell counts") {
  const auto data = testutil::toy_separable_10();
  GridConfig cfg = tiny_grid();
  cfg.c_values = GridConfig::default_c_values();
  cfg.k_values = GridConfig::default_k_values();
  cfg.n_folds = 5;
  cfg.solver.restarts = 1;
  cfg.solver.iterations_per_restart = 60;
  cfg.train.solver_runs = 1;
  cfg.threads = 0;  // exercise the pool
  const auto records = run_grid(data, cfg);
  std::size_t qubo = 0, baseline = 0;
  for (const auto& r : records) (r.method == "baseline" ? baseline : qubo)++;
  CHECK(qubo == 165);      // 11 C x 3 k x 5 folds
  CHECK(baseline == 55);   // 11 C x 5 folds
}

TEST_CASE("run_grid: deterministic across repeats and thread counts") {
  const auto data = testutil::toy_separable_10();
  GridConfig cfg = tiny_grid();
  const auto a = run_grid(data, cfg);
  cfg.threads = 4;
  const auto b = run_grid(data, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].method == b[i].method);
    CHECK(a[i].c == b[i].c);
    CHECK(a[i].fold == b[i].fold);
    CHECK(a[i].status == b[i].status);
    CHECK(a[i].accuracy.has_value() == b[i].accuracy.has_value());
    if (a[i].accuracy) CHECK(*a[i].accuracy == *b[i].accuracy);
    if (a[i].lambda_used) CHECK(*a[i].lambda_used == *b[i].lambda_used);
  }
}

TEST_CASE("emit_results/read_results: lossless round trip") {
  const auto data = testutil::toy_separable_10();
  const GridConfig cfg = tiny_grid();
  const auto records = run_grid(data, cfg);
  const std::string csv = temp_path("roundtrip") + ".csv";
  emit_results(records, csv, cfg);
  const auto back = read_results(csv);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].dataset == records[i].dataset);
    CHECK(back[i].method == records[i].method);
    CHECK(back[i].c == records[i].c);
    CHECK(back[i].k == records[i].k);
    CHECK(back[i].fold == records[i].fold);
    CHECK(back[i].status == records[i].status);
    CHECK(back[i].accuracy.has_value() == records[i].accuracy.has_value());
    if (records[i].accuracy) CHECK(*back[i].accuracy == *records[i].accuracy);
    CHECK(back[i].fold_hash == records[i].fold_hash);
  }

  // the sidecar parses and carries config + version
  const std::string meta = slurp(sidecar_path(csv));
  CHECK(meta.find("\"version\"") != std::string::npos);
  CHECK(meta.find("\"c_values\"") != std::string::npos);

  // mean per cell equals the hand-computed mean of the fold values
  for (double c : cfg.c_values) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (const auto& r : back) {
      if (r.method != "qubo_svm" || r.c != c || !r.accuracy) continue;
      sum += *r.accuracy;
      ++cnt;
    }
    const auto mean = mean_cell_accuracy(back, data.name, "qubo_svm", c, 1);
    if (cnt == 0) {
      CHECK(!mean.has_value());
    } else {
      REQUIRE(mean.has_value());
      CHECK(*mean == doctest::Approx(sum / cnt).epsilon(1e-15));
    }
  }
  std::remove(csv.c_str());
  std::remove(sidecar_path(csv).c_str());
}

TEST_CASE("emit_results: refuses empty input") {
  CHECK_THROWS_AS(emit_results({}, temp_path("none"), tiny_grid()), ValidationError);
}

TEST_CASE("run_grid: config validation") {
  const auto data = testutil::toy_separable_10();
  GridConfig cfg = tiny_grid();
  cfg.c_values.clear();
  CHECK_THROWS_AS(run_grid(data, cfg), ValidationError);
  cfg = tiny_grid();
  cfg.c_values = {-1.0};
  CHECK_THROWS_AS(run_grid(data, cfg), ValidationError);
  cfg = tiny_grid();
  cfg.k_values = {0};
  CHECK_THROWS_AS(run_grid(data, cfg), ValidationError);
}

TEST_CASE("emit_results: byte-identical output modulo the timing column") {
  const auto data = testutil::toy_separable_10();
  const GridConfig cfg = tiny_grid();
  const std::string csv1 = temp_path("det1") + ".csv";
  const std::string csv2 = temp_path("det2") + ".csv";
  emit_results(run_grid(data, cfg), csv1, cfg);
  emit_results(run_grid(data, cfg), csv2, cfg);
  CHECK(strip_wall_time(slurp(csv1)) == strip_wall_time(slurp(csv2)));
  for (const auto& p : {csv1, csv2}) {
    std::remove(p.c_str());
    std::remove(sidecar_path(p).c_str());
  }
}

TEST_CASE("emit_plot: series, gaps and per-dataset files") {
  std::vector<ExperimentRecord> records;
  auto add = [&](const std::string& ds, const std::string& method, double c, int k,
                 std::size_t fold, std::optional<double> acc) {
    ExperimentRecord r;
    r.dataset = ds;
    r.method = method;
    r.c = c;
    r.k = k;
    r.fold = fold;
    if (acc) {
      r.accuracy = acc;
      r.status = "ok";
    } else {
      r.degenerate = true;
      r.status = "degenerate";
    }
    records.push_back(std::move(r));
  };

  SUBCASE("single series yields one polyline") {
    for (double c : {0.5, 1.0, 2.0}) add("toy", "qubo_svm", c, 1, 0, 0.9);
    const std::string svg_path = temp_path("plot1") + ".svg";
    const auto written = emit_plot(records, svg_path);
    REQUIRE(written.size() == 1);
    const std::string svg = slurp(written[0]);
    CHECK(svg.find("<svg") != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos;
         p = svg.find("<polyline", p + 1))
      ++polylines;
    CHECK(polylines == 1);
    std::remove(written[0].c_str());
  }

  SUBCASE("a degenerate run of cells splits the polyline") {
    add("toy", "qubo_svm", 0.25, 1, 0, 0.8);
    add("toy", "qubo_svm", 0.5, 1, 0, 0.9);
    add("toy", "qubo_svm", 1.0, 1, 0, std::nullopt);  // gap
    add("toy", "qubo_svm", 2.0, 1, 0, 0.85);
    add("toy", "qubo_svm", 4.0, 1, 0, 0.8);
    const std::string svg_path = temp_path("plot2") + ".svg";
    const auto written = emit_plot(records, svg_path);
    const std::string svg = slurp(written[0]);
    std::size_t polylines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos;
         p = svg.find("<polyline", p + 1))
      ++polylines;
    CHECK(polylines == 2);
    std::remove(written[0].c_str());
  }

  SUBCASE("full grid shape: one curve per k plus the baseline") {
    for (double c : {0.5, 1.0}) {
      for (int k : {1, 2, 3}) add("iris", "qubo_svm", c, k, 0, 0.9);
      add("iris", "baseline", c, 0, 0, 0.95);
    }
    const std::string svg_path = temp_path("plot3") + ".svg";
    const auto written = emit_plot(records, svg_path);
    const std::string svg = slurp(written[0]);
    std::size_t series = 0;
    for (std::size_t p = svg.find("class=\"series\""); p != std::string::npos;
         p = svg.find("class=\"series\"", p + 1))
      ++series;
    CHECK(series == 4);
    std::remove(written[0].c_str());
  }

  SUBCASE("multiple datasets produce one file each") {
    add("alpha", "qubo_svm", 1.0, 1, 0, 0.9);
    add("beta", "qubo_svm", 1.0, 1, 0, 0.8);
    const std::string svg_path = temp_path("plot4") + ".svg";
    const auto written = emit_plot(records, svg_path);
    CHECK(written.size() == 2);
    for (const auto& p : written) {
      CHECK(slurp(p).find("<svg") != std::string::npos);
      std::remove(p.c_str());
    }
  }
}

TEST_CASE("cli: solve, exit codes, dump round trip") {
  const std::string qubo_path = temp_path("q") + ".qubo";
  {
    std::ofstream out(qubo_path);
    out << "# tiny instance\nn 2\n0 0 -5\n0 1 2\n1 1 1\n";
  }
  CHECK(run_cli("solve " + qubo_path + " --exact") == 0);
  CHECK(run_cli("solve " + qubo_path + " --restarts 2 --iterations 100 --runs 2") == 0);
  CHECK(run_cli("solve /nonexistent.qubo") == 2);          // I/O error
  CHECK(run_cli("prepare nosuchdataset") == 1);            // validation error
  CHECK(run_cli("definitely-not-a-subcommand") != 0);

  const std::string dump = temp_path("dump") + ".qubo";
  const std::string data_dir = resolve_data_dir("");
  CHECK(run_cli("--data-dir " + data_dir +
                " train --dataset iris --c 0.25 --k 1 --seed 3 --restarts 2 --iterations 400 "
                "--runs 2 --dump-qubo " + dump) == 0);
  const auto q = read_qubo_file(dump);
  CHECK(q.n() == 100);
  std::remove(qubo_path.c_str());
  std::remove(dump.c_str());
}
