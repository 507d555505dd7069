// qsvm: train and benchmark QUBO-encoded linear SVMs.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 solver
// infeasibility (constraint unsatisfied after the lambda-doubling budget).

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsvm/dataset.hpp"
#include "qsvm/encoding.hpp"
#include "qsvm/errors.hpp"
#include "qsvm/experiment.hpp"
#include "qsvm/fetch.hpp"
#include "qsvm/qubo.hpp"
#include "qsvm/smo.hpp"
#include "qsvm/tabu.hpp"
#include "qsvm/version.hpp"

namespace {

struct SolverFlags {
  std::uint64_t restarts;
  std::uint64_t iterations;  // 0 = size-scaled default
  std::uint64_t tenure = 0;
  std::uint64_t runs;

  SolverFlags(std::uint64_t restarts_, std::uint64_t iterations_, std::uint64_t runs_)
      : restarts(restarts_), iterations(iterations_), runs(runs_) {}

  void attach(CLI::App* cmd) {
    cmd->add_option("--restarts", restarts, "tabu restarts per run");
    cmd->add_option("--iterations", iterations,
                    "tabu iterations per restart (0 = min(10000 n, 10^6))");
    cmd->add_option("--tenure", tenure, "tabu tenure (0 = max(10, n/10))");
    cmd->add_option("--runs", runs, "independent multistart runs");
  }

  qsvm::TabuConfig tabu(std::uint64_t seed) const {
    qsvm::TabuConfig cfg;
    cfg.restarts = restarts;
    cfg.iterations_per_restart = iterations;
    cfg.tabu_tenure = tenure;
    cfg.rng_seed = seed;
    return cfg;
  }
};

std::vector<double> parse_c_grid(const std::string& spec) {
  // "a,b,c" of plain values, each optionally of the form 2^e
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string tok =
        spec.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!tok.empty()) {
      if (tok.rfind("2^", 0) == 0) out.push_back(std::ldexp(1.0, std::stoi(tok.substr(2))));
      else out.push_back(std::stod(tok));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw qsvm::ValidationError("empty C grid '" + spec + "'");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"QUBO-encoded linear SVM training and benchmarks"};
  app.set_version_flag("--version", qsvm::kVersion);
  app.require_subcommand(1);

  std::string data_dir_flag;
  app.add_option("--data-dir", data_dir_flag,
                 "data directory (default: $QSVM_DATA_DIR or ./data)")
      ->envname("QSVM_DATA_DIR");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "download canonical dataset copies with checksums");
  std::string fetch_dataset = "all";
  bool fetch_update = false;
  fetch->add_option("dataset", fetch_dataset, "iris, sonar, mnist or all");
  fetch->add_flag("--update", fetch_update, "accept and record changed checksums");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "apply the benchmark transforms and export CSV");
  std::string prepare_dataset;
  std::string prepare_out;
  prepare->add_option("dataset", prepare_dataset, "iris, sonar or mnist")->required();
  prepare->add_option("--out", prepare_out, "write prepared features+label CSV here");

  // train
  auto* train_cmd = app.add_subcommand("train", "train one QUBO-SVM on a full dataset");
  std::string train_dataset;
  double train_c = 1.0;
  int train_k = 1;
  double train_lambda0 = 1.0;
  int train_max_doublings = 32;
  std::uint64_t train_seed = 0;
  std::string dump_qubo_path;
  // benchmark-scale defaults: one training run in seconds to minutes
  SolverFlags train_solver{10, 10000, 20};
  train_cmd->add_option("--dataset", train_dataset, "iris, sonar or mnist")->required();
  train_cmd->add_option("--c", train_c, "box constraint C");
  train_cmd->add_option("--k", train_k, "bits per dual weight");
  train_cmd->add_option("--lambda0", train_lambda0, "initial penalty weight");
  train_cmd->add_option("--max-doublings", train_max_doublings, "lambda doubling budget");
  train_cmd->add_option("--seed", train_seed, "rng seed");
  train_cmd->add_option("--dump-qubo", dump_qubo_path,
                        "write the accepted QUBO instance (text format) here");
  train_solver.attach(train_cmd);

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "run the (C, k) x folds experiment grid");
  std::string grid_dataset;
  std::string grid_c_spec;
  std::vector<int> grid_k_values;
  std::size_t grid_folds = 5;
  std::uint64_t grid_seed = 0;
  std::string grid_out = "results.csv";
  std::size_t grid_threads = 0;
  double grid_smo_tol = 1e-3;
  std::uint64_t grid_smo_passes = 0;
  SolverFlags grid_solver{10, 10000, 20};
  grid_cmd->add_option("--dataset", grid_dataset, "iris, sonar or mnist")->required();
  grid_cmd->add_option("--c-grid", grid_c_spec, "comma list, e.g. '2^-6,2^-5,...' (default full)");
  grid_cmd->add_option("--k-grid", grid_k_values, "k values (default 1 2 3)");
  grid_cmd->add_option("--folds", grid_folds, "cross-validation folds");
  grid_cmd->add_option("--seed", grid_seed, "rng seed shared by folds and solvers");
  grid_cmd->add_option("--out", grid_out, "results CSV path");
  grid_cmd->add_option("--threads", grid_threads, "worker threads (0 = hardware)");
  grid_cmd->add_option("--smo-tolerance", grid_smo_tol, "baseline KKT tolerance");
  grid_cmd->add_option("--smo-passes", grid_smo_passes, "baseline pass budget (0 = 10 N)");
  grid_solver.attach(grid_cmd);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a QUBO instance from a text file");
  std::string solve_path;
  bool solve_exact = false;
  std::uint64_t solve_seed = 0;
  std::optional<double> solve_time_limit;
  SolverFlags solve_solver{20, 0, 20};  // library desk-scale defaults
  solve_cmd->add_option("file", solve_path, "QUBO text file")->required();
  solve_cmd->add_flag("--exact", solve_exact, "brute force (n <= 24) instead of tabu");
  solve_cmd->add_option("--seed", solve_seed, "rng seed");
  solve_cmd->add_option("--time-limit", solve_time_limit, "seconds before truncation");
  solve_solver.attach(solve_cmd);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render accuracy-vs-C SVG from a results CSV");
  std::string plot_csv;
  std::string plot_out = "accuracy.svg";
  plot_cmd->add_option("file", plot_csv, "results CSV")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);
  const std::string data_dir = qsvm::resolve_data_dir(data_dir_flag);

  if (*fetch) {
    if (fetch_dataset == "all") {
      for (const char* name : {"iris", "sonar", "mnist"})
        qsvm::fetch_datasets(name, data_dir, fetch_update);
    } else {
      qsvm::fetch_datasets(fetch_dataset, data_dir, fetch_update);
    }
    return 0;
  }

  if (*prepare) {
    const qsvm::SvmDataset data = qsvm::load_dataset(prepare_dataset, data_dir);
    std::size_t pos = 0, neg = 0;
    for (int y : data.y) (y > 0 ? pos : neg)++;
    std::cout << data.name << ": N=" << data.n << " d=" << data.dim << " (+1: " << pos
              << ", -1: " << neg << ")\n" << data.provenance << "\n";
    if (!prepare_out.empty()) {
      std::ofstream out(prepare_out);
      if (!out) throw qsvm::IoError("cannot open " + prepare_out + " for writing");
      for (std::size_t f = 0; f < data.dim; ++f) out << 'f' << f << ',';
      out << "label\n";
      char buf[40];
      for (std::size_t i = 0; i < data.n; ++i) {
        for (double v : data.row(i)) {
          std::snprintf(buf, sizeof(buf), "%.17g", v);
          out << buf << ',';
        }
        out << data.y[i] << '\n';
      }
      if (!out.flush()) throw qsvm::IoError("write failed for " + prepare_out);
      std::cout << "wrote " << prepare_out << "\n";
    }
    return 0;
  }

  if (*train_cmd) {
    const qsvm::SvmDataset data = qsvm::load_dataset(train_dataset, data_dir);
    const qsvm::PrecisionEncoding enc = qsvm::make_encoding(train_k, train_c);
    qsvm::TrainOptions opts;
    opts.lambda0 = train_lambda0;
    opts.max_doublings = train_max_doublings;
    opts.solver_runs = train_solver.runs;
    const qsvm::TrainedModel model =
        qsvm::train(data, enc, train_solver.tabu(train_seed), opts);
    std::cout << "dataset " << data.name << " C=" << train_c << " k=" << train_k
              << " lambda_used=" << model.lambda_used << "\n";
    if (model.degenerate) {
      std::cout << "degenerate solution: alpha = 0, no classifier recovered\n";
    } else {
      std::size_t sv = 0;
      for (bool s : model.support_mask) sv += s;
      std::cout << "support vectors: " << sv << "/" << data.n
                << ", training accuracy: " << qsvm::accuracy(model, data) << "\n";
    }
    if (!dump_qubo_path.empty()) {
      const auto prob = qsvm::build_qubo(data, enc, model.lambda_used);
      qsvm::write_qubo_file(prob.qubo, dump_qubo_path);
      std::cout << "wrote QUBO (" << prob.qubo.n() << " variables) to " << dump_qubo_path << "\n";
    }
    return 0;
  }

  if (*grid_cmd) {
    const qsvm::SvmDataset data = qsvm::load_dataset(grid_dataset, data_dir);
    qsvm::GridConfig cfg;
    cfg.c_values = grid_c_spec.empty() ? qsvm::GridConfig::default_c_values()
                                       : parse_c_grid(grid_c_spec);
    cfg.k_values = grid_k_values.empty() ? qsvm::GridConfig::default_k_values() : grid_k_values;
    cfg.n_folds = grid_folds;
    cfg.seed = grid_seed;
    cfg.threads = grid_threads;
    cfg.solver = grid_solver.tabu(grid_seed);
    cfg.train.solver_runs = grid_solver.runs;
    cfg.smo.tolerance = grid_smo_tol;
    cfg.smo.max_passes = grid_smo_passes;
    const auto records = qsvm::run_grid(data, cfg);
    qsvm::emit_results(records, grid_out, cfg);
    std::cout << "wrote " << records.size() << " records to " << grid_out << " (+ "
              << qsvm::sidecar_path(grid_out) << ")\n";
    return 0;
  }

  if (*solve_cmd) {
    const qsvm::QuboInstance q = qsvm::read_qubo_file(solve_path);
    qsvm::SolverReport rep;
    if (solve_exact) {
      rep = qsvm::brute_force_solve(q);
    } else {
      qsvm::TabuConfig cfg = solve_solver.tabu(solve_seed);
      cfg.time_limit = solve_time_limit;
      rep = qsvm::multistart_best(q, cfg, solve_solver.runs);
    }
    std::cout << "n " << q.n() << "\nenergy " << rep.best_energy << "\nassignment ";
    for (auto b : rep.best_assignment) std::cout << int(b);
    std::cout << "\nevaluations " << rep.evaluations << "\nrestarts " << rep.restarts_used
              << (rep.truncated ? "\ntruncated true" : "") << "\n";
    return 0;
  }

  if (*plot_cmd) {
    const auto records = qsvm::read_results(plot_csv);
    for (const std::string& path : qsvm::emit_plot(records, plot_out))
      std::cout << "wrote " << path << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qsvm::ConstraintUnsatisfied& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const qsvm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qsvm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
