#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsvm/dataset.hpp"
#include "qsvm/encoding.hpp"
#include "qsvm/smo.hpp"
#include "qsvm/tabu.hpp"

namespace qsvm {

// One (dataset, method, C, k, fold) cell of the experiment grid.
struct ExperimentRecord {
  std::string dataset;
  std::string method;  // "qubo_svm" or "baseline"
  double c = 0.0;
  int k = 0;  // 0 for the baseline
  std::size_t fold = 0;
  // ok: accuracy present; degenerate: all-zero solution, accuracy absent;
  // infeasible: lambda doubling exhausted, accuracy absent.
  std::string status = "ok";
  std::optional<double> accuracy;
  bool degenerate = false;
  std::optional<double> lambda_used;
  std::uint64_t solver_evaluations = 0;
  double wall_time = 0.0;
  std::uint64_t fold_hash = 0;
};

struct GridConfig {
  std::vector<double> c_values;  // default 2^-6 .. 2^4
  std::vector<int> k_values;     // default {1, 2, 3}
  std::size_t n_folds = 5;
  std::uint64_t seed = 0;
  TabuConfig solver;
  TrainOptions train;
  SmoConfig smo;
  std::size_t threads = 0;  // 0 = hardware concurrency

  static std::vector<double> default_c_values();
  static std::vector<int> default_k_values();

  void validate() const;
};

// Runs every (method, C, k, fold) cell with one shared fold plan. Per-cell
// solver failures are captured in the record, never propagated. Records come
// back sorted by (dataset, method, c, k, fold) regardless of execution order.
std::vector<ExperimentRecord> run_grid(const SvmDataset& data, const GridConfig& cfg);

// CSV columns, in order:
//   dataset,method,c,k,fold,status,accuracy,degenerate,lambda_used,
//   solver_evaluations,wall_time,fold_hash
// Absent accuracy/lambda_used serialize as empty fields. A JSON sidecar
// (path with extension replaced by .json) records the full configuration and
// library version. Refuses empty record lists.
void emit_results(const std::vector<ExperimentRecord>& records, const std::string& path,
                  const GridConfig& cfg);

std::vector<ExperimentRecord> read_results(const std::string& path);

// Mean accuracy over folds with accuracy present; nullopt when every fold of
// the cell is accuracy-free (rendered as a curve gap).
std::optional<double> mean_cell_accuracy(const std::vector<ExperimentRecord>& records,
                                         const std::string& dataset, const std::string& method,
                                         double c, int k);

// One self-contained SVG per dataset: mean CV accuracy vs log2(C), one curve
// per (method, k) series, degenerate cells rendered as gaps. For a single
// dataset the SVG lands at `path`; with several, "-<dataset>" is inserted
// before the extension. Returns the written paths.
std::vector<std::string> emit_plot(const std::vector<ExperimentRecord>& records,
                                   const std::string& path);

std::string sidecar_path(const std::string& csv_path);

}  // namespace qsvm
