#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qsvm {

// Labeled data matrix with +/-1 labels. Features are stored row-major.
struct SvmDataset {
  std::string name;
  std::string provenance;  // human-readable description of applied transforms
  std::size_t n = 0;       // data points
  std::size_t dim = 0;     // features per point
  std::vector<double> x;   // n * dim, row-major
  std::vector<int> y;      // n entries in {+1, -1}

  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  // Throws ValidationError unless features are finite, labels are +/-1 and
  // both classes are present.
  void validate() const;
};

double dot(std::span<const double> a, std::span<const double> b);

// Dense linear-kernel Gram matrix, K_ij = <x_i, x_j>, row-major n*n.
std::vector<double> gram_matrix(const SvmDataset& data);

// Deterministic stratified fold assignment shared across all methods and
// hyperparameters of an experiment.
struct FoldPlan {
  std::size_t n_folds = 0;
  std::vector<std::size_t> assignments;  // fold index per data point
  std::uint64_t rng_seed = 0;

  std::uint64_t hash() const;  // stable fingerprint recorded in result rows
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;
};

FoldPlan make_folds(const SvmDataset& data, std::size_t n_folds, std::uint64_t seed);

SvmDataset subset(const SvmDataset& data, const std::vector<std::size_t>& indices);

// --- raw file readers -------------------------------------------------------

// Comma-separated numeric table with '.' decimals; a non-numeric first row is
// treated as a header and skipped. The last column may be a text label.
struct CsvTable {
  std::vector<std::vector<double>> values;  // numeric columns per row
  std::vector<std::string> labels;          // last column when non-numeric, else empty
};

CsvTable read_csv(const std::string& path);

// IDX (big-endian) image/label containers as used by the MNIST distribution.
struct IdxImages {
  std::size_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

// --- the three benchmark datasets -------------------------------------------

// Keeps versicolor (+1) and virginica (-1) from the 150-row iris table;
// features stay in raw centimeters. Result: N = 100, d = 4.
SvmDataset prepare_iris(const CsvTable& raw);

// First 100 images of digit 4 (+1) and of digit 7 (-1) in file order;
// 2x2 max-pooling to 14x14, then scaled to [0,1] by /255 and flattened
// row-major. Result: N = 200, d = 196.
SvmDataset prepare_mnist(const IdxImages& images, const std::vector<std::uint8_t>& labels);

// 60 numeric columns plus a final R/M label; M -> +1, R -> -1.
SvmDataset load_sonar(const CsvTable& raw);

// Loads + prepares one of {iris, sonar, mnist} from `data_dir` using the
// standard file names (iris.csv, sonar.csv, mnist/train-*-subset-*).
SvmDataset load_dataset(const std::string& name, const std::string& data_dir);

// Data directory resolution: explicit flag value if nonempty, else the
// QSVM_DATA_DIR environment variable, else "data".
std::string resolve_data_dir(const std::string& flag_value);

}  // namespace qsvm
