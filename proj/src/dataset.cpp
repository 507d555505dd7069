#include "qsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qsvm/errors.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

void SvmDataset::validate() const {
  if (n < 2) throw ValidationError(name + ": need at least 2 data points");
  if (x.size() != n * dim) throw DimensionMismatch(name + " feature matrix", n * dim, x.size());
  if (y.size() != n) throw DimensionMismatch(name + " labels", n, y.size());
  for (double v : x)
    if (!std::isfinite(v)) throw ValidationError(name + ": non-finite feature value");
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else throw ValidationError(name + ": label " + std::to_string(label) + " is not +/-1");
  }
  if (!pos || !neg) throw ValidationError(name + ": both classes must be present");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> gram_matrix(const SvmDataset& data) {
  const std::size_t n = data.n;
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = dot(data.row(i), data.row(j));
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

std::uint64_t FoldPlan::hash() const {
  // FNV-1a over (seed, n_folds, assignments)
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mixin = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mixin(rng_seed);
  mixin(n_folds);
  for (std::size_t a : assignments) mixin(a);
  return h;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

FoldPlan make_folds(const SvmDataset& data, std::size_t n_folds, std::uint64_t seed) {
  data.validate();
  if (n_folds < 2) throw ValidationError("make_folds: need at least 2 folds");
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.rng_seed = seed;
  plan.assignments.assign(data.n, 0);
  // Per class: shuffle indices, then slice into n_folds near-equal chunks so
  // per-fold class counts differ by at most one from proportionality.
  for (int cls : {+1, -1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.n; ++i)
      if (data.y[i] == cls) idx.push_back(i);
    if (idx.size() < n_folds)
      throw ValidationError("make_folds: class " + std::to_string(cls) + " has only " +
                            std::to_string(idx.size()) + " points for " +
                            std::to_string(n_folds) + " folds");
    SplitMix64 rng(mix_seed(seed, cls == 1 ? 1 : 2));
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.next_below(i + 1)]);
    for (std::size_t f = 0; f < n_folds; ++f) {
      const std::size_t lo = f * idx.size() / n_folds;
      const std::size_t hi = (f + 1) * idx.size() / n_folds;
      for (std::size_t t = lo; t < hi; ++t) plan.assignments[idx[t]] = f;
    }
  }
  return plan;
}

SvmDataset subset(const SvmDataset& data, const std::vector<std::size_t>& indices) {
  SvmDataset out;
  out.name = data.name;
  out.provenance = data.provenance;
  out.n = indices.size();
  out.dim = data.dim;
  out.x.reserve(out.n * out.dim);
  out.y.reserve(out.n);
  for (std::size_t i : indices) {
    const auto r = data.row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
    out.y.push_back(data.y[i]);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? comma : comma - start);
    // trim whitespace and CR
    const auto a = f.find_first_not_of(" \t\r");
    const auto b = f.find_last_not_of(" \t\r");
    fields.push_back(a == std::string::npos ? std::string() : f.substr(a, b - a + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool first_data_row = true;
  std::size_t expect_cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::vector<double> values;
    values.reserve(fields.size());
    std::string label;
    bool ok = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v;
      if (parse_double(fields[i], v)) {
        values.push_back(v);
      } else if (i + 1 == fields.size()) {
        label = fields[i];  // trailing text column = class label
      } else {
        ok = false;
        break;
      }
    }
    if (!ok || fields.empty()) {
      if (first_data_row) continue;  // header row
      throw ValidationError(path + ": malformed row on line " + std::to_string(lineno));
    }
    if (first_data_row) {
      expect_cols = fields.size();
      first_data_row = false;
    } else if (fields.size() != expect_cols) {
      throw ValidationError(path + ": line " + std::to_string(lineno) + " has " +
                            std::to_string(fields.size()) + " columns, expected " +
                            std::to_string(expect_cols));
    }
    table.values.push_back(std::move(values));
    table.labels.push_back(std::move(label));
  }
  if (table.values.empty()) throw ValidationError(path + ": no data rows");
  return table;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError(path + ": truncated IDX header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

IdxImages read_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != 2051)
    throw ValidationError(path + ": bad IDX image magic " + std::to_string(magic) +
                          " (expected 2051)");
  IdxImages img;
  img.count = read_be32(in, path);
  img.rows = read_be32(in, path);
  img.cols = read_be32(in, path);
  img.pixels.resize(img.count * img.rows * img.cols);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw IoError(path + ": truncated IDX pixel data");
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != 2049)
    throw ValidationError(path + ": bad IDX label magic " + std::to_string(magic) +
                          " (expected 2049)");
  const std::uint32_t count = read_be32(in, path);
  std::vector<std::uint8_t> labels(count);
  in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!in) throw IoError(path + ": truncated IDX label data");
  return labels;
}

SvmDataset prepare_iris(const CsvTable& raw) {
  SvmDataset out;
  out.name = "iris";
  out.provenance = "iris, classes versicolor (+1) and virginica (-1), raw features";
  out.dim = 4;
  for (std::size_t r = 0; r < raw.values.size(); ++r) {
    if (raw.values[r].size() != 4)
      throw ValidationError("iris row " + std::to_string(r + 1) + " has " +
                            std::to_string(raw.values[r].size()) + " numeric columns, expected 4");
    std::string cls = raw.labels[r];
    if (cls.rfind("Iris-", 0) == 0) cls = cls.substr(5);
    if (cls == "setosa") continue;
    int label;
    if (cls == "versicolor") label = 1;
    else if (cls == "virginica") label = -1;
    else throw ValidationError("iris row " + std::to_string(r + 1) + ": unknown class '" +
                               raw.labels[r] + "'");
    out.x.insert(out.x.end(), raw.values[r].begin(), raw.values[r].end());
    out.y.push_back(label);
    ++out.n;
  }
  out.validate();
  return out;
}

SvmDataset prepare_mnist(const IdxImages& images, const std::vector<std::uint8_t>& labels) {
  if (images.count != labels.size())
    throw DimensionMismatch("mnist image/label counts", images.count, labels.size());
  if (images.rows != 28 || images.cols != 28)
    throw ValidationError("mnist: expected 28x28 images, got " + std::to_string(images.rows) +
                          "x" + std::to_string(images.cols));
  constexpr std::size_t kPerDigit = 100;
  SvmDataset out;
  out.name = "mnist";
  out.provenance =
      "mnist, first 100 each of digits 4 (+1) and 7 (-1) in file order, "
      "2x2 max-pooled to 14x14, scaled to [0,1]";
  out.dim = 14 * 14;
  std::size_t n4 = 0, n7 = 0;
  for (std::size_t i = 0; i < images.count && (n4 < kPerDigit || n7 < kPerDigit); ++i) {
    const std::uint8_t digit = labels[i];
    if (digit == 4 && n4 < kPerDigit) ++n4;
    else if (digit == 7 && n7 < kPerDigit) ++n7;
    else continue;
    const std::uint8_t* px = images.pixels.data() + i * 28 * 28;
    for (std::size_t r = 0; r < 14; ++r) {
      for (std::size_t c = 0; c < 14; ++c) {
        const std::size_t r0 = 2 * r, c0 = 2 * c;
        std::uint8_t m = px[r0 * 28 + c0];
        m = std::max(m, px[r0 * 28 + c0 + 1]);
        m = std::max(m, px[(r0 + 1) * 28 + c0]);
        m = std::max(m, px[(r0 + 1) * 28 + c0 + 1]);
        out.x.push_back(static_cast<double>(m) / 255.0);
      }
    }
    out.y.push_back(digit == 4 ? 1 : -1);
    ++out.n;
  }
  if (n4 < kPerDigit || n7 < kPerDigit)
    throw ValidationError("mnist: need 100 samples of each digit, found " + std::to_string(n4) +
                          " fours and " + std::to_string(n7) + " sevens");
  out.validate();
  return out;
}

SvmDataset load_sonar(const CsvTable& raw) {
  SvmDataset out;
  out.name = "sonar";
  out.provenance = "sonar, labels M (+1) / R (-1), features as shipped";
  out.dim = 60;
  for (std::size_t r = 0; r < raw.values.size(); ++r) {
    if (raw.values[r].size() != 60)
      throw ValidationError("sonar row " + std::to_string(r + 1) + " has " +
                            std::to_string(raw.values[r].size()) +
                            " numeric columns, expected 60");
    const std::string& cls = raw.labels[r];
    int label;
    if (cls == "M") label = 1;
    else if (cls == "R") label = -1;
    else throw ValidationError("sonar row " + std::to_string(r + 1) + ": unknown label '" + cls +
                               "'");
    out.x.insert(out.x.end(), raw.values[r].begin(), raw.values[r].end());
    out.y.push_back(label);
    ++out.n;
  }
  out.validate();
  return out;
}

SvmDataset load_dataset(const std::string& name, const std::string& data_dir) {
  if (name == "iris") return prepare_iris(read_csv(data_dir + "/iris.csv"));
  if (name == "sonar") return load_sonar(read_csv(data_dir + "/sonar.csv"));
  if (name == "mnist") {
    // Prefer the full canonical files when fetched; the vendored subset keeps
    // the same file order, so both prepare to the identical dataset.
    std::string images_path = data_dir + "/mnist/train-images-idx3-ubyte";
    std::string labels_path = data_dir + "/mnist/train-labels-idx1-ubyte";
    if (!std::ifstream(images_path).good()) {
      images_path = data_dir + "/mnist/train-images-subset-idx3-ubyte";
      labels_path = data_dir + "/mnist/train-labels-subset-idx1-ubyte";
    }
    return prepare_mnist(read_idx_images(images_path), read_idx_labels(labels_path));
  }
  throw ValidationError("unknown dataset '" + name + "' (expected iris, sonar or mnist)");
}

std::string resolve_data_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("QSVM_DATA_DIR"); env && *env) return env;
  return "data";
}

}  // namespace qsvm
