#include "qsvm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "qsvm/errors.hpp"
#include "qsvm/rng.hpp"
#include "qsvm/version.hpp"

namespace qsvm {

std::vector<double> GridConfig::default_c_values() {
  std::vector<double> cs;
  for (int e = -6; e <= 4; ++e) cs.push_back(std::ldexp(1.0, e));
  return cs;
}

std::vector<int> GridConfig::default_k_values() { return {1, 2, 3}; }

void GridConfig::validate() const {
  if (c_values.empty()) throw ValidationError("grid: c_values must be nonempty");
  if (k_values.empty()) throw ValidationError("grid: k_values must be nonempty");
  for (double c : c_values)
    if (!(c > 0.0)) throw ValidationError("grid: C values must be positive");
  for (int k : k_values)
    if (k < 1) throw ValidationError("grid: k values must be >= 1");
  if (n_folds < 2) throw ValidationError("grid: need at least 2 folds");
}

namespace {

using Clock = std::chrono::steady_clock;

struct Cell {
  std::string method;
  double c;
  int k;  // 0 for baseline
  std::size_t c_index;
  std::size_t fold;
};

ExperimentRecord run_cell(const SvmDataset& data, const GridConfig& cfg, const FoldPlan& plan,
                          const Cell& cell) {
  ExperimentRecord rec;
  rec.dataset = data.name;
  rec.method = cell.method;
  rec.c = cell.c;
  rec.k = cell.k;
  rec.fold = cell.fold;
  rec.fold_hash = plan.hash();
  const auto t0 = Clock::now();

  const SvmDataset train_set = subset(data, plan.train_indices(cell.fold));
  const SvmDataset test_set = subset(data, plan.test_indices(cell.fold));

  try {
    // cell seeds depend only on the cell coordinates, never on execution order
    const std::uint64_t cell_tag = (cell.c_index * 8 + cell.k) * 64 + cell.fold;
    TrainedModel model;
    if (cell.method == "baseline") {
      SmoConfig smo_cfg = cfg.smo;
      smo_cfg.rng_seed = mix_seed(mix_seed(cfg.seed, 1), cell_tag);
      smo_cfg.on_step = nullptr;
      model = smo_train(train_set, cell.c, smo_cfg);
    } else {
      const PrecisionEncoding enc = make_encoding(cell.k, cell.c);
      TabuConfig solver = cfg.solver;
      solver.rng_seed = mix_seed(mix_seed(cfg.seed, 2), cell_tag);
      solver.on_incumbent = nullptr;
      model = train(train_set, enc, solver, cfg.train);
      rec.lambda_used = model.lambda_used;
    }
    rec.degenerate = model.degenerate;
    rec.solver_evaluations = model.solver_evaluations;
    if (model.degenerate) {
      rec.status = "degenerate";
    } else {
      rec.status = "ok";
      rec.accuracy = accuracy(model, test_set);
    }
  } catch (const ConstraintUnsatisfied&) {
    rec.status = "infeasible";
  }
  rec.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_grid(const SvmDataset& data, const GridConfig& cfg) {
  cfg.validate();
  data.validate();
  const FoldPlan plan = make_folds(data, cfg.n_folds, cfg.seed);

  std::vector<Cell> cells;
  for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci)
    for (std::size_t f = 0; f < cfg.n_folds; ++f)
      cells.push_back({"baseline", cfg.c_values[ci], 0, ci, f});
  for (int k : cfg.k_values)
    for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci)
      for (std::size_t f = 0; f < cfg.n_folds; ++f)
        cells.push_back({"qubo_svm", cfg.c_values[ci], k, ci, f});

  std::vector<ExperimentRecord> records(cells.size());
  const std::size_t n_threads =
      std::max<std::size_t>(1, cfg.threads > 0 ? cfg.threads
                                               : std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      records[i] = run_cell(data, cfg, plan, cells[i]);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(records.begin(), records.end(),
            [](const ExperimentRecord& a, const ExperimentRecord& b) {
              return std::tie(a.dataset, a.method, a.c, a.k, a.fold) <
                     std::tie(b.dataset, b.method, b.c, b.k, b.fold);
            });
  return records;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string sidecar_path(const std::string& csv_path) {
  const std::size_t dotpos = csv_path.find_last_of('.');
  const std::size_t slash = csv_path.find_last_of("/\\");
  if (dotpos == std::string::npos || (slash != std::string::npos && dotpos < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dotpos) + ".json";
}

void emit_results(const std::vector<ExperimentRecord>& records, const std::string& path,
                  const GridConfig& cfg) {
  if (records.empty()) throw ValidationError("emit_results: no records to write");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "dataset,method,c,k,fold,status,accuracy,degenerate,lambda_used,"
         "solver_evaluations,wall_time,fold_hash\n";
  for (const ExperimentRecord& r : records) {
    out << r.dataset << ',' << r.method << ',' << format_double(r.c) << ',' << r.k << ','
        << r.fold << ',' << r.status << ','
        << (r.accuracy ? format_double(*r.accuracy) : std::string()) << ','
        << (r.degenerate ? "true" : "false") << ','
        << (r.lambda_used ? format_double(*r.lambda_used) : std::string()) << ','
        << r.solver_evaluations << ',';
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.6f", r.wall_time);
    out << tbuf << ',' << r.fold_hash << '\n';
  }
  if (!out.flush()) throw IoError("write failed for " + path);

  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["records"] = records.size();
  meta["datasets"] = nlohmann::json::array();
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.dataset);
  for (const auto& n : names) meta["datasets"].push_back(n);
  meta["fold_hash"] = records.front().fold_hash;
  meta["config"] = {
      {"c_values", cfg.c_values},
      {"k_values", cfg.k_values},
      {"n_folds", cfg.n_folds},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"solver",
       {{"restarts", cfg.solver.restarts},
        {"iterations_per_restart", cfg.solver.iterations_per_restart},
        {"tabu_tenure", cfg.solver.tabu_tenure},
        {"rng_seed", cfg.solver.rng_seed}}},
      {"train",
       {{"lambda0", cfg.train.lambda0},
        {"max_doublings", cfg.train.max_doublings},
        {"solver_runs", cfg.train.solver_runs}}},
      {"smo",
       {{"tolerance", cfg.smo.tolerance},
        {"max_passes", cfg.smo.max_passes},
        {"rng_seed", cfg.smo.rng_seed}}},
  };
  const std::string meta_path = sidecar_path(path);
  std::ofstream meta_out(meta_path);
  if (!meta_out) throw IoError("cannot open " + meta_path + " for writing");
  meta_out << meta.dump(2) << '\n';
  if (!meta_out.flush()) throw IoError("write failed for " + meta_path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!f.empty() && f.back() == '\r') f.pop_back();
    out.push_back(std::move(f));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double_strict(const std::string& s, const std::string& what) {
  double v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("results CSV: bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace

std::vector<ExperimentRecord> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty results file");
  const std::string expected =
      "dataset,method,c,k,fold,status,accuracy,degenerate,lambda_used,"
      "solver_evaluations,wall_time,fold_hash";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw ValidationError(path + ": unexpected CSV header");
  std::vector<ExperimentRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) throw ValidationError(path + ": row with " + std::to_string(f.size()) +
                                              " fields, expected 12");
    ExperimentRecord r;
    r.dataset = f[0];
    r.method = f[1];
    r.c = parse_double_strict(f[2], "c");
    r.k = static_cast<int>(parse_double_strict(f[3], "k"));
    r.fold = static_cast<std::size_t>(parse_double_strict(f[4], "fold"));
    r.status = f[5];
    if (!f[6].empty()) r.accuracy = parse_double_strict(f[6], "accuracy");
    r.degenerate = f[7] == "true";
    if (!f[8].empty()) r.lambda_used = parse_double_strict(f[8], "lambda_used");
    r.solver_evaluations = static_cast<std::uint64_t>(parse_double_strict(f[9], "evaluations"));
    r.wall_time = parse_double_strict(f[10], "wall_time");
    r.fold_hash = static_cast<std::uint64_t>(std::stoull(f[11]));
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ValidationError(path + ": no data rows");
  return records;
}

std::optional<double> mean_cell_accuracy(const std::vector<ExperimentRecord>& records,
                                         const std::string& dataset, const std::string& method,
                                         double c, int k) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.dataset != dataset || r.method != method || r.k != k || r.c != c) continue;
    if (r.accuracy) {
      sum += *r.accuracy;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

namespace {

struct Series {
  std::string label;
  std::string color;
  // points ordered by C; nullopt = gap
  std::vector<std::pair<double, std::optional<double>>> points;  // (log2 c, acc)
};

std::string svg_for_dataset(const std::string& dataset,
                            const std::vector<ExperimentRecord>& records) {
  std::set<double> c_set;
  std::set<int> k_set;
  bool has_baseline = false;
  for (const auto& r : records) {
    if (r.dataset != dataset) continue;
    c_set.insert(r.c);
    if (r.method == "baseline") has_baseline = true;
    else k_set.insert(r.k);
  }
  const std::vector<double> cs(c_set.begin(), c_set.end());
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b"};

  std::vector<Series> series;
  std::size_t color_idx = 0;
  for (int k : k_set) {
    Series s;
    s.label = "k=" + std::to_string(k);
    s.color = kPalette[color_idx++ % 6];
    for (double c : cs)
      s.points.emplace_back(std::log2(c), mean_cell_accuracy(records, dataset, "qubo_svm", c, k));
    series.push_back(std::move(s));
  }
  if (has_baseline) {
    Series s;
    s.label = "baseline";
    s.color = "#444444";
    for (double c : cs)
      s.points.emplace_back(std::log2(c), mean_cell_accuracy(records, dataset, "baseline", c, 0));
    series.push_back(std::move(s));
  }

  const double width = 640, height = 440;
  const double ml = 64, mr = 150, mt = 40, mb = 56;
  const double x_lo = std::log2(cs.front()) - 0.5, x_hi = std::log2(cs.back()) + 0.5;
  const double y_lo = 0.0, y_hi = 1.0;
  auto sx = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
  auto sy = [&](double v) { return height - mb - (v - y_lo) / (y_hi - y_lo) * (height - mt - mb); };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << dataset << ": 5-fold CV accuracy</text>\n";
  // axes
  svg << "<line x1=\"" << sx(x_lo) << "\" y1=\"" << sy(y_lo) << "\" x2=\"" << sx(x_hi)
      << "\" y2=\"" << sy(y_lo) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << sx(x_lo) << "\" y1=\"" << sy(y_lo) << "\" x2=\"" << sx(x_lo)
      << "\" y2=\"" << sy(y_hi) << "\" stroke=\"black\"/>\n";
  for (double c : cs) {
    const double x = sx(std::log2(c));
    svg << "<line x1=\"" << x << "\" y1=\"" << sy(y_lo) << "\" x2=\"" << x << "\" y2=\""
        << sy(y_lo) + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << sy(y_lo) + 18
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
        << static_cast<int>(std::lround(std::log2(c))) << "</text>\n";
  }
  for (double v = 0.0; v <= 1.0001; v += 0.2) {
    svg << "<line x1=\"" << sx(x_lo) - 4 << "\" y1=\"" << sy(v) << "\" x2=\"" << sx(x_lo)
        << "\" y2=\"" << sy(v) << "\" stroke=\"black\"/>\n";
    char lab[16];
    std::snprintf(lab, sizeof(lab), "%.1f", v);
    svg << "<text x=\"" << sx(x_lo) - 8 << "\" y=\"" << sy(v) + 3
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << lab
        << "</text>\n";
  }
  svg << "<text x=\"" << (sx(x_lo) + sx(x_hi)) / 2 << "\" y=\"" << height - 16
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log2(C)"
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (sy(y_lo) + sy(y_hi)) / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << (sy(y_lo) + sy(y_hi)) / 2 << ")\">mean CV accuracy</text>\n";

  // series: polylines split at gaps, plus point markers
  std::size_t legend_row = 0;
  for (const Series& s : series) {
    svg << "<g class=\"series\" data-label=\"" << s.label << "\">\n";
    std::ostringstream seg;
    bool open = false;
    auto close_segment = [&] {
      if (open)
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\""
            << seg.str() << "\"/>\n";
      seg.str("");
      open = false;
    };
    for (const auto& [lx, acc] : s.points) {
      if (!acc) {
        close_segment();
        continue;
      }
      seg << sx(lx) << ',' << sy(*acc) << ' ';
      open = true;
      svg << "<circle cx=\"" << sx(lx) << "\" cy=\"" << sy(*acc) << "\" r=\"2.5\" fill=\""
          << s.color << "\"/>\n";
    }
    close_segment();
    const double ly = mt + 14 + 18 * static_cast<double>(legend_row++);
    svg << "<line x1=\"" << width - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << width - mr + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - mr + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> emit_plot(const std::vector<ExperimentRecord>& records,
                                   const std::string& path) {
  if (records.empty()) throw ValidationError("emit_plot: no records");
  std::set<std::string> datasets;
  for (const auto& r : records) datasets.insert(r.dataset);

  std::vector<std::string> written;
  for (const std::string& name : datasets) {
    std::string out_path = path;
    if (datasets.size() > 1) {
      const std::size_t dotpos = path.find_last_of('.');
      out_path = dotpos == std::string::npos
                     ? path + "-" + name
                     : path.substr(0, dotpos) + "-" + name + path.substr(dotpos);
    }
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << svg_for_dataset(name, records);
    if (!out.flush()) throw IoError("write failed for " + out_path);
    written.push_back(out_path);
  }
  return written;
}

}  // namespace qsvm
