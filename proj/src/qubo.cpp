#include "qsvm/qubo.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qsvm/errors.hpp"

namespace qsvm {

namespace {

void check_finite(std::size_t n, const std::vector<double>& upper) {
  if (n < 1) throw ValidationError("QUBO instance needs n >= 1");
  for (std::size_t i = 0; i < upper.size(); ++i) {
    if (!std::isfinite(upper[i]))
      throw ValidationError("QUBO coefficient " + std::to_string(i) + " is not finite");
  }
}

}  // namespace

QuboInstance::QuboInstance(std::size_t n, std::vector<double> upper)
    : n_(n), upper_(std::move(upper)) {}

QuboInstance QuboInstance::from_dense(std::size_t n, const std::vector<double>& dense) {
  if (dense.size() != n * n)
    throw DimensionMismatch("dense QUBO matrix", n * n, dense.size());
  std::vector<double> upper(n * (n + 1) / 2);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    upper[k++] = dense[i * n + i];
    for (std::size_t j = i + 1; j < n; ++j) upper[k++] = dense[i * n + j] + dense[j * n + i];
  }
  check_finite(n, upper);
  return QuboInstance(n, std::move(upper));
}

QuboInstance QuboInstance::from_upper(std::size_t n, std::vector<double> upper) {
  if (upper.size() != n * (n + 1) / 2)
    throw DimensionMismatch("upper-triangular QUBO table", n * (n + 1) / 2, upper.size());
  check_finite(n, upper);
  return QuboInstance(n, std::move(upper));
}

double energy(const QuboInstance& q, const BinaryVector& z) {
  const std::size_t n = q.n();
  if (z.size() != n) throw DimensionMismatch("assignment", n, z.size());
  const std::vector<double>& u = q.upper();
  double e = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!z[i]) {
      k += n - i;
      continue;
    }
    double row = u[k++];  // diagonal
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      if (z[j]) row += u[k];
    }
    e += row;
  }
  return e;
}

double flip_delta(const QuboInstance& q, const BinaryVector& z, std::size_t i) {
  const std::size_t n = q.n();
  if (z.size() != n) throw DimensionMismatch("assignment", n, z.size());
  if (i >= n)
    throw ValidationError("flip index " + std::to_string(i) + " out of range for n = " +
                          std::to_string(n));
  double acc = q.coeff(i, i);
  for (std::size_t j = 0; j < i; ++j)
    if (z[j]) acc += q.coeff(j, i);
  for (std::size_t j = i + 1; j < n; ++j)
    if (z[j]) acc += q.coeff(i, j);
  const double sign = z[i] ? -1.0 : 1.0;
  return sign * acc;
}

double IsingModel::coupling(std::size_t a, std::size_t b) const {
  const std::size_t n = h.size();
  // packed strict upper triangle
  return j[a * n - a * (a + 1) / 2 - a - 1 + b];
}

double IsingModel::energy(const std::vector<int>& spins) const {
  const std::size_t n = h.size();
  double e = 0.0;
  std::size_t k = 0;
  for (std::size_t a = 0; a < n; ++a) {
    e += h[a] * spins[a];
    for (std::size_t b = a + 1; b < n; ++b, ++k) e += j[k] * spins[a] * spins[b];
  }
  return e;
}

IsingModel to_ising(const QuboInstance& q) {
  const std::size_t n = q.n();
  IsingModel m;
  m.h.assign(n, 0.0);
  m.j.assign(n * (n - 1) / 2, 0.0);
  // z_i = (1 - s_i)/2 expands z_i z_j into constant, linear and coupling parts.
  std::size_t k = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const double d = q.coeff(a, a);
    m.offset += d / 2.0;
    m.h[a] -= d / 2.0;
    for (std::size_t b = a + 1; b < n; ++b, ++k) {
      const double u = q.coeff(a, b);
      m.offset += u / 4.0;
      m.h[a] -= u / 4.0;
      m.h[b] -= u / 4.0;
      m.j[k] = u / 4.0;
    }
  }
  return m;
}

namespace {

bool lex_less(const BinaryVector& a, const BinaryVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

SolverReport brute_force_solve(const QuboInstance& q) {
  const std::size_t n = q.n();
  if (n > kBruteForceLimit)
    throw ValidationError("brute_force_solve refuses n = " + std::to_string(n) +
                          " (limit " + std::to_string(kBruteForceLimit) + " variables)");
  const auto start = std::chrono::steady_clock::now();

  BinaryVector z(n, 0);
  double e = 0.0;
  BinaryVector best_z = z;
  double best_e = e;

  // Gray-code walk: step t flips bit ctz(t), visiting all 2^n assignments with
  // one incremental delta each.
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t t = 1; t < total; ++t) {
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(t));
    e += flip_delta(q, z, bit);
    z[bit] ^= 1;
    if (e < best_e || (e == best_e && lex_less(z, best_z))) {
      best_e = e;
      best_z = z;
    }
  }

  SolverReport rep;
  rep.best_assignment = std::move(best_z);
  rep.best_energy = energy(q, rep.best_assignment);  // recompute from scratch
  rep.evaluations = total;
  rep.restarts_used = 0;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

void write_qubo(const QuboInstance& q, std::ostream& out) {
  out << "n " << q.n() << "\n";
  std::ostringstream line;
  line.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < q.n(); ++i) {
    for (std::size_t j = i; j < q.n(); ++j) {
      const double v = q.coeff(i, j);
      if (v == 0.0) continue;
      line.str("");
      line << i << ' ' << j << ' ' << v << '\n';
      out << line.str();
    }
  }
}

void write_qubo_file(const QuboInstance& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_qubo(q, out);
  if (!out.flush()) throw IoError("write failed for " + path);
}

QuboInstance read_qubo(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<double> upper;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    if (!have_n) {
      std::string tag;
      fields >> tag >> n;
      if (tag != "n" || fields.fail() || n < 1)
        throw ValidationError("QUBO text: expected header 'n <count>' on line " +
                              std::to_string(lineno));
      have_n = true;
      upper.assign(n * (n + 1) / 2, 0.0);
      continue;
    }
    std::size_t i, j;
    double v;
    fields >> i >> j >> v;
    if (fields.fail())
      throw ValidationError("QUBO text: malformed entry on line " + std::to_string(lineno));
    if (i > j || j >= n)
      throw ValidationError("QUBO text: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") out of range on line " + std::to_string(lineno) +
                            " (need 0-based i <= j < n)");
    upper[i * n - i * (i + 1) / 2 + j] += v;
  }
  if (!have_n) throw ValidationError("QUBO text: missing 'n <count>' header");
  return QuboInstance::from_upper(n, std::move(upper));
}

QuboInstance read_qubo_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_qubo(in);
}

}  // namespace qsvm
