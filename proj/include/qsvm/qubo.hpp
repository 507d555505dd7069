#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qsvm {

using BinaryVector = std::vector<std::uint8_t>;

// Quadratic unconstrained binary optimization instance: minimize z'Qz over
// z in {0,1}^n for a symmetric real Q.
//
// Storage is a packed upper-triangular table: entry (i,j) with i < j holds
// Q_ij + Q_ji, the diagonal holds Q_ii. The energy computed from this table
// equals the symmetric double sum for every assignment. Instances are
// immutable after construction and safe to share across threads.
class QuboInstance {
 public:
  // Folds a full symmetric (or general square, which is symmetrized as
  // Q_ij + Q_ji) row-major n*n matrix.
  static QuboInstance from_dense(std::size_t n, const std::vector<double>& dense);

  // Takes an already-folded upper-triangular table; `upper` holds n*(n+1)/2
  // entries in row-major order (i <= j).
  static QuboInstance from_upper(std::size_t n, std::vector<double> upper);

  std::size_t n() const { return n_; }

  // Folded coefficient at (i, j), i <= j. Diagonal: Q_ii; off-diagonal:
  // Q_ij + Q_ji.
  double coeff(std::size_t i, std::size_t j) const { return upper_[index(i, j)]; }

  const std::vector<double>& upper() const { return upper_; }

  std::size_t index(std::size_t i, std::size_t j) const {
    // row-major packed upper triangle
    return i * n_ - i * (i + 1) / 2 + j;
  }

 private:
  QuboInstance(std::size_t n, std::vector<double> upper);

  std::size_t n_;
  std::vector<double> upper_;
};

struct SolverReport {
  BinaryVector best_assignment;
  double best_energy = 0.0;
  std::uint64_t evaluations = 0;  // energy + delta computations (incremental updates included)
  std::uint64_t restarts_used = 0;
  double wall_time = 0.0;  // seconds
  bool truncated = false;  // true when a time limit cut the search short
};

// z'Qz, accumulated in a fixed row-major order so results are reproducible.
double energy(const QuboInstance& q, const BinaryVector& z);

// E(z with bit i flipped) - E(z), closed form
// (1 - 2 z_i) * (Q_ii + sum_{j != i} (Q_ij + Q_ji) z_j).
double flip_delta(const QuboInstance& q, const BinaryVector& z, std::size_t i);

struct IsingModel {
  std::vector<double> h;      // per-spin field
  std::vector<double> j;      // packed strict upper-triangular couplings
  double offset = 0.0;

  std::size_t n() const { return h.size(); }
  double coupling(std::size_t a, std::size_t b) const;  // a < b
  // sum_i h_i s_i + sum_{a<b} J_ab s_a s_b for spins s in {+1,-1}^n
  double energy(const std::vector<int>& spins) const;
};

// Conversion via sigma = 1 - 2z: for every z and its image sigma,
// ising.energy(sigma) + ising.offset == energy(q, z).
IsingModel to_ising(const QuboInstance& q);

// Exhaustive minimizer (Gray-code enumeration), the correctness oracle for the
// heuristic solvers. Ties are broken toward the lexicographically smallest bit
// sequence. Refuses n > 24.
SolverReport brute_force_solve(const QuboInstance& q);

inline constexpr std::size_t kBruteForceLimit = 24;

// Text format: header "n <count>", then one "i j value" line per nonzero with
// 0-based i <= j (folded convention as stored), '#' starts a comment line.
// Duplicate (i, j) entries are additive.
void write_qubo(const QuboInstance& q, std::ostream& out);
void write_qubo_file(const QuboInstance& q, const std::string& path);
QuboInstance read_qubo(std::istream& in);
QuboInstance read_qubo_file(const std::string& path);

}  // namespace qsvm
