#include "qsvm/tabu.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qsvm/errors.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

std::uint64_t TabuConfig::effective_iterations(std::size_t n) const {
  if (iterations_per_restart > 0) return iterations_per_restart;
  return std::min<std::uint64_t>(10ULL * n * 1000ULL, 1000000ULL);
}

std::uint64_t TabuConfig::effective_tenure(std::size_t n) const {
  if (tabu_tenure > 0) return tabu_tenure;
  return std::max<std::uint64_t>(10, n / 10);
}

namespace {

using Clock = std::chrono::steady_clock;

void validate(const QuboInstance& q, const TabuConfig& cfg) {
  if (cfg.restarts < 1) throw ValidationError("tabu: restarts must be >= 1");
  const std::uint64_t iters = cfg.effective_iterations(q.n());
  const std::uint64_t tenure = cfg.effective_tenure(q.n());
  if (iters < 1) throw ValidationError("tabu: iterations_per_restart must be >= 1");
  if (tenure >= iters)
    throw ValidationError("tabu: tenure (" + std::to_string(tenure) +
                          ") must be smaller than iterations_per_restart (" +
                          std::to_string(iters) + ")");
  if (cfg.time_limit && *cfg.time_limit <= 0.0)
    throw ValidationError("tabu: time_limit must be positive");
}

// Search state for one restart: current assignment, its energy, and the
// one-flip delta of every variable, maintained incrementally.
struct FlipState {
  const QuboInstance& q;
  BinaryVector z;
  double e = 0.0;
  std::vector<double> delta;

  explicit FlipState(const QuboInstance& inst) : q(inst) {}

  // O(n^2) from-scratch initialization; counts n delta evaluations + 1 energy.
  void reset(BinaryVector start, std::uint64_t& evaluations) {
    z = std::move(start);
    e = energy(q, z);
    const std::size_t n = q.n();
    delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = flip_delta(q, z, i);
    evaluations += n + 1;
  }

  // Applies the flip and refreshes all deltas in O(n); counts n updates.
  void flip(std::size_t i, std::uint64_t& evaluations) {
    const std::size_t n = q.n();
    const double si_old = z[i] ? -1.0 : 1.0;  // change of z_i
    e += delta[i];
    z[i] ^= 1;
    for (std::size_t j = 0; j < i; ++j) {
      const double sj = z[j] ? -1.0 : 1.0;
      delta[j] += sj * si_old * q.coeff(j, i);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sj = z[j] ? -1.0 : 1.0;
      delta[j] += sj * si_old * q.coeff(i, j);
    }
    delta[i] = -delta[i];
    evaluations += n;
  }
};

}  // namespace

SolverReport tabu_solve(const QuboInstance& q, const TabuConfig& cfg) {
  validate(q, cfg);
  const auto start_time = Clock::now();
  const std::size_t n = q.n();
  const std::uint64_t iters = cfg.effective_iterations(n);
  const std::uint64_t tenure = cfg.effective_tenure(n);

  SolverReport rep;
  rep.best_assignment.assign(n, 0);
  rep.best_energy = 0.0;  // all-zeros energy; restart 0 starts there anyway
  std::uint64_t global_iter = 0;

  FlipState state(q);
  std::vector<std::uint64_t> tabu_until(n);

  for (std::uint64_t r = 0; r < cfg.restarts && !rep.truncated; ++r) {
    SplitMix64 rng(mix_seed(cfg.rng_seed, r));
    BinaryVector start(n, 0);
    if (r > 0) {
      for (std::size_t i = 0; i < n; ++i) start[i] = rng.next_bit() ? 1 : 0;
    }
    state.reset(std::move(start), rep.evaluations);
    std::fill(tabu_until.begin(), tabu_until.end(), 0);
    ++rep.restarts_used;

    if (state.e < rep.best_energy) {
      rep.best_energy = state.e;
      rep.best_assignment = state.z;
      if (cfg.on_incumbent) cfg.on_incumbent(global_iter, rep.best_energy);
    }

    for (std::uint64_t it = 0; it < iters; ++it, ++global_iter) {
      // Best admissible flip: non-tabu, or tabu but improving the incumbent
      // (aspiration). Ties go to the lowest index.
      std::size_t pick = n;
      double pick_delta = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double d = state.delta[i];
        if (d >= pick_delta) continue;
        if (tabu_until[i] > it && state.e + d >= rep.best_energy) continue;
        pick = i;
        pick_delta = d;
      }
      if (pick == n) {
        // Everything tabu and nothing aspirates: take the least-bad move.
        pick = static_cast<std::size_t>(
            std::min_element(state.delta.begin(), state.delta.end()) - state.delta.begin());
      }
      state.flip(pick, rep.evaluations);
      tabu_until[pick] = it + 1 + tenure;
      if (state.e < rep.best_energy) {
        rep.best_energy = state.e;
        rep.best_assignment = state.z;
        if (cfg.on_incumbent) cfg.on_incumbent(global_iter, rep.best_energy);
      }
      if (cfg.time_limit && (it & 1023) == 0) {
        const double elapsed = std::chrono::duration<double>(Clock::now() - start_time).count();
        if (elapsed > *cfg.time_limit) {
          rep.truncated = true;
          break;
        }
      }
    }
  }

  // best_energy must match a from-scratch recomputation of the assignment
  rep.best_energy = energy(q, rep.best_assignment);
  ++rep.evaluations;
  rep.wall_time = std::chrono::duration<double>(Clock::now() - start_time).count();
  return rep;
}

SolverReport multistart_best(const QuboInstance& q, const TabuConfig& cfg, std::uint64_t runs) {
  if (runs < 1) throw ValidationError("multistart_best: runs must be >= 1");
  const auto start_time = Clock::now();
  SolverReport best;
  std::uint64_t evaluations = 0;
  std::uint64_t restarts = 0;
  bool truncated = false;
  for (std::uint64_t run = 0; run < runs; ++run) {
    TabuConfig run_cfg = cfg;
    run_cfg.rng_seed = run == 0 ? cfg.rng_seed : mix_seed(cfg.rng_seed, run);
    SolverReport rep = tabu_solve(q, run_cfg);
    evaluations += rep.evaluations;
    restarts += rep.restarts_used;
    truncated = truncated || rep.truncated;
    if (run == 0 || rep.best_energy < best.best_energy) best = std::move(rep);
    if (truncated) break;
  }
  best.evaluations = evaluations;
  best.restarts_used = restarts;
  best.truncated = truncated;
  best.wall_time = std::chrono::duration<double>(Clock::now() - start_time).count();
  return best;
}

}  // namespace qsvm
