#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "qsvm/qubo.hpp"

namespace qsvm {

// Multistart single-flip tabu search configuration. Defaults are desk scale;
// the iteration budget grows with instance size up to a cap.
struct TabuConfig {
  std::uint64_t restarts = 20;
  // 0 means "use the default for the instance": min(10 * n * 1000, 10^6).
  std::uint64_t iterations_per_restart = 0;
  // 0 means "use the default": max(10, n / 10).
  std::uint64_t tabu_tenure = 0;
  std::uint64_t rng_seed = 0;
  std::optional<double> time_limit;  // seconds, across all restarts

  // Optional trace of the incumbent energy, invoked whenever it improves.
  std::function<void(std::uint64_t iteration, double best_energy)> on_incumbent;

  std::uint64_t effective_iterations(std::size_t n) const;
  std::uint64_t effective_tenure(std::size_t n) const;
};

// Best assignment over `restarts` tabu runs from varied starting points
// (the first restart starts from all-zeros, the rest uniformly at random).
// Deterministic given (q, cfg.rng_seed). A time limit never raises: the
// best-so-far is returned with `truncated` set.
SolverReport tabu_solve(const QuboInstance& q, const TabuConfig& cfg);

// Best report over `runs` independent tabu_solve calls with decorrelated
// seeds derived from cfg.rng_seed (run 0 uses cfg.rng_seed itself, so
// runs = 1 is identical to tabu_solve). Ties go to the lowest run index.
SolverReport multistart_best(const QuboInstance& q, const TabuConfig& cfg, std::uint64_t runs);

}  // namespace qsvm
