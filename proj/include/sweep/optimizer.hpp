#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sweep/discretization.hpp"

namespace sweep {

struct SolveOptions {
  int max_iters = 200;
  double step_size_init = 1.0;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  int multistart = 8;
  std::uint64_t seed = 0;
  double fd_epsilon = 1e-6;  // scaled by (1 + |u|_inf)
  double stop_tol = 1e-8;
  double tie_tol = 1e-10;
  /// Explicit starting control sequences, tried before the generated ones.
  std::vector<std::vector<Vec>> seed_controls;
};

struct SolveResult {
  DiscretePair pair;
  double objective = 0.0;
  int iterations = 0;
  int starts_used = 0;
  int best_start = 0;
  double kkt_residual = 0.0;
  std::vector<double> history;  // objective per accepted iterate of the winning start

  std::string to_json() const;
};

/// Projected-gradient descent on u -> J(u), states eliminated by catching-up simulation.
SolveResult solve(const DiscreteProblem& dp, const SolveOptions& opts = {});

/// Starting control sequences in the order solve() uses them.
std::vector<std::vector<Vec>> start_controls(const DiscreteProblem& dp, const SolveOptions& opts);

/// Exhaustive search over lattice control sequences; grid[k] lists the values of coordinate k.
/// Lattice points outside U are skipped. Throws kSearchSpaceTooLarge above 1e7 sequences.
SolveResult brute_force(const DiscreteProblem& dp, const std::vector<std::vector<double>>& grid);

}  // namespace sweep
