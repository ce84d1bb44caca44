#pragma once

#include <utility>
#include <vector>

#include "sweep/stationarity.hpp"

namespace sweep {

/// Time-independent multiplier data, usable at every mesh level.
struct Certificate {
  double lambda = 1.0;
  Vec p;       // p(t)
  Vec q;       // q(t) off the atoms
  Vec psi;     // psi(t)
  Vec eta;     // eta(t) for t < T, in R^s
  Vec eta_T;   // eta(T)
  Vec gamma;   // per-interval coefficients in R^s (density w.r.t. time)
  std::vector<std::pair<double, Vec>> atoms;  // (time, mass in R^n)

  /// Throws kInvalidArgument when field sizes disagree with (n, d, s).
  void validate(int n, int d, int s) const;
};

/// Discrete bundle with p^i = q, p^N = p(T), psi^i = h psi, theta from the problem.
DualBundle discretize_certificate(const Certificate& cert, const DiscretePair& pair, const DiscreteProblem& dp);

/// Continuous multipliers sampled on the mesh nodes.
ContinuousDuals sample_certificate(const Certificate& cert, const Mesh& mesh, const Polyhedron& C);

}  // namespace sweep
