#pragma once

#include "sweep/error.hpp"

namespace sweep {

struct NnlsSolution {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set NNLS: min ||Ax - b|| s.t. x >= 0.
/// Throws kIterationCap after 10*k outer passes without KKT.
NnlsSolution nnls(const Mat& A, const Vec& b, double kkt_tol = 1e-12);

struct HalfspaceProjection {
  Vec point;
  Vec multipliers;
};

/// Euclidean projection of y onto {x : rows * x <= offsets}, with KKT multipliers.
/// Solved as a least-distance program reduced to NNLS.
HalfspaceProjection project_halfspaces(const Vec& y, const Mat& rows, const Vec& offsets);

}  // namespace sweep
