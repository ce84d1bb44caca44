#include "sweep/qp.hpp"

#include <algorithm>
#include <vector>

namespace sweep {

namespace {

// Least squares on the passive columns; unused entries stay zero.
Vec solve_passive(const Mat& A, const Vec& b, const std::vector<bool>& passive) {
  std::vector<int> cols;
  for (int j = 0; j < static_cast<int>(passive.size()); ++j)
    if (passive[j]) cols.push_back(j);
  Vec z = Vec::Zero(A.cols());
  if (cols.empty()) return z;
  Mat Ap(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) Ap.col(c) = A.col(cols[c]);
  Vec zp = Ap.completeOrthogonalDecomposition().solve(b);
  for (size_t c = 0; c < cols.size(); ++c) z(cols[c]) = zp(c);
  return z;
}

}  // namespace

NnlsSolution nnls(const Mat& A, const Vec& b, double kkt_tol) {
  if (A.rows() != b.size()) throw Error(ErrorCode::kInvalidArgument, "nnls: A rows != b size");
  const int k = static_cast<int>(A.cols());
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "nnls: A needs at least one column");
  if (!A.allFinite() || !b.allFinite()) throw Error(ErrorCode::kInvalidArgument, "nnls: non-finite data");

  NnlsSolution out;
  Vec x = Vec::Zero(k);
  std::vector<bool> passive(k, false);
  std::vector<bool> rejected(k, false);
  const int cap = 10 * k;
  int passes = 0;

  while (true) {
    Vec w = A.transpose() * (b - A * x);
    // pick the entering index
    int t = -1;
    double best = kkt_tol;
    const bool bland = passes >= 3 * k;
    for (int j = 0; j < k; ++j) {
      if (passive[j] || rejected[j] || w(j) <= kkt_tol) continue;
      if (bland) { t = j; break; }
      if (w(j) > best) { best = w(j); t = j; }
    }
    if (t < 0) break;
    if (++passes > cap)
      throw Error(ErrorCode::kIterationCap, "nnls: no KKT point after " + std::to_string(cap) + " passes");

    passive[t] = true;
    Vec z = solve_passive(A, b, passive);
    if (z(t) <= 0.0) {
      // numerically dependent column; try the next candidate
      passive[t] = false;
      rejected[t] = true;
      continue;
    }
    int inner = 0;
    while (true) {
      double alpha = 2.0;
      int leaving = -1;
      for (int j = 0; j < k; ++j) {
        if (!passive[j] || z(j) > 0.0) continue;
        double a = x(j) / (x(j) - z(j));
        if (a < alpha) { alpha = a; leaving = j; }
      }
      if (leaving < 0) break;
      x += alpha * (z - x);
      passive[leaving] = false;
      for (int j = 0; j < k; ++j)
        if (passive[j] && x(j) <= 0.0) passive[j] = false;
      z = solve_passive(A, b, passive);
      if (++inner > 3 * k + 3) break;
    }
    x = z;
    for (int j = 0; j < k; ++j) {
      if (!passive[j]) x(j) = 0.0;
      x(j) = std::max(0.0, x(j));
    }
    std::fill(rejected.begin(), rejected.end(), false);
  }

  out.x = x;
  out.residual_norm = (A * x - b).norm();
  out.iterations = passes;
  Vec grad = A.transpose() * (A * x - b);
  bool ok = true;
  const double slack = kkt_tol * 1e3 + 1e-12 * (1.0 + A.norm() * b.norm());
  for (int j = 0; j < k; ++j) {
    if (x(j) > 0.0 && std::abs(grad(j)) > slack) ok = false;
    if (x(j) == 0.0 && grad(j) < -slack) ok = false;
  }
  out.converged = ok;
  return out;
}

HalfspaceProjection project_halfspaces(const Vec& y, const Mat& rows, const Vec& offsets) {
  const auto s = rows.rows();
  const auto n = rows.cols();
  if (y.size() != n || offsets.size() != s)
    throw Error(ErrorCode::kInvalidArgument, "project_halfspaces: dimension mismatch");

  HalfspaceProjection out{y, Vec::Zero(s)};
  Vec slack = rows * y - offsets;
  if (s == 0 || slack.maxCoeff() <= 0.0) return out;

  // least-distance program: min ||z|| s.t. (-rows) z >= rows*y - offsets, x = y + z
  Mat E(n + 1, s);
  E.topRows(n) = -rows.transpose();
  E.row(n) = slack.transpose();
  Vec f = Vec::Zero(n + 1);
  f(n) = 1.0;
  NnlsSolution sol = nnls(E, f, 1e-14);
  Vec r = E * sol.x - f;
  if (r.norm() < 1e-12 || std::abs(r(n)) < 1e-14)
    throw Error(ErrorCode::kInfeasible, "project_halfspaces: empty feasible region");
  const double denom = 1.0 - slack.dot(sol.x);
  Vec nu = sol.x / denom;
  Vec x = y - rows.transpose() * nu;

  // polish on the support: make the active rows tight exactly
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < s; ++j)
    if (nu(j) > 0.0) support.push_back(j);
  if (!support.empty()) {
    Mat As(support.size(), n);
    Vec bs(support.size());
    for (size_t c = 0; c < support.size(); ++c) {
      As.row(c) = rows.row(support[c]);
      bs(c) = offsets(support[c]);
    }
    Vec delta = (As * As.transpose()).completeOrthogonalDecomposition().solve(As * x - bs);
    Vec nu2 = nu;
    for (size_t c = 0; c < support.size(); ++c) nu2(support[c]) += delta(c);
    Vec x2 = x - As.transpose() * delta;
    const double viol_old = std::max(0.0, (rows * x - offsets).maxCoeff());
    const double viol_new = std::max(0.0, (rows * x2 - offsets).maxCoeff());
    if (nu2.minCoeff() >= 0.0 && viol_new <= viol_old + 1e-15) {
      x = x2;
      nu = nu2;
    }
  }
  out.point = x;
  out.multipliers = nu;
  return out;
}

}  // namespace sweep
