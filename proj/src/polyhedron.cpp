#include "sweep/polyhedron.hpp"

#include <algorithm>
#include <sstream>

#include "sweep/qp.hpp"

namespace sweep {

Polyhedron::Polyhedron(Mat generators, Vec offsets)
    : rows_(std::move(generators)), offsets_(std::move(offsets)) {
  if (rows_.rows() < 1 || rows_.cols() < 1)
    throw Error(ErrorCode::kInvalidArgument, "polyhedron needs at least one generator");
  if (offsets_.size() != rows_.rows())
    throw Error(ErrorCode::kInvalidArgument, "polyhedron: offsets/generators count mismatch");
  if (!rows_.allFinite() || !offsets_.allFinite())
    throw Error(ErrorCode::kInvalidArgument, "polyhedron: non-finite data");
  for (Eigen::Index j = 0; j < rows_.rows(); ++j)
    if (rows_.row(j).norm() == 0.0)
      throw Error(ErrorCode::kInvalidArgument, "polyhedron: zero generator " + std::to_string(j + 1));

  // nonemptiness: project the origin; Infeasible propagates
  try {
    project_halfspaces(Vec::Zero(rows_.cols()), rows_, offsets_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInfeasible) throw Error(ErrorCode::kInvalidArgument, "polyhedron is empty");
    throw;
  }
  // interior: still feasible after pulling every face inward a little
  const double delta = 1e-7;
  Vec tight = offsets_;
  for (Eigen::Index j = 0; j < rows_.rows(); ++j) tight(j) -= delta * rows_.row(j).norm();
  try {
    project_halfspaces(Vec::Zero(rows_.cols()), rows_, tight);
  } catch (const Error&) {
    has_interior_ = false;
  }
}

bool Polyhedron::contains(const Vec& x, double tol) const {
  return residuals(x).maxCoeff() <= tol;
}

bool ActiveSet::contains(int j) const {
  return std::binary_search(indices.begin(), indices.end(), j);
}

Vec ConeDecomposition::dense(int s) const {
  Vec out = Vec::Zero(s);
  for (auto [j, w] : coefficients) out(j) = w;
  return out;
}

ActiveSet active_set(const Vec& x, const Polyhedron& C, double tol) {
  if (x.size() != C.dim()) throw Error(ErrorCode::kInvalidArgument, "active_set: dimension mismatch");
  Vec r = C.residuals(x);
  ActiveSet out;
  out.tol = tol;
  for (int j = 0; j < C.count(); ++j) {
    if (r(j) > tol) {
      std::ostringstream os;
      os << "constraint " << j + 1 << " violated by " << r(j);
      throw Error(ErrorCode::kInfeasiblePoint, os.str());
    }
    if (std::abs(r(j)) <= tol) out.indices.push_back(j);
  }
  return out;
}

Mat select_rows(const Mat& rows, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (size_t c = 0; c < idx.size(); ++c) out.row(c) = rows.row(idx[c]);
  return out;
}

bool independent_rows(const Mat& rows) {
  if (rows.rows() == 0) return true;
  if (rows.rows() > rows.cols()) return false;
  Eigen::JacobiSVD<Mat> svd(rows);
  const Vec& sv = svd.singularValues();
  if (sv(0) == 0.0) return false;
  return sv(sv.size() - 1) > kRankTol * sv(0);
}

bool licq(const Vec& x, const Polyhedron& C, double tol) {
  return independent_rows(select_rows(C.generators(), active_set(x, C, tol).indices));
}

Vec project_polyhedron(const Vec& y, const Polyhedron& C) {
  if (y.size() != C.dim()) throw Error(ErrorCode::kInvalidArgument, "project_polyhedron: dimension mismatch");
  try {
    return project_halfspaces(y, C.generators(), C.offsets()).point;
  } catch (const Error& e) {
    throw Error(ErrorCode::kQpFailure, e.what());
  }
}

Vec project_tangent_cone(const Vec& v, const Vec& x, const Polyhedron& C, double tol) {
  ActiveSet act = active_set(x, C, tol);
  if (act.empty()) return v;
  Mat A = select_rows(C.generators(), act.indices);
  try {
    return project_halfspaces(v, A, Vec::Zero(A.rows())).point;
  } catch (const Error& e) {
    throw Error(ErrorCode::kQpFailure, e.what());
  }
}

ConeDecomposition project_normal_cone(const Vec& v, const Vec& x, const Polyhedron& C, double tol) {
  ActiveSet act = active_set(x, C, tol);
  ConeDecomposition out;
  out.point = Vec::Zero(v.size());
  if (act.empty()) return out;
  Mat A = select_rows(C.generators(), act.indices);
  NnlsSolution sol;
  try {
    sol = nnls(A.transpose(), v, 1e-13 * (1.0 + v.norm()));
  } catch (const Error& e) {
    throw Error(ErrorCode::kQpFailure, e.what());
  }
  out.point = A.transpose() * sol.x;
  for (size_t c = 0; c < act.indices.size(); ++c)
    if (sol.x(c) > 0.0) out.coefficients.emplace_back(act.indices[c], sol.x(c));
  out.unique = independent_rows(A);
  return out;
}

}  // namespace sweep
