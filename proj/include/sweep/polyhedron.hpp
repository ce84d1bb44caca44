#pragma once

#include <vector>

#include "sweep/error.hpp"

namespace sweep {

inline constexpr double kActiveTol = 1e-8;
inline constexpr double kRankTol = 1e-10;  // relative to the largest singular value

/// Intersection of halfspaces <a_j, x> <= c_j. Generators are stored as rows and
/// never normalized, so multipliers are in the user's scaling.
class Polyhedron {
 public:
  Polyhedron(Mat generators, Vec offsets);

  const Mat& generators() const { return rows_; }
  const Vec& offsets() const { return offsets_; }
  int dim() const { return static_cast<int>(rows_.cols()); }
  int count() const { return static_cast<int>(rows_.rows()); }

  /// False when the set was accepted but has empty interior.
  bool has_interior() const { return has_interior_; }

  Vec residuals(const Vec& x) const { return rows_ * x - offsets_; }
  bool contains(const Vec& x, double tol = 1e-9) const;

 private:
  Mat rows_;
  Vec offsets_;
  bool has_interior_ = true;
};

struct ActiveSet {
  std::vector<int> indices;  // zero-based, sorted
  double tol = kActiveTol;

  bool contains(int j) const;
  bool empty() const { return indices.empty(); }
};

struct ConeDecomposition {
  Vec point;
  std::vector<std::pair<int, double>> coefficients;  // (generator index, weight >= 0)
  bool unique = true;  // false: LICQ fails and the weights are one of many

  /// Weights embedded into R^s with zeros off the active set.
  Vec dense(int s) const;
};

ActiveSet active_set(const Vec& x, const Polyhedron& C, double tol = kActiveTol);
bool licq(const Vec& x, const Polyhedron& C, double tol = kActiveTol);

/// Rank test shared by everything that needs LICQ on an explicit index set.
bool independent_rows(const Mat& rows);

/// Rows of the generators restricted to an index list.
Mat select_rows(const Mat& rows, const std::vector<int>& idx);

Vec project_polyhedron(const Vec& y, const Polyhedron& C);
Vec project_tangent_cone(const Vec& v, const Vec& x, const Polyhedron& C, double tol = kActiveTol);
ConeDecomposition project_normal_cone(const Vec& v, const Vec& x, const Polyhedron& C,
                                      double tol = kActiveTol);

}  // namespace sweep
