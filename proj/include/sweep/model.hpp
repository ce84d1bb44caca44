#pragma once

#include <random>
#include <string>
#include <vector>

#include "sweep/error.hpp"
#include "sweep/polyhedron.hpp"

namespace sweep {

/// The controlled drift g(x, u): an affine map or a named closed-form entry.
class PerturbationMap {
 public:
  enum class Kind { kAffine, kSineDrift, kSaturated };

  /// g(x,u) = G x + B u + b
  static PerturbationMap affine(Mat G, Mat B, Vec b);
  /// "sine_drift": g_k = u_k - sin x_k;  "saturated": g_k = tanh u_k - x_k / 2.  Requires n == d.
  static PerturbationMap catalog(const std::string& name, int n);

  Kind kind() const { return kind_; }
  int state_dim() const { return n_; }
  int control_dim() const { return d_; }

  Vec operator()(const Vec& x, const Vec& u) const;
  Mat jacobian_x(const Vec& x, const Vec& u) const;
  Mat jacobian_u(const Vec& x, const Vec& u) const;

  /// Largest relative mismatch between the Jacobians and central differences.
  double self_test(const Vec& x, const Vec& u, double step = 1e-6) const;

 private:
  Kind kind_ = Kind::kAffine;
  int n_ = 0, d_ = 0;
  Mat G_, B_;
  Vec b_;
};

class ControlSet {
 public:
  enum class Kind { kBox, kFinite, kBall };

  static ControlSet box(Vec lo, Vec hi);
  static ControlSet finite(std::vector<Vec> points);
  static ControlSet ball(Vec center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool convex() const { return kind_ != Kind::kFinite; }

  bool contains(const Vec& u, double tol = 1e-9) const;
  Vec project(const Vec& u) const;
  /// Distance from psi to the normal cone N(u; U). Zero at isolated points of a finite set.
  double normal_cone_residual(const Vec& u, const Vec& psi, double tol = 1e-9) const;
  /// max over U of <psi, u>, and a maximizer.
  double support(const Vec& psi) const;
  Vec argmax(const Vec& psi) const;
  /// Rows Z such that psi in N(u;U) forces Z psi = 0 (directions in which u can move both ways).
  Mat free_directions(const Vec& u, double tol = 1e-9) const;

  Vec sample(std::mt19937_64& rng) const;
  Vec center() const;
  /// Box corners in binary order (coordinate 0 fastest); finite points; empty for a ball.
  std::vector<Vec> vertices() const;

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const std::vector<Vec>& points() const { return points_; }
  double radius() const { return radius_; }

 private:
  Kind kind_ = Kind::kBox;
  int dim_ = 0;
  Vec lo_, hi_;
  std::vector<Vec> points_;
  double radius_ = 0.0;
};

/// Right-continuous piecewise-constant control on [0, T].
class BVControl {
 public:
  BVControl(std::vector<double> breakpoints, std::vector<Vec> values);
  static BVControl constant(const Vec& value);

  Vec operator()(double t) const;
  double total_variation() const;
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<Vec>& values() const { return values_; }
  int dim() const { return static_cast<int>(values_.front().size()); }

 private:
  std::vector<double> breaks_;
  std::vector<Vec> values_;
};

class CostFunction {
 public:
  enum class Kind { kLinear, kQuadratic, kHalfNormSq };

  static CostFunction linear(Vec a);
  static CostFunction quadratic(Mat Q, Vec a);
  static CostFunction half_norm_sq(int n);

  Kind kind() const { return kind_; }
  double operator()(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double self_test(const Vec& x, double step = 1e-6) const;

 private:
  Kind kind_ = Kind::kLinear;
  int n_ = 0;
  Mat Q_;
  Vec a_;
};

struct SweepingProblem {
  Polyhedron C;
  ControlSet U;
  PerturbationMap g;
  CostFunction phi;
  Vec x0;
  double T = 1.0;

  /// Checks dimensions, x0 in C and T > 0.
  void validate() const;
  int n() const { return C.dim(); }
  int d() const { return U.dim(); }
  int s() const { return C.count(); }
};

}  // namespace sweep
