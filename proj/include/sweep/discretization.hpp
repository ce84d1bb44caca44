#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sweep/dynamics.hpp"
#include "sweep/mesh.hpp"
#include "sweep/model.hpp"

namespace sweep {

struct DiscretePair {
  std::vector<Vec> x;  // N+1
  std::vector<Vec> u;  // N

  int N() const { return static_cast<int>(u.size()); }
};

/// A continuous-time (state, velocity, control) triple evaluable anywhere in [0, T].
/// `kinks` lists times where the velocity or control may jump; quadrature splits there.
struct ReferencePath {
  std::function<Vec(double)> state;
  std::function<Vec(double)> velocity;
  std::function<Vec(double)> control;
  std::vector<double> kinks;

  /// Piecewise-linear state, piecewise-constant velocity and control from node data.
  static ReferencePath from_trajectory(const Trajectory& traj);
  static ReferencePath from_pair(const DiscretePair& pair, const Mesh& mesh);
};

/// Integral of f over [a, b]: composite midpoint rule, 4 samples per piece, split at kinks.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& kinks);
Vec integrate_piecewise_vec(const std::function<Vec(double)>& f, double a, double b,
                            const std::vector<double>& kinks);

struct FeasibleApproximation {
  DiscretePair pair;
  double control_l2 = 0.0;   // L2 distance between step control and reference control
  double state_w12 = 0.0;    // W^{1,2} distance between piecewise-linear state and reference state
};

/// Samples u^i = ref.control(t^{i+1}) and re-simulates by catching-up from x0.
FeasibleApproximation approximate_feasible(const SweepingProblem& problem, const ReferencePath& ref,
                                           const Mesh& mesh);

struct TrackingErrors {
  double velocity_l2 = 0.0;
  double control_l2 = 0.0;
  double node_max = 0.0;
  double state_l2 = 0.0;
};

TrackingErrors tracking_errors(const DiscretePair& pair, const Mesh& mesh, const ReferencePath& ref);

class DiscreteProblem {
 public:
  DiscreteProblem(SweepingProblem problem, Mesh mesh, std::optional<ReferencePath> reference, double epsilon,
                  double tracking_weight);

  const SweepingProblem& problem() const { return problem_; }
  const Mesh& mesh() const { return mesh_; }
  const std::optional<ReferencePath>& reference() const { return reference_; }
  double epsilon() const { return epsilon_; }
  double tracking_weight() const { return weight_; }
  /// u^0 fixed to the reference control at 0 when a reference is given.
  const std::optional<Vec>& pinned_first() const { return pinned_; }

  /// Tracking contribution of one interval, given the chord velocity and control.
  double interval_tracking(int i, const Vec& velocity, const Vec& u) const;
  /// Catching-up states for a control sequence.
  std::vector<Vec> states(const std::vector<Vec>& controls) const;
  double objective(const DiscretePair& pair) const;
  double objective(const std::vector<Vec>& controls) const;
  DiscretePair pair(const std::vector<Vec>& controls) const;

  /// Sum of the squared tracking integrals, compared against epsilon / 2.
  double localization_value(const DiscretePair& pair) const;
  bool within_localization(const DiscretePair& pair) const;

  /// Gradients of the tracking integrand w.r.t. chord velocity and control, scaled by the weight.
  Vec theta_y(int i, const Vec& velocity) const;
  Vec theta_u(int i, const Vec& u) const;

 private:
  struct Moments {
    Vec vel_int;       // integral of reference velocity over the interval
    double vel_sq = 0; // integral of its squared norm
    Vec ctrl_int;
    double ctrl_sq = 0;
  };
  double raw_tracking(int i, const Vec& velocity, const Vec& u) const;

  SweepingProblem problem_;
  Mesh mesh_;
  std::optional<ReferencePath> reference_;
  double epsilon_;
  double weight_;
  std::optional<Vec> pinned_;
  std::vector<Moments> moments_;
};

DiscreteProblem discretize_problem(const SweepingProblem& problem, const Mesh& mesh,
                                   std::optional<ReferencePath> reference = std::nullopt, double epsilon = 0.0,
                                   double tracking_weight = 0.0);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double err_vel_l2 = 0.0;
  double err_ctrl_l2 = 0.0;
  double err_node_max = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool monotone = true;  // velocity and node errors non-increasing in m

  std::string to_csv() const;
};

/// Simulates the reference control sampled at right endpoints on each dyadic level and
/// compares with the reference path.
ConvergenceReport convergence_report(const SweepingProblem& problem, const std::vector<int>& levels,
                                     const ReferencePath& reference);

}  // namespace sweep
