#pragma once

#include <string>
#include <vector>

#include "sweep/mesh.hpp"
#include "sweep/model.hpp"

namespace sweep {

enum class Scheme { kCatchingUp, kTangentProjection };
/// Which end of [t^i, t^{i+1}) the piecewise-constant control is read from.
enum class Sampling { kRightEndpoint, kLeftEndpoint };

struct Trajectory {
  std::vector<double> t;    // N+1 nodes
  std::vector<Vec> x;       // N+1 states
  std::vector<Vec> u;       // N+1 controls; u[N] is the control at T
  std::vector<Vec> velocity;  // N chord velocities (x^{i+1} - x^i) / h
  std::vector<Vec> eta;     // N+1 multipliers in R^s
  bool growth_warning = false;

  int intervals() const { return static_cast<int>(velocity.size()); }
  double h() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

/// Proj_C(x + h g(x,u)).
Vec catching_up_step(const Vec& x, const Vec& u, double h, const SweepingProblem& problem);

struct RightVelocity {
  Vec velocity;
  Vec eta;  // in R^s, zero off the active set
  bool unique = true;
};

/// Tangent-cone projection of g(x,u) and the normal-cone weights of the remainder.
RightVelocity right_velocity(const Vec& x, const Vec& u, const SweepingProblem& problem);

/// Forward simulation with a given control sequence u^0..u^{N-1} and control at T.
Trajectory simulate(const SweepingProblem& problem, const std::vector<Vec>& controls, const Vec& final_control,
                    const Mesh& mesh, Scheme scheme = Scheme::kCatchingUp);

/// Samples the control on the mesh, then simulates.
std::vector<Vec> sample_control(const BVControl& control, const Mesh& mesh,
                                Sampling sampling = Sampling::kRightEndpoint);
Trajectory integrate(const SweepingProblem& problem, const BVControl& control, const Mesh& mesh,
                     Scheme scheme = Scheme::kCatchingUp, Sampling sampling = Sampling::kRightEndpoint);

struct EtaFit {
  std::vector<Vec> eta;  // N+1
  double max_residual = 0.0;
};

/// Nonnegative fit of -(x^{i+1}-x^i)/h + g(x^i,u^i) by the active generators at x^i.
/// The last entry comes from right_velocity at (x^N, final_control).
EtaFit fit_eta(const std::vector<Vec>& states, const std::vector<Vec>& controls, const Vec& final_control,
               double h, const SweepingProblem& problem);
EtaFit extract_eta(const Trajectory& traj, const SweepingProblem& problem);

/// CSV columns t, x_1.., u_1.., eta_1..; full round-trip precision; atomic write.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace sweep
