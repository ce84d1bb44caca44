#pragma once

#include <string>
#include <vector>

#include "sweep/discretization.hpp"
#include "sweep/dynamics.hpp"

namespace sweep {

struct IndexSplit {
  std::vector<int> I0;    // active, <a_j, w> = c_j
  std::vector<int> Ipos;  // active, <a_j, w> > c_j
  std::vector<int> rest;  // remaining active indices
};

IndexSplit index_split(const Vec& x, const Vec& w, const Polyhedron& C, double tol = kActiveTol);

/// Domain of the coderivative at (x, u, omega) in direction w.
bool coderivative_domain_check(const Vec& x, const Vec& u, const Vec& omega, const Vec& w,
                               const SweepingProblem& problem, double tol = 1e-9);

/// Whether (zx, zu) belongs to the coderivative of the sweeping map at (x, u, omega) applied to w.
/// Returns false (rather than throwing) outside the domain.
bool coderivative_membership(const Vec& x, const Vec& u, const Vec& omega, const Vec& w, const Vec& zx,
                             const Vec& zu, const SweepingProblem& problem, double tol = 1e-9);

/// How a multiplier tuple is scaled.
enum class Normalization { kUnitLambda, kUnitSum };

struct DualBundle {
  double lambda = 0.0;
  std::vector<Vec> p;        // N+1
  std::vector<Vec> eta;      // N+1; eta[N] is the terminal multiplier
  std::vector<Vec> gamma;    // N, in R^s
  std::vector<Vec> psi;      // N, in R^d
  std::vector<Vec> theta_y;  // N
  std::vector<Vec> theta_u;  // N
  Normalization normalization = Normalization::kUnitLambda;

  const Vec& xi() const { return eta.back(); }
  Vec& xi() { return eta.back(); }
  int N() const { return static_cast<int>(gamma.size()); }
  /// lambda + |p^N| + |p^0| + sum_i |h sum_j gamma^i_j a_j| + sum_i |psi^i|
  double scale(const Polyhedron& C, double h) const;
};

/// Rescales so that the scale() sum equals 1.
DualBundle normalize_bundle(const DualBundle& b, const Polyhedron& C, double h);

struct Recovery {
  DualBundle bundle;
  double fit_residual = 0.0;
};

/// Builds multipliers for a discrete pair by backward recursion. lambda = 1 is the normal case;
/// lambda = 0 searches for an abnormal bundle with the terminal multipliers summing to one.
Recovery recover_discrete_duals(const DiscretePair& pair, const DiscreteProblem& dp, double lambda = 1.0);

struct CheckTolerances {
  double residual = 1e-8;
  double nontrivial = 1e-8;
  double positivity = 1e-6;  // relative threshold for "eta > 0"
  double activity = kActiveTol;
};

struct Condition {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct ResidualReport {
  std::vector<Condition> conditions;
  bool verdict = false;
  double nontriviality = 0.0;
  std::vector<std::string> notes;

  const Condition* find(const std::string& name) const;
  double max_residual() const;
  std::string to_json() const;
};

ResidualReport check_discrete(const DiscretePair& pair, const DiscreteProblem& dp, const DualBundle& bundle,
                              const CheckTolerances& tols = {});

struct GammaPiece {
  double a = 0.0, b = 0.0;  // support [a, b); a == b for an atom at a
  Vec mass;                 // vector mass in R^n
  bool atom() const { return a == b; }
};

/// Continuous-time multipliers sampled on a mesh.
struct ContinuousDuals {
  double lambda = 0.0;
  std::vector<double> t;  // N+1 nodes
  std::vector<Vec> p;     // N+1
  std::vector<Vec> q;     // N+1, right-continuous representative
  std::vector<Vec> psi;   // N+1
  std::vector<Vec> eta;   // N+1, eta[N] is the value at T
  std::vector<GammaPiece> gamma;
  std::vector<double> exceptional;  // times where q is not compared with p
  Normalization normalization = Normalization::kUnitLambda;
  std::vector<double> cauchy;  // level-to-level differences from assemble_limit

  /// gamma((t, T])
  Vec tail_mass(double t, int n) const;
  double scale() const;
};

/// Continuous multipliers from per-level discrete bundles (coarse to fine).
ContinuousDuals assemble_limit(const std::vector<DualBundle>& bundles, const std::vector<Mesh>& meshes,
                               const Polyhedron& C);

/// Trajectory supplies states, interval controls and u(T); multipliers come from duals.
ResidualReport check_continuous(const Trajectory& traj, const ContinuousDuals& duals, const SweepingProblem& problem,
                                const CheckTolerances& tols = {});

}  // namespace sweep
