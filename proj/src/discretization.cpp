#include "sweep/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace sweep {

std::vector<double> Mesh::nodes() const {
  std::vector<double> out(N + 1);
  for (int i = 0; i <= N; ++i) out[i] = node(i);
  return out;
}

Mesh build_mesh(int m, double T) {
  if (m < 1 || m > 24) throw Error(ErrorCode::kLevelOutOfRange, "level " + std::to_string(m) + " not in 1..24");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  Mesh mesh;
  mesh.level = m;
  mesh.N = 1 << m;
  mesh.T = T;
  mesh.h = std::ldexp(T, -m);
  return mesh;
}

Mesh uniform_mesh(int N, double T) {
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "mesh needs at least one interval");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  Mesh mesh;
  mesh.N = N;
  mesh.T = T;
  mesh.h = T / N;
  if (mesh.h < 1e-12) throw Error(ErrorCode::kInvalidArgument, "mesh step below 1e-12");
  return mesh;
}

// ---------------------------------------------------------------- reference paths

namespace {

// index of the interval [t_k, t_{k+1}) containing t, clamped to the last one
size_t interval_of(const std::vector<double>& t, double s) {
  auto it = std::upper_bound(t.begin(), t.end(), s);
  size_t k = it == t.begin() ? 0 : static_cast<size_t>(it - t.begin()) - 1;
  return std::min(k, t.size() - 2);
}

ReferencePath from_nodes(std::vector<double> t, std::vector<Vec> x, std::vector<Vec> u) {
  auto tt = std::make_shared<std::vector<double>>(std::move(t));
  auto xx = std::make_shared<std::vector<Vec>>(std::move(x));
  auto uu = std::make_shared<std::vector<Vec>>(std::move(u));
  ReferencePath ref;
  ref.state = [tt, xx](double s) -> Vec {
    size_t k = interval_of(*tt, s);
    double a = (*tt)[k], b = (*tt)[k + 1];
    double w = (s - a) / (b - a);
    return (1.0 - w) * (*xx)[k] + w * (*xx)[k + 1];
  };
  ref.velocity = [tt, xx](double s) -> Vec {
    size_t k = interval_of(*tt, s);
    return ((*xx)[k + 1] - (*xx)[k]) / ((*tt)[k + 1] - (*tt)[k]);
  };
  ref.control = [tt, uu](double s) -> Vec {
    if (s >= tt->back() && uu->size() == tt->size()) return uu->back();
    return (*uu)[interval_of(*tt, s)];
  };
  ref.kinks = *tt;
  return ref;
}

}  // namespace

ReferencePath ReferencePath::from_trajectory(const Trajectory& traj) {
  if (traj.t.size() < 2) throw Error(ErrorCode::kInvalidArgument, "reference trajectory needs two nodes");
  return from_nodes(traj.t, traj.x, traj.u);
}

ReferencePath ReferencePath::from_pair(const DiscretePair& pair, const Mesh& mesh) {
  if (pair.N() != mesh.N || static_cast<int>(pair.x.size()) != mesh.N + 1)
    throw Error(ErrorCode::kInvalidArgument, "pair does not match the mesh");
  return from_nodes(mesh.nodes(), pair.x, pair.u);
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& kinks) {
  std::vector<double> cuts{a};
  for (auto it = std::upper_bound(kinks.begin(), kinks.end(), a); it != kinks.end() && *it < b; ++it)
    cuts.push_back(*it);
  cuts.push_back(b);
  double total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    double lo = cuts[k], w = (cuts[k + 1] - lo) / 4.0;
    for (int q = 0; q < 4; ++q) total += w * f(lo + (q + 0.5) * w);
  }
  return total;
}

Vec integrate_piecewise_vec(const std::function<Vec(double)>& f, double a, double b,
                            const std::vector<double>& kinks) {
  std::vector<double> cuts{a};
  for (auto it = std::upper_bound(kinks.begin(), kinks.end(), a); it != kinks.end() && *it < b; ++it)
    cuts.push_back(*it);
  cuts.push_back(b);
  Vec total;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    double lo = cuts[k], w = (cuts[k + 1] - lo) / 4.0;
    for (int q = 0; q < 4; ++q) {
      Vec v = w * f(lo + (q + 0.5) * w);
      if (total.size() == 0) total = v;
      else total += v;
    }
  }
  return total;
}

TrackingErrors tracking_errors(const DiscretePair& pair, const Mesh& mesh, const ReferencePath& ref) {
  TrackingErrors err;
  double vel = 0.0, ctrl = 0.0, st = 0.0;
  for (int i = 0; i < mesh.N; ++i) {
    const double a = mesh.node(i), b = mesh.node(i + 1);
    Vec v = (pair.x[i + 1] - pair.x[i]) / mesh.h;
    const Vec& xi = pair.x[i];
    const Vec& u = pair.u[i];
    vel += integrate_piecewise([&](double t) { return (v - ref.velocity(t)).squaredNorm(); }, a, b, ref.kinks);
    ctrl += integrate_piecewise([&](double t) { return (u - ref.control(t)).squaredNorm(); }, a, b, ref.kinks);
    st += integrate_piecewise([&](double t) { return (xi + (t - a) * v - ref.state(t)).squaredNorm(); }, a, b,
                              ref.kinks);
  }
  for (int i = 0; i <= mesh.N; ++i)
    err.node_max = std::max(err.node_max, (pair.x[i] - ref.state(mesh.node(i))).norm());
  err.velocity_l2 = std::sqrt(vel);
  err.control_l2 = std::sqrt(ctrl);
  err.state_l2 = std::sqrt(st);
  return err;
}

FeasibleApproximation approximate_feasible(const SweepingProblem& problem, const ReferencePath& ref,
                                           const Mesh& mesh) {
  std::vector<Vec> controls;
  controls.reserve(mesh.N);
  for (int i = 0; i < mesh.N; ++i) controls.push_back(ref.control(mesh.node(i + 1)));
  Trajectory tr = simulate(problem, controls, controls.back(), mesh);
  FeasibleApproximation out;
  out.pair.x = tr.x;
  out.pair.u = controls;
  TrackingErrors e = tracking_errors(out.pair, mesh, ref);
  out.control_l2 = e.control_l2;
  out.state_w12 = std::sqrt(e.state_l2 * e.state_l2 + e.velocity_l2 * e.velocity_l2);
  return out;
}

// ---------------------------------------------------------------- discrete problem

DiscreteProblem::DiscreteProblem(SweepingProblem problem, Mesh mesh, std::optional<ReferencePath> reference,
                                 double epsilon, double tracking_weight)
    : problem_(std::move(problem)),
      mesh_(mesh),
      reference_(std::move(reference)),
      epsilon_(epsilon),
      weight_(tracking_weight) {
  problem_.validate();
  if (!(weight_ >= 0.0) || !std::isfinite(weight_))
    throw Error(ErrorCode::kInvalidArgument, "tracking weight must be nonnegative");
  if (weight_ > 0.0 && !reference_)
    throw Error(ErrorCode::kMissingReference, "tracking weight > 0 needs a reference");
  if (std::abs(mesh_.T - problem_.T) > 1e-12 * (1.0 + problem_.T))
    throw Error(ErrorCode::kInvalidArgument, "mesh horizon differs from the problem horizon");
  if (!reference_) return;
  if (!(epsilon_ > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive with a reference");
  for (int i = 0; i <= mesh_.N; ++i)
    if (!problem_.C.contains(reference_->state(mesh_.node(i)), 1e-6))
      throw Error(ErrorCode::kInfeasiblePoint, "reference state leaves C at node " + std::to_string(i));
  pinned_ = reference_->control(0.0);
  const auto& kinks = reference_->kinks;
  moments_.reserve(mesh_.N);
  for (int i = 0; i < mesh_.N; ++i) {
    const double a = mesh_.node(i), b = mesh_.node(i + 1);
    Moments mo;
    mo.vel_int = integrate_piecewise_vec(reference_->velocity, a, b, kinks);
    mo.vel_sq = integrate_piecewise([&](double t) { return reference_->velocity(t).squaredNorm(); }, a, b, kinks);
    mo.ctrl_int = integrate_piecewise_vec(reference_->control, a, b, kinks);
    mo.ctrl_sq = integrate_piecewise([&](double t) { return reference_->control(t).squaredNorm(); }, a, b, kinks);
    moments_.push_back(std::move(mo));
  }
}

double DiscreteProblem::raw_tracking(int i, const Vec& velocity, const Vec& u) const {
  if (!reference_) return 0.0;
  const Moments& mo = moments_[i];
  double v = mesh_.h * velocity.squaredNorm() - 2.0 * velocity.dot(mo.vel_int) + mo.vel_sq;
  double c = mesh_.h * u.squaredNorm() - 2.0 * u.dot(mo.ctrl_int) + mo.ctrl_sq;
  return std::max(0.0, v) + std::max(0.0, c);
}

double DiscreteProblem::interval_tracking(int i, const Vec& velocity, const Vec& u) const {
  if (weight_ == 0.0) return 0.0;
  return 0.5 * weight_ * raw_tracking(i, velocity, u);
}

std::vector<Vec> DiscreteProblem::states(const std::vector<Vec>& controls) const {
  if (static_cast<int>(controls.size()) != mesh_.N)
    throw Error(ErrorCode::kInvalidArgument, "control count does not match the mesh");
  std::vector<Vec> x;
  x.reserve(mesh_.N + 1);
  x.push_back(problem_.x0);
  for (int i = 0; i < mesh_.N; ++i) x.push_back(catching_up_step(x.back(), controls[i], mesh_.h, problem_));
  return x;
}

double DiscreteProblem::objective(const DiscretePair& pair) const {
  double J = problem_.phi(pair.x.back());
  if (weight_ > 0.0)
    for (int i = 0; i < mesh_.N; ++i)
      J += interval_tracking(i, (pair.x[i + 1] - pair.x[i]) / mesh_.h, pair.u[i]);
  return J;
}

double DiscreteProblem::objective(const std::vector<Vec>& controls) const { return objective(pair(controls)); }

DiscretePair DiscreteProblem::pair(const std::vector<Vec>& controls) const { return {states(controls), controls}; }

double DiscreteProblem::localization_value(const DiscretePair& pair) const {
  double total = 0.0;
  for (int i = 0; i < mesh_.N; ++i) total += raw_tracking(i, (pair.x[i + 1] - pair.x[i]) / mesh_.h, pair.u[i]);
  return total;
}

bool DiscreteProblem::within_localization(const DiscretePair& pair) const {
  if (!reference_) return true;
  return localization_value(pair) <= 0.5 * epsilon_ + 1e-14;
}

Vec DiscreteProblem::theta_y(int i, const Vec& velocity) const {
  if (!reference_ || weight_ == 0.0) return Vec::Zero(problem_.n());
  return weight_ * (mesh_.h * velocity - moments_[i].vel_int);
}

Vec DiscreteProblem::theta_u(int i, const Vec& u) const {
  if (!reference_ || weight_ == 0.0) return Vec::Zero(problem_.d());
  return weight_ * (mesh_.h * u - moments_[i].ctrl_int);
}

DiscreteProblem discretize_problem(const SweepingProblem& problem, const Mesh& mesh,
                                   std::optional<ReferencePath> reference, double epsilon, double tracking_weight) {
  return DiscreteProblem(problem, mesh, std::move(reference), epsilon, tracking_weight);
}

// ---------------------------------------------------------------- convergence

std::string ConvergenceReport::to_csv() const {
  std::string out = "m,h,err_vel_L2,err_ctrl_L2,err_node_max\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.level, r.h, r.err_vel_l2, r.err_ctrl_l2,
                  r.err_node_max);
    out += buf;
  }
  return out;
}

ConvergenceReport convergence_report(const SweepingProblem& problem, const std::vector<int>& levels,
                                     const ReferencePath& reference) {
  ConvergenceReport rep;
  for (int m : levels) {
    Mesh mesh = build_mesh(m, problem.T);
    std::vector<Vec> controls;
    controls.reserve(mesh.N);
    for (int i = 0; i < mesh.N; ++i) controls.push_back(reference.control(mesh.node(i + 1)));
    Trajectory tr = simulate(problem, controls, reference.control(mesh.T), mesh);
    DiscretePair pair{tr.x, controls};
    TrackingErrors e = tracking_errors(pair, mesh, reference);
    rep.rows.push_back({m, mesh.h, e.velocity_l2, e.control_l2, e.node_max});
  }
  for (size_t k = 1; k < rep.rows.size(); ++k) {
    if (rep.rows[k].err_vel_l2 > rep.rows[k - 1].err_vel_l2 + 1e-15) rep.monotone = false;
    if (rep.rows[k].err_node_max > rep.rows[k - 1].err_node_max + 1e-15) rep.monotone = false;
  }
  return rep;
}

}  // namespace sweep
