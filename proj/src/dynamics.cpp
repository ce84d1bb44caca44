#include "sweep/dynamics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "sweep/qp.hpp"

namespace sweep {

namespace {

constexpr double kMinStep = 1e-12;

Error at_node(const Error& e, int i) {
  return Error(e.code(), "node " + std::to_string(i) + ": " + e.detail());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Vec catching_up_step(const Vec& x, const Vec& u, double h, const SweepingProblem& problem) {
  if (!(h >= kMinStep)) throw Error(ErrorCode::kInvalidArgument, "step size below 1e-12");
  Vec y = x + h * problem.g(x, u);
  if (problem.C.contains(y, 0.0)) return y;
  return project_polyhedron(y, problem.C);
}

RightVelocity right_velocity(const Vec& x, const Vec& u, const SweepingProblem& problem) {
  Vec g = problem.g(x, u);
  ConeDecomposition nc = project_normal_cone(g, x, problem.C);
  RightVelocity out;
  out.eta = nc.dense(problem.s());
  out.unique = nc.unique;
  // velocity from the tangent-cone projection; Moreau says it equals g - normal part
  out.velocity = project_tangent_cone(g, x, problem.C);
  return out;
}

std::vector<Vec> sample_control(const BVControl& control, const Mesh& mesh, Sampling sampling) {
  std::vector<Vec> out;
  out.reserve(mesh.N);
  for (int i = 0; i < mesh.N; ++i)
    out.push_back(control(sampling == Sampling::kRightEndpoint ? mesh.node(i + 1) : mesh.node(i)));
  return out;
}

Trajectory simulate(const SweepingProblem& problem, const std::vector<Vec>& controls, const Vec& final_control,
                    const Mesh& mesh, Scheme scheme) {
  if (static_cast<int>(controls.size()) != mesh.N)
    throw Error(ErrorCode::kInvalidArgument, "control count does not match the mesh");
  if (!(mesh.h >= kMinStep)) throw Error(ErrorCode::kInvalidArgument, "mesh step below 1e-12");
  Trajectory tr;
  tr.t = mesh.nodes();
  tr.x.reserve(mesh.N + 1);
  tr.x.push_back(problem.x0);
  for (int i = 0; i < mesh.N; ++i) {
    const Vec& x = tr.x.back();
    const Vec& u = controls[i];
    try {
      Vec g = problem.g(x, u);
      if (g.norm() > 1e3 * (1.0 + x.norm())) tr.growth_warning = true;
      Vec next;
      if (scheme == Scheme::kCatchingUp) {
        next = catching_up_step(x, u, mesh.h, problem);
      } else {
        Vec v = right_velocity(x, u, problem).velocity;
        next = project_polyhedron(x + mesh.h * v, problem.C);
      }
      tr.velocity.push_back((next - x) / mesh.h);
      tr.x.push_back(std::move(next));
    } catch (const Error& e) {
      throw at_node(e, i);
    }
  }
  tr.u = controls;
  tr.u.push_back(final_control);
  tr.eta.reserve(mesh.N + 1);
  for (int i = 0; i <= mesh.N; ++i) {
    try {
      tr.eta.push_back(right_velocity(tr.x[i], tr.u[i], problem).eta);
    } catch (const Error& e) {
      throw at_node(e, i);
    }
  }
  return tr;
}

Trajectory integrate(const SweepingProblem& problem, const BVControl& control, const Mesh& mesh, Scheme scheme,
                     Sampling sampling) {
  return simulate(problem, sample_control(control, mesh, sampling), control(mesh.T), mesh, scheme);
}

EtaFit fit_eta(const std::vector<Vec>& states, const std::vector<Vec>& controls, const Vec& final_control,
               double h, const SweepingProblem& problem) {
  const int N = static_cast<int>(controls.size());
  if (static_cast<int>(states.size()) != N + 1)
    throw Error(ErrorCode::kInvalidArgument, "fit_eta: need N+1 states for N controls");
  const int s = problem.s();
  EtaFit out;
  out.eta.reserve(N + 1);
  for (int i = 0; i < N; ++i) {
    const Vec& x = states[i];
    ActiveSet act;
    try {
      act = active_set(x, problem.C);
    } catch (const Error& e) {
      throw at_node(e, i);
    }
    Vec g = problem.g(x, controls[i]);
    Vec target = -(states[i + 1] - x) / h + g;
    Vec eta = Vec::Zero(s);
    double res = target.norm();
    if (!act.empty()) {
      Mat A = select_rows(problem.C.generators(), act.indices).transpose();
      NnlsSolution sol = nnls(A, target, 1e-14 * (1.0 + target.norm()));
      for (size_t c = 0; c < act.indices.size(); ++c) eta(act.indices[c]) = sol.x(c);
      res = sol.residual_norm;
    }
    if (res > 1e-6 * (1.0 + g.norm())) {
      std::ostringstream os;
      os << "interval " << i << ": residual " << res << " is not a sweeping step";
      throw Error(ErrorCode::kFitResidualTooLarge, os.str());
    }
    out.max_residual = std::max(out.max_residual, res);
    out.eta.push_back(std::move(eta));
  }
  out.eta.push_back(right_velocity(states[N], final_control, problem).eta);
  return out;
}

EtaFit extract_eta(const Trajectory& traj, const SweepingProblem& problem) {
  const int N = traj.intervals();
  std::vector<Vec> controls(traj.u.begin(), traj.u.begin() + N);
  return fit_eta(traj.x, controls, traj.u.back(), traj.h(), problem);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path);
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  if (traj.x.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  const auto n = traj.x.front().size(), d = traj.u.front().size(), s = traj.eta.front().size();
  std::string out = "t";
  for (Eigen::Index k = 1; k <= n; ++k) out += ",x_" + std::to_string(k);
  for (Eigen::Index k = 1; k <= d; ++k) out += ",u_" + std::to_string(k);
  for (Eigen::Index k = 1; k <= s; ++k) out += ",eta_" + std::to_string(k);
  out += '\n';
  for (size_t i = 0; i < traj.t.size(); ++i) {
    out += fmt(traj.t[i]);
    for (Eigen::Index k = 0; k < n; ++k) out += "," + fmt(traj.x[i](k));
    for (Eigen::Index k = 0; k < d; ++k) out += "," + fmt(traj.u[i](k));
    for (Eigen::Index k = 0; k < s; ++k) out += "," + fmt(traj.eta[i](k));
    out += '\n';
  }
  write_file_atomic(path, out);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, path + ":1: empty file");
  int n = 0, d = 0, s = 0;
  {
    std::stringstream ss(line);
    std::string col;
    int c = 0;
    while (std::getline(ss, col, ',')) {
      if (c == 0 && col != "t") throw Error(ErrorCode::kParseError, path + ":1: first column must be t");
      if (col.rfind("x_", 0) == 0) ++n;
      else if (col.rfind("u_", 0) == 0) ++d;
      else if (col.rfind("eta_", 0) == 0) ++s;
      ++c;
    }
    if (c != 1 + n + d + s || n == 0) throw Error(ErrorCode::kParseError, path + ":1: unexpected header");
  }
  Trajectory tr;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != 1 + n + d + s)
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(lineno) + ": wrong column count");
    tr.t.push_back(vals[0]);
    tr.x.push_back(Eigen::Map<Vec>(vals.data() + 1, n));
    tr.u.push_back(Eigen::Map<Vec>(vals.data() + 1 + n, d));
    tr.eta.push_back(Eigen::Map<Vec>(vals.data() + 1 + n + d, s));
  }
  if (tr.t.size() < 2) throw Error(ErrorCode::kParseError, path + ": need at least two rows");
  for (size_t i = 0; i + 1 < tr.t.size(); ++i)
    tr.velocity.push_back((tr.x[i + 1] - tr.x[i]) / (tr.t[i + 1] - tr.t[i]));
  return tr;
}

}  // namespace sweep
