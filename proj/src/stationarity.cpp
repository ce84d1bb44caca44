#include "sweep/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sweep/qp.hpp"

namespace sweep {

namespace {

// min |M y - r|^2 + tau |y|^2 with y_k >= 0 unless free[k]; free variables are split in two.
Vec signed_lsq(const Mat& M, const Vec& r, const std::vector<bool>& free, double tau, double* resid) {
  const auto k = M.cols();
  Vec y = Vec::Zero(k);
  if (resid) *resid = r.norm();
  if (k == 0 || M.rows() == 0) return y;
  int nfree = static_cast<int>(std::count(free.begin(), free.end(), true));
  Mat A = Mat::Zero(M.rows() + k + nfree, k + nfree);
  Vec b = Vec::Zero(M.rows() + k + nfree);
  b.head(M.rows()) = r;
  A.topLeftCorner(M.rows(), k) = M;
  const double st = std::sqrt(tau);
  int extra = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    A(M.rows() + c, c) = st;
    if (free[c]) {
      A.block(0, k + extra, M.rows(), 1) = -M.col(c);
      A(M.rows() + k + extra, k + extra) = st;
      ++extra;
    }
  }
  NnlsSolution sol = nnls(A, b, 1e-14 * (1.0 + b.norm()));
  extra = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    y(c) = sol.x(c);
    if (free[c]) y(c) -= sol.x(k + extra++);
  }
  if (resid) *resid = (M * y - r).norm();
  return y;
}

void add(ResidualReport& rep, const std::string& name, double residual, double tol) {
  rep.conditions.push_back({name, residual, tol, residual <= tol});
}

double eta_threshold(const std::vector<Vec>& eta, double rel) {
  double mx = 0.0;
  for (const auto& e : eta) mx = std::max(mx, e.size() ? e.maxCoeff() : 0.0);
  return rel * (1.0 + mx);
}

void require_licq(const Vec& x, const Polyhedron& C, const std::string& where) {
  if (!licq(x, C)) throw Error(ErrorCode::kLicqViolated, "active generators dependent at " + where);
}

}  // namespace

// ---------------------------------------------------------------- coderivative

IndexSplit index_split(const Vec& x, const Vec& w, const Polyhedron& C, double tol) {
  ActiveSet act = active_set(x, C, tol);
  IndexSplit out;
  for (int j : act.indices) {
    double r = C.generators().row(j).dot(w) - C.offsets()(j);
    if (std::abs(r) <= tol) out.I0.push_back(j);
    else if (r > tol) out.Ipos.push_back(j);
    else out.rest.push_back(j);
  }
  return out;
}

bool coderivative_domain_check(const Vec& x, const Vec& u, const Vec& omega, const Vec& w,
                               const SweepingProblem& problem, double tol) {
  require_licq(x, problem.C, "x");
  ActiveSet act = active_set(x, problem.C);
  Vec v = omega + problem.g(x, u);
  if (act.empty()) return v.norm() <= tol;
  Mat A = select_rows(problem.C.generators(), act.indices);
  NnlsSolution sol = nnls(A.transpose(), v, 1e-14 * (1.0 + v.norm()));
  if (sol.residual_norm > tol) return false;
  for (size_t c = 0; c < act.indices.size(); ++c) {
    if (sol.x(c) <= tol) continue;
    int j = act.indices[c];
    if (std::abs(problem.C.generators().row(j).dot(w) - problem.C.offsets()(j)) > tol) return false;
  }
  return true;
}

bool coderivative_membership(const Vec& x, const Vec& u, const Vec& omega, const Vec& w, const Vec& zx,
                             const Vec& zu, const SweepingProblem& problem, double tol) {
  if (!coderivative_domain_check(x, u, omega, w, problem, tol)) return false;
  Mat Ju = problem.g.jacobian_u(x, u), Jx = problem.g.jacobian_x(x, u);
  if ((zu + Ju.transpose() * w).norm() > tol) return false;
  Vec r = zx + Jx.transpose() * w;
  IndexSplit sp = index_split(x, w, problem.C);
  std::vector<int> idx = sp.I0;
  idx.insert(idx.end(), sp.Ipos.begin(), sp.Ipos.end());
  if (idx.empty()) return r.norm() <= tol;
  Mat M = select_rows(problem.C.generators(), idx).transpose();
  std::vector<bool> free(idx.size(), false);
  std::fill(free.begin(), free.begin() + static_cast<long>(sp.I0.size()), true);
  double res = 0.0;
  signed_lsq(M, r, free, 0.0, &res);
  return res <= tol;
}

// ---------------------------------------------------------------- bundles

double DualBundle::scale(const Polyhedron& C, double h) const {
  double s = lambda + p.back().norm() + p.front().norm();
  for (const auto& g : gamma) s += (h * C.generators().transpose() * g).norm();
  for (const auto& v : psi) s += v.norm();
  return s;
}

DualBundle normalize_bundle(const DualBundle& b, const Polyhedron& C, double h) {
  double s = b.scale(C, h);
  if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cannot normalize a zero bundle");
  DualBundle out = b;
  out.lambda /= s;
  // theta is data and eta^0..eta^{N-1} are primal reactions; only the terminal eta is a multiplier
  for (auto* field : {&out.p, &out.gamma, &out.psi})
    for (auto& v : *field) v /= s;
  out.xi() /= s;
  out.normalization = Normalization::kUnitSum;
  return out;
}

Recovery recover_discrete_duals(const DiscretePair& pair, const DiscreteProblem& dp, double lambda) {
  const SweepingProblem& P = dp.problem();
  const Mesh& mesh = dp.mesh();
  const int N = mesh.N, n = P.n(), s = P.s();
  const double h = mesh.h;
  if (pair.N() != N || static_cast<int>(pair.x.size()) != N + 1)
    throw Error(ErrorCode::kInvalidArgument, "pair does not match the mesh");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be nonnegative");
  const Mat& G = P.C.generators();
  const Vec& c = P.C.offsets();
  for (int i = 0; i <= N; ++i) require_licq(pair.x[i], P.C, "node " + std::to_string(i));

  EtaFit fit = fit_eta(pair.x, pair.u, pair.u.back(), h, P);
  Recovery rec;
  DualBundle& B = rec.bundle;
  B.lambda = lambda;
  B.eta = fit.eta;
  B.p.assign(N + 1, Vec::Zero(n));
  B.gamma.assign(N, Vec::Zero(s));
  B.psi.assign(N, Vec::Zero(P.d()));
  for (int i = 0; i < N; ++i) {
    Vec v = (pair.x[i + 1] - pair.x[i]) / h;
    B.theta_y.push_back(dp.theta_y(i, v));
    B.theta_u.push_back(dp.theta_u(i, pair.u[i]));
  }
  const double thr = eta_threshold(std::vector<Vec>(fit.eta.begin(), fit.eta.end() - 1), 1e-6);
  double worst = fit.max_residual;

  // Rows asking interval k to satisfy dual complementarity and the interior part of psi in N(u;U),
  // when p^{k+1} = base + D y.
  auto target_rows = [&](int k, const Vec& base, const Mat& D, Mat& M, Vec& r) {
    Vec w0 = base - lambda * B.theta_y[k] / h;
    Mat Ju = P.g.jacobian_u(pair.x[k], pair.u[k]);
    Mat Z = P.U.free_directions(pair.u[k]);
    std::vector<int> pos;
    for (int j = 0; j < s; ++j)
      if (B.eta[k](j) > thr) pos.push_back(j);
    M.resize(static_cast<Eigen::Index>(pos.size()) + Z.rows(), D.cols());
    r.resize(M.rows());
    for (size_t q = 0; q < pos.size(); ++q) {
      M.row(q) = G.row(pos[q]) * D;
      r(q) = c(pos[q]) - G.row(pos[q]).dot(w0);
    }
    if (Z.rows() > 0) {
      // psi/h = -lambda theta_u / h + Ju^T w
      M.bottomRows(Z.rows()) = Z * Ju.transpose() * D;
      r.tail(Z.rows()) = -Z * (-lambda * B.theta_u[k] / h + Ju.transpose() * w0);
    }
  };

  // terminal multipliers
  {
    ActiveSet act = active_set(pair.x[N], P.C);
    Vec base = -lambda * P.phi.gradient(pair.x[N]);
    Mat A = select_rows(G, act.indices);
    Mat D = -A.transpose();
    Mat M;
    Vec r;
    target_rows(N - 1, base, D, M, r);
    if (lambda == 0.0 && !act.empty()) {
      M.conservativeResize(M.rows() + 1, Eigen::NoChange);
      r.conservativeResize(r.size() + 1);
      M.row(M.rows() - 1).setOnes();
      r(r.size() - 1) = 1.0;
    }
    double res = 0.0;
    Vec xi = signed_lsq(M, r, std::vector<bool>(act.indices.size(), false), 1e-14, &res);
    worst = std::max(worst, res);
    Vec full = Vec::Zero(s);
    for (size_t q = 0; q < act.indices.size(); ++q) full(act.indices[q]) = xi(q);
    B.eta[N] = full;
    B.p[N] = base + D * xi;
  }

  // backward sweep
  for (int i = N - 1; i >= 0; --i) {
    Vec w = B.p[i + 1] - lambda * B.theta_y[i] / h;
    Mat Jx = P.g.jacobian_x(pair.x[i], pair.u[i]);
    Mat Ju = P.g.jacobian_u(pair.x[i], pair.u[i]);
    Vec base = B.p[i + 1] + h * Jx.transpose() * w;
    IndexSplit sp = index_split(pair.x[i], w, P.C);
    std::vector<int> idx = sp.I0;
    idx.insert(idx.end(), sp.Ipos.begin(), sp.Ipos.end());
    Vec gam = Vec::Zero(static_cast<Eigen::Index>(idx.size()));
    Mat D = -h * select_rows(G, idx).transpose();
    if (i > 0 && !idx.empty()) {
      Mat M;
      Vec r;
      target_rows(i - 1, base, D, M, r);
      std::vector<bool> free(idx.size(), false);
      std::fill(free.begin(), free.begin() + static_cast<long>(sp.I0.size()), true);
      double res = 0.0;
      gam = signed_lsq(M, r, free, 1e-14, &res);
      worst = std::max(worst, res);
    }
    for (size_t q = 0; q < idx.size(); ++q) B.gamma[i](idx[q]) = gam(q);
    B.p[i] = base + D * gam;
    B.psi[i] = -lambda * B.theta_u[i] + h * Ju.transpose() * w;
    if (!B.p[i].allFinite() || B.p[i].norm() > 1e6)
      throw Error(ErrorCode::kRecoveryDiverged, "adjoint norm exceeds 1e6 at node " + std::to_string(i));
  }
  rec.fit_residual = worst;
  return rec;
}

// ---------------------------------------------------------------- reports

const Condition* ResidualReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

double ResidualReport::max_residual() const {
  double m = 0.0;
  for (const auto& c : conditions) m = std::max(m, c.residual);
  return m;
}

std::string ResidualReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  nlohmann::ordered_json conds = nlohmann::ordered_json::object();
  for (const auto& c : conditions) conds[c.name] = {{"residual", c.residual}, {"tol", c.tol}, {"pass", c.pass}};
  j["conditions"] = conds;
  j["verdict"] = verdict ? "pass" : "fail";
  j["nontriviality"] = nontriviality;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

namespace {

void finish(ResidualReport& rep, double nontrivial_tol) {
  bool all = std::all_of(rep.conditions.begin(), rep.conditions.end(), [](const Condition& c) { return c.pass; });
  rep.verdict = all && rep.nontriviality > nontrivial_tol;
}

}  // namespace

ResidualReport check_discrete(const DiscretePair& pair, const DiscreteProblem& dp, const DualBundle& B,
                              const CheckTolerances& tols) {
  const SweepingProblem& P = dp.problem();
  const int N = dp.mesh().N, s = P.s();
  const double h = dp.mesh().h;
  const Mat& G = P.C.generators();
  const Vec& c = P.C.offsets();
  ResidualReport rep;
  if (pair.N() != N || B.N() != N || static_cast<int>(B.p.size()) != N + 1 ||
      static_cast<int>(B.eta.size()) != N + 1 || static_cast<int>(B.psi.size()) != N ||
      static_cast<int>(B.theta_y.size()) != N || static_cast<int>(B.theta_u.size()) != N) {
    rep.notes.push_back("shape mismatch between pair, mesh and bundle");
    add(rep, "shapes", 1.0, 0.0);
    finish(rep, tols.nontrivial);
    return rep;
  }
  const double tol = tols.residual;
  const double thr = eta_threshold(B.eta, tols.positivity);
  double primal = 0, adjoint = 0, psi_eq = 0, psi_nc = 0, eta_c = 0, gamma_sign = 0, gamma_inact = 0;
  double dual_c = 0, theta = 0, eta_neg = 0;
  bool flagged_offset = false;
  bool full_rank = true;

  for (int i = 0; i < N; ++i) {
    const Vec& x = pair.x[i];
    const Vec& u = pair.u[i];
    Vec v = (pair.x[i + 1] - x) / h;
    Vec r = P.C.residuals(x);
    Mat Jx = P.g.jacobian_x(x, u), Ju = P.g.jacobian_u(x, u);
    if (Ju.fullPivLu().rank() < std::min(Ju.rows(), Ju.cols())) full_rank = false;
    Vec w = B.p[i + 1] - B.lambda * B.theta_y[i] / h;

    primal = std::max(primal, (-v + P.g(x, u) - G.transpose() * B.eta[i]).norm());
    adjoint = std::max(adjoint,
                       ((B.p[i + 1] - B.p[i]) / h + Jx.transpose() * w - G.transpose() * B.gamma[i]).norm());
    psi_eq = std::max(psi_eq, (-B.lambda * B.theta_u[i] / h - B.psi[i] / h + Ju.transpose() * w).norm());
    psi_nc = std::max(psi_nc, P.U.normal_cone_residual(u, B.psi[i]));

    IndexSplit sp = index_split(x, w, P.C, tols.activity);
    for (int j = 0; j < s; ++j) {
      bool inactive = r(j) < -tols.activity;
      bool in0 = std::find(sp.I0.begin(), sp.I0.end(), j) != sp.I0.end();
      bool inpos = std::find(sp.Ipos.begin(), sp.Ipos.end(), j) != sp.Ipos.end();
      if (inactive) {
        eta_c = std::max(eta_c, std::abs(B.eta[i](j)));
        gamma_inact = std::max(gamma_inact, std::abs(B.gamma[i](j)));
      }
      if (inpos) gamma_sign = std::max(gamma_sign, std::max(0.0, -B.gamma[i](j)));
      else if (!in0) gamma_sign = std::max(gamma_sign, std::abs(B.gamma[i](j)));
      if (B.eta[i](j) > thr) {
        dual_c = std::max(dual_c, std::abs(G.row(j).dot(w) - c(j)));
        if (c(j) != 0.0) flagged_offset = true;
      }
    }
    theta = std::max(theta, (B.theta_y[i] - dp.theta_y(i, v)).norm());
    theta = std::max(theta, (B.theta_u[i] - dp.theta_u(i, u)).norm());
  }
  double eta_final = 0.0;
  {
    Vec r = P.C.residuals(pair.x[N]);
    for (int j = 0; j < s; ++j)
      if (r(j) < -tols.activity) eta_final = std::max(eta_final, std::abs(B.eta[N](j)));
  }
  for (const auto& e : B.eta) eta_neg = std::max(eta_neg, std::max(0.0, -e.minCoeff()));
  eta_neg = std::max(eta_neg, std::max(0.0, -B.lambda));
  Vec trans = B.p[N] + B.lambda * P.phi.gradient(pair.x[N]) + G.transpose() * B.xi();

  add(rep, "primal", primal, tol);
  add(rep, "adjoint", adjoint, tol);
  add(rep, "psi_equation", psi_eq, tol);
  add(rep, "psi_normal_cone", psi_nc, tol);
  add(rep, "transversality", trans.norm(), tol);
  add(rep, "eta_complementarity", eta_c, tol);
  add(rep, "eta_final_complementarity", eta_final, tol);
  add(rep, "gamma_sign", gamma_sign, tol);
  add(rep, "gamma_inactive", gamma_inact, tol);
  add(rep, "multiplier_sign", eta_neg, tol);
  add(rep, "dual_complementarity", dual_c, tol);
  add(rep, "theta_consistency", theta, tol);
  double norm_res = B.normalization == Normalization::kUnitLambda
                        ? (B.lambda > 0.0 ? std::abs(B.lambda - 1.0) : 0.0)
                        : std::abs(B.scale(P.C, h) - 1.0);
  add(rep, "normalization", norm_res, tol);

  double ntc = B.lambda + B.xi().norm();
  for (int i = 0; i < N; ++i) ntc += B.p[i].norm() + B.psi[i].norm();
  add(rep, "nontriviality", ntc > tols.nontrivial ? 0.0 : tols.nontrivial - ntc, 0.0);
  if (full_rank) {
    double entc = B.lambda + B.p[0].norm();
    for (const auto& v : B.psi) entc += v.norm();
    add(rep, "enhanced_nontriviality", entc > tols.nontrivial ? 0.0 : tols.nontrivial - entc, 0.0);
  } else {
    rep.notes.push_back("control Jacobian rank deficient; enhanced nontriviality not checked");
  }
  if (flagged_offset)
    rep.notes.push_back("dual complementarity compares <a_j, w> with a nonzero offset c_j as printed; audit");
  rep.nontriviality = B.lambda + B.p[N].norm() + B.p[0].norm();
  finish(rep, tols.nontrivial);
  return rep;
}

// ---------------------------------------------------------------- continuous time

Vec ContinuousDuals::tail_mass(double t, int n) const {
  Vec m = Vec::Zero(n);
  for (const auto& g : gamma) {
    if (g.atom()) {
      if (g.a > t) m += g.mass;
    } else if (g.a >= t) {
      m += g.mass;
    } else if (g.b > t) {
      m += g.mass * ((g.b - t) / (g.b - g.a));
    }
  }
  return m;
}

double ContinuousDuals::scale() const {
  double s = lambda + p.back().norm() + q.front().norm();
  for (const auto& g : gamma) s += g.mass.norm();
  for (size_t i = 0; i + 1 < t.size(); ++i) s += (t[i + 1] - t[i]) * psi[i].norm();
  return s;
}

ContinuousDuals assemble_limit(const std::vector<DualBundle>& bundles, const std::vector<Mesh>& meshes,
                               const Polyhedron& C) {
  if (bundles.size() < 2 || bundles.size() != meshes.size())
    throw Error(ErrorCode::kInvalidArgument, "assemble_limit needs at least two levels with meshes");
  const int n = C.dim();
  const Mat Gt = C.generators().transpose();
  std::vector<DualBundle> nb;
  for (size_t L = 0; L < bundles.size(); ++L) {
    if (bundles[L].N() != meshes[L].N) throw Error(ErrorCode::kInvalidArgument, "bundle/mesh size mismatch");
    nb.push_back(normalize_bundle(bundles[L], C, meshes[L].h));
  }
  auto masses = [&](size_t L) {
    std::vector<Vec> m;
    for (const auto& g : nb[L].gamma) m.push_back(meshes[L].h * Gt * g);
    return m;
  };

  ContinuousDuals out;
  out.normalization = Normalization::kUnitSum;
  // level-to-level differences at shared nodes
  for (size_t L = 1; L < nb.size(); ++L) {
    const Mesh& mc = meshes[L - 1];
    const Mesh& mf = meshes[L];
    if (mf.N % mc.N != 0) throw Error(ErrorCode::kInvalidArgument, "meshes are not nested");
    const int r = mf.N / mc.N;
    std::vector<Vec> Mc = masses(L - 1), Mf = masses(L);
    Vec tail_c = Vec::Zero(n), tail_f = Vec::Zero(n);
    double diff = std::abs(nb[L].lambda - nb[L - 1].lambda);
    for (int k = mc.N; k >= 0; --k) {
      diff = std::max(diff, (nb[L].p[k * r] - nb[L - 1].p[k]).norm());
      diff = std::max(diff, (tail_f - tail_c).norm());
      if (k > 0) {
        tail_c += Mc[k - 1];
        for (int q = 0; q < r; ++q) tail_f += Mf[(k - 1) * r + q];
      }
    }
    out.cauchy.push_back(diff);
  }
  if (out.cauchy.size() >= 2) {
    double last = out.cauchy.back(), prev = out.cauchy[out.cauchy.size() - 2];
    if (last > prev * (1.0 + 1e-9) && last > 1e-12)
      throw Error(ErrorCode::kNotConverging, "level differences grow between the last two levels");
  }

  const DualBundle& F = nb.back();
  const Mesh& mf = meshes.back();
  const Mesh& mc = meshes[meshes.size() - 2];
  const int r = mf.N / mc.N;
  std::vector<Vec> Mf = masses(nb.size() - 1), Mc = masses(nb.size() - 2);
  out.lambda = F.lambda;
  out.t = mf.nodes();
  for (int i = 0; i < mf.N; ++i) out.gamma.push_back({mf.node(i), mf.node(i + 1), Mf[i]});
  // atoms: a coarse interval whose mass does not spread over its children
  for (int k = 0; k < mc.N; ++k) {
    double coarse = Mc[k].norm();
    if (coarse <= 1e-10) continue;
    int arg = k * r;
    for (int q = 1; q < r; ++q)
      if (Mf[k * r + q].norm() > Mf[arg].norm()) arg = k * r + q;
    if (Mf[arg].norm() > 0.75 * coarse) {
      GammaPiece& g = out.gamma[arg];
      g.a = g.b;
      out.exceptional.push_back(g.b);
    }
  }
  for (int i = 0; i <= mf.N; ++i) {
    out.q.push_back(F.p[i]);
    out.p.push_back(F.p[i] + out.tail_mass(mf.node(i), n));
    out.eta.push_back(F.eta[i]);
    out.psi.push_back(i < mf.N ? Vec(F.psi[i] / mf.h) : Vec(F.psi.back() / mf.h));
  }
  return out;
}

ResidualReport check_continuous(const Trajectory& traj, const ContinuousDuals& D, const SweepingProblem& P,
                                const CheckTolerances& tols) {
  const int N = traj.intervals(), n = P.n(), s = P.s();
  const Mat& G = P.C.generators();
  const Vec& c = P.C.offsets();
  ResidualReport rep;
  if (static_cast<int>(D.t.size()) != N + 1 || static_cast<int>(D.p.size()) != N + 1 ||
      static_cast<int>(D.q.size()) != N + 1 || static_cast<int>(D.psi.size()) != N + 1 ||
      static_cast<int>(D.eta.size()) != N + 1) {
    rep.notes.push_back("multipliers are not sampled on the trajectory mesh");
    add(rep, "shapes", 1.0, 0.0);
    finish(rep, tols.nontrivial);
    return rep;
  }
  auto exceptional = [&](double t) {
    return std::any_of(D.exceptional.begin(), D.exceptional.end(),
                       [&](double e) { return std::abs(e - t) <= 1e-12 * (1.0 + std::abs(t)); });
  };
  const double tol = tols.residual;
  const double thr = eta_threshold(D.eta, tols.positivity);
  double primal = 0, adjoint = 0, qpg = 0, psi_def = 0, psi_nc = 0, maxim = 0, comp1 = 0, comp2 = 0, eta_neg = 0;
  bool flagged_offset = false;

  for (int i = 0; i <= N; ++i) {
    const Vec& x = traj.x[i];
    const Vec& u = traj.u[i];
    Vec r = P.C.residuals(x);
    if (!exceptional(D.t[i])) qpg = std::max(qpg, (D.q[i] - D.p[i] + D.tail_mass(D.t[i], n)).norm());
    eta_neg = std::max(eta_neg, std::max(0.0, -D.eta[i].minCoeff()));
    const Vec& qside = i < N ? D.q[i + 1] : D.q[N];
    for (int j = 0; j < s; ++j) {
      if (r(j) < -tols.activity) comp1 = std::max(comp1, std::abs(D.eta[i](j)));
      if (D.eta[i](j) > thr) {
        comp2 = std::max(comp2, std::abs(G.row(j).dot(qside) - c(j)));
        if (c(j) != 0.0) flagged_offset = true;
      }
    }
    Mat Ju = P.g.jacobian_u(x, u);
    if (!exceptional(i < N ? D.t[i + 1] : D.t[N]))
      psi_def = std::max(psi_def, (D.psi[i] - Ju.transpose() * qside).norm());
    psi_nc = std::max(psi_nc, P.U.normal_cone_residual(u, D.psi[i]));
    if (P.U.convex()) maxim = std::max(maxim, P.U.support(D.psi[i]) - D.psi[i].dot(u));
    if (i == N) break;
    const double h = D.t[i + 1] - D.t[i];
    Mat Jx = P.g.jacobian_x(x, u);
    primal = std::max(primal, (traj.velocity[i] + G.transpose() * D.eta[i] - P.g(x, u)).norm());
    adjoint = std::max(adjoint, ((D.p[i + 1] - D.p[i]) / h + Jx.transpose() * D.q[i + 1]).norm());
  }
  eta_neg = std::max(eta_neg, std::max(0.0, -D.lambda));

  // terminal conditions
  ActiveSet actT = active_set(traj.x[N], P.C);
  Vec react = Vec::Zero(n);
  double cone = 0.0;
  for (int j = 0; j < s; ++j) {
    if (actT.contains(j)) react += D.eta[N](j) * G.row(j).transpose();
    else cone = std::max(cone, std::abs(D.eta[N](j)));
    cone = std::max(cone, std::max(0.0, -D.eta[N](j)));
  }
  Vec trans = -D.p[N] - react - D.lambda * P.phi.gradient(traj.x[N]);

  // gamma must vanish near times where every constraint is slack
  double nonatomic = 0.0;
  std::vector<bool> slack(N + 1);
  for (int i = 0; i <= N; ++i) slack[i] = P.C.residuals(traj.x[i]).maxCoeff() < -tols.activity;
  for (const auto& g : D.gamma) {
    auto node_of = [&](double t) {
      auto it = std::lower_bound(D.t.begin(), D.t.end(), t - 1e-12);
      return static_cast<int>(it - D.t.begin());
    };
    int ia = node_of(g.a), ib = node_of(g.b);
    bool inside;
    if (g.atom()) inside = ia < N && slack[ia];
    else inside = ib < N && slack[ia] && slack[ib];
    if (inside) nonatomic = std::max(nonatomic, g.mass.norm());
  }

  add(rep, "primal", primal, tol);
  add(rep, "adjoint_ode", adjoint, tol);
  add(rep, "q_p_gamma", qpg, tol);
  add(rep, "psi_definition", psi_def, tol);
  add(rep, "psi_normal_cone", psi_nc, tol);
  if (P.U.convex()) add(rep, "maximization", maxim, tol);
  add(rep, "complementarity_inactive", comp1, tol);
  add(rep, "complementarity_dual", comp2, tol);
  add(rep, "transversality", trans.norm(), tol);
  add(rep, "transversality_cone", cone, tol);
  add(rep, "multiplier_sign", eta_neg, tol);
  add(rep, "nonatomicity", nonatomic, tol);
  double norm_res = D.normalization == Normalization::kUnitLambda
                        ? (D.lambda > 0.0 ? std::abs(D.lambda - 1.0) : 0.0)
                        : std::abs(D.scale() - 1.0);
  add(rep, "normalization", norm_res, tol);

  rep.nontriviality = D.lambda + D.p[N].norm() + D.q[0].norm();
  add(rep, "nontriviality", rep.nontriviality > tols.nontrivial ? 0.0 : tols.nontrivial - rep.nontriviality, 0.0);
  if (P.C.residuals(P.x0).maxCoeff() < -tols.activity) {
    double enh = D.lambda + D.p[N].norm();
    add(rep, "enhanced_nontriviality", enh > tols.nontrivial ? 0.0 : tols.nontrivial - enh, 0.0);
  }
  if (flagged_offset)
    rep.notes.push_back("dual complementarity compares <a_j, q> with a nonzero offset c_j as printed; audit");
  finish(rep, tols.nontrivial);
  return rep;
}

}  // namespace sweep
