#include "sweep/certificate.hpp"

namespace sweep {

void Certificate::validate(int n, int d, int s) const {
  auto need = [](const Vec& v, int k, const char* what) {
    if (v.size() != k) throw Error(ErrorCode::kInvalidArgument, std::string("certificate field ") + what + " has wrong size");
  };
  need(p, n, "p");
  need(q, n, "q");
  need(psi, d, "psi");
  need(eta, s, "eta");
  need(eta_T, s, "eta_T");
  need(gamma, s, "gamma");
  for (const auto& [t, m] : atoms) need(m, n, "atom mass");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "certificate lambda must be nonnegative");
}

DualBundle discretize_certificate(const Certificate& cert, const DiscretePair& pair, const DiscreteProblem& dp) {
  const SweepingProblem& P = dp.problem();
  cert.validate(P.n(), P.d(), P.s());
  const int N = dp.mesh().N;
  const double h = dp.mesh().h;
  DualBundle B;
  B.lambda = cert.lambda;
  B.p.assign(N + 1, cert.q);
  B.p[N] = cert.p;
  B.eta.assign(N + 1, cert.eta);
  B.eta[N] = cert.eta_T;
  B.gamma.assign(N, cert.gamma);
  B.psi.assign(N, h * cert.psi);
  for (int i = 0; i < N; ++i) {
    B.theta_y.push_back(dp.theta_y(i, (pair.x[i + 1] - pair.x[i]) / h));
    B.theta_u.push_back(dp.theta_u(i, pair.u[i]));
  }
  return B;
}

ContinuousDuals sample_certificate(const Certificate& cert, const Mesh& mesh, const Polyhedron& C) {
  cert.validate(C.dim(), static_cast<int>(cert.psi.size()), C.count());
  ContinuousDuals D;
  D.lambda = cert.lambda;
  D.t = mesh.nodes();
  D.p.assign(mesh.N + 1, cert.p);
  D.q.assign(mesh.N + 1, cert.q);
  D.psi.assign(mesh.N + 1, cert.psi);
  D.eta.assign(mesh.N + 1, cert.eta);
  D.eta[mesh.N] = cert.eta_T;
  Vec density = C.generators().transpose() * cert.gamma;
  for (int i = 0; i < mesh.N; ++i) D.gamma.push_back({mesh.node(i), mesh.node(i + 1), mesh.h * density});
  for (const auto& [t, m] : cert.atoms) {
    D.gamma.push_back({t, t, m});
    D.exceptional.push_back(t);
  }
  return D;
}

}  // namespace sweep
