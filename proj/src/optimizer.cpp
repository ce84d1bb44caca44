#include "sweep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

namespace sweep {

namespace {

using Controls = std::vector<Vec>;

// Objective evaluation that reuses a known prefix of states.
class Evaluator {
 public:
  explicit Evaluator(const DiscreteProblem& dp) : dp_(dp), P_(dp.problem()), h_(dp.mesh().h), N_(dp.mesh().N) {}

  double full(const Controls& u, std::vector<Vec>* states = nullptr) const {
    std::vector<Vec> x = dp_.states(u);
    double J = P_.phi(x.back()) + tracking(x, u, 0);
    if (states) *states = std::move(x);
    return J;
  }

  /// Objective after changing only u[i] to v, given states of the unchanged control and
  /// the tracking sum over intervals before i.
  double from(int i, const Vec& v, const Controls& u, const std::vector<Vec>& x, double prefix) const {
    Vec cur = x[i];
    double J = prefix;
    for (int k = i; k < N_; ++k) {
      const Vec& uk = k == i ? v : u[k];
      Vec next = catching_up_step(cur, uk, h_, P_);
      J += dp_.interval_tracking(k, (next - cur) / h_, uk);
      cur = std::move(next);
    }
    return J + P_.phi(cur);
  }

  std::vector<double> prefixes(const std::vector<Vec>& x, const Controls& u) const {
    std::vector<double> pre(N_ + 1, 0.0);
    for (int k = 0; k < N_; ++k) pre[k + 1] = pre[k] + dp_.interval_tracking(k, (x[k + 1] - x[k]) / h_, u[k]);
    return pre;
  }

 private:
  double tracking(const std::vector<Vec>& x, const Controls& u, int from) const {
    double t = 0.0;
    if (dp_.tracking_weight() == 0.0) return t;
    for (int k = from; k < N_; ++k) t += dp_.interval_tracking(k, (x[k + 1] - x[k]) / h_, u[k]);
    return t;
  }

  const DiscreteProblem& dp_;
  const SweepingProblem& P_;
  double h_;
  int N_;
};

double l2_norm(const Controls& u, double h) {
  double s = 0.0;
  for (const auto& v : u) s += v.squaredNorm();
  return std::sqrt(h * s);
}

struct StartOutcome {
  Controls u;
  std::vector<Vec> x;
  double J = 0.0;
  int iterations = 0;
  double kkt = 0.0;
  std::vector<double> history;
  bool stalled_at_start = false;
};

class Descent {
 public:
  Descent(const DiscreteProblem& dp, const SolveOptions& opts) : dp_(dp), opts_(opts), ev_(dp) {
    first_ = dp.pinned_first() ? 1 : 0;
  }

  StartOutcome run(Controls u) const {
    const ControlSet& U = dp_.problem().U;
    const double h = dp_.mesh().h;
    for (auto& v : u) v = U.project(v);
    if (dp_.pinned_first()) u[0] = *dp_.pinned_first();

    StartOutcome out;
    out.J = ev_.full(u, &out.x);
    out.history.push_back(out.J);
    for (int it = 0; it < opts_.max_iters; ++it) {
      Controls grad = gradient(u, out.x, out.J);  // already divided by h
      double pg = 0.0;
      for (size_t i = 0; i < u.size(); ++i) {
        Vec p = U.project(u[i] - grad[i]) - u[i];
        if (static_cast<int>(i) < first_) p.setZero();
        pg += p.squaredNorm();
      }
      out.kkt = std::sqrt(h * pg);
      if (out.kkt <= opts_.stop_tol) break;

      bool accepted = false;
      double alpha = opts_.step_size_init;
      for (int bt = 0; bt <= opts_.max_backtracks && !accepted; ++bt, alpha *= opts_.backtrack) {
        Controls cand = u;
        double decrease = 0.0;
        for (size_t i = first_; i < u.size(); ++i) {
          cand[i] = U.project(u[i] - alpha * grad[i]);
          decrease += h * grad[i].dot(cand[i] - u[i]);
        }
        std::vector<Vec> xs;
        double Jc = ev_.full(cand, &xs);
        if (Jc <= out.J + opts_.armijo_c * decrease && Jc < out.J) {
          u = std::move(cand);
          out.x = std::move(xs);
          out.J = Jc;
          accepted = true;
        }
      }
      if (!accepted) accepted = compass(u, out);
      if (!accepted) {
        if (it == 0) out.stalled_at_start = true;
        break;
      }
      out.iterations = it + 1;
      out.history.push_back(out.J);
    }
    out.u = std::move(u);
    return out;
  }

 private:
  Controls gradient(const Controls& u, const std::vector<Vec>& x, double J) const {
    const ControlSet& U = dp_.problem().U;
    const double h = dp_.mesh().h;
    std::vector<double> pre = ev_.prefixes(x, u);
    double uinf = 0.0;
    for (const auto& v : u) uinf = std::max(uinf, v.cwiseAbs().maxCoeff());
    const double eps = opts_.fd_epsilon * (1.0 + uinf);
    Controls g(u.size(), Vec::Zero(dp_.problem().d()));
    for (size_t i = first_; i < u.size(); ++i) {
      for (Eigen::Index k = 0; k < u[i].size(); ++k) {
        Vec v = u[i];
        double step = eps;
        v(k) += step;
        if (!U.contains(v, 0.0)) {
          v(k) = u[i](k) - eps;
          step = -eps;
        }
        double Jp = ev_.from(static_cast<int>(i), v, u, x, pre[i]);
        g[i](k) = (Jp - J) / step / h;
      }
    }
    return g;
  }

  // Coordinate pattern search; accepts the first strict improvement.
  bool compass(Controls& u, StartOutcome& out) const {
    const ControlSet& U = dp_.problem().U;
    double delta = 0.25;
    if (U.kind() == ControlSet::Kind::kBox) delta = 0.25 * (U.hi() - U.lo()).maxCoeff();
    else if (U.kind() == ControlSet::Kind::kBall) delta = 0.5 * U.radius();
    if (delta <= 0.0) return false;
    for (; delta > 1e-8; delta *= 0.5) {
      for (size_t i = first_; i < u.size(); ++i) {
        for (Eigen::Index k = 0; k < u[i].size(); ++k) {
          for (double sgn : {-1.0, 1.0}) {
            Controls cand = u;
            cand[i](k) += sgn * delta;
            cand[i] = U.project(cand[i]);
            if ((cand[i] - u[i]).norm() == 0.0) continue;
            std::vector<Vec> xs;
            double Jc = ev_.full(cand, &xs);
            if (Jc < out.J - 1e-15 * (1.0 + std::abs(out.J))) {
              u = std::move(cand);
              out.x = std::move(xs);
              out.J = Jc;
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  const DiscreteProblem& dp_;
  const SolveOptions& opts_;
  Evaluator ev_;
  int first_ = 0;
};

}  // namespace

std::vector<std::vector<Vec>> start_controls(const DiscreteProblem& dp, const SolveOptions& opts) {
  const int N = dp.mesh().N;
  const ControlSet& U = dp.problem().U;
  std::vector<Controls> starts;
  for (const auto& s : opts.seed_controls) {
    if (static_cast<int>(s.size()) != N) throw Error(ErrorCode::kInvalidArgument, "seed control has wrong length");
    starts.push_back(s);
  }
  const size_t total = std::max<size_t>(static_cast<size_t>(std::max(opts.multistart, 1)), starts.size());
  std::vector<Vec> candidates;
  candidates.push_back(U.center());
  for (const auto& v : U.vertices()) candidates.push_back(v);
  for (size_t c = 0; c < candidates.size() && starts.size() < total; ++c)
    starts.emplace_back(N, candidates[c]);
  for (std::uint64_t k = 0; starts.size() < total; ++k) {
    std::mt19937_64 rng(opts.seed + k);
    starts.emplace_back(N, U.sample(rng));
  }
  return starts;
}

SolveResult solve(const DiscreteProblem& dp, const SolveOptions& opts) {
  if (opts.multistart < 1) throw Error(ErrorCode::kInvalidArgument, "multistart must be at least 1");
  if (!(opts.armijo_c > 0.0 && opts.armijo_c < 1.0) || !(opts.backtrack > 0.0 && opts.backtrack < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "Armijo parameters out of (0,1)");
  auto starts = start_controls(dp, opts);
  Descent descent(dp, opts);
  std::vector<StartOutcome> outs;
  outs.reserve(starts.size());
  bool all_stalled = true;
  for (auto& s : starts) {
    outs.push_back(descent.run(s));
    if (!outs.back().stalled_at_start || outs.back().kkt <= opts.stop_tol) all_stalled = false;
  }
  if (all_stalled) throw Error(ErrorCode::kNoDescent, "every start failed the line search at iteration 0");

  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : outs) best = std::min(best, o.J);
  const double h = dp.mesh().h;
  size_t pick = 0;
  double pick_norm = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < outs.size(); ++k) {
    if (outs[k].J > best + opts.tie_tol) continue;
    double nrm = l2_norm(outs[k].u, h);
    if (nrm < pick_norm - 1e-12) {
      pick_norm = nrm;
      pick = k;
    }
  }
  SolveResult res;
  StartOutcome& w = outs[pick];
  res.pair = {std::move(w.x), std::move(w.u)};
  res.objective = w.J;
  res.iterations = w.iterations;
  res.starts_used = static_cast<int>(outs.size());
  res.best_start = static_cast<int>(pick);
  res.kkt_residual = w.kkt;
  res.history = std::move(w.history);
  return res;
}

SolveResult brute_force(const DiscreteProblem& dp, const std::vector<std::vector<double>>& grid) {
  const SweepingProblem& P = dp.problem();
  const int d = P.d(), N = dp.mesh().N;
  const double h = dp.mesh().h;
  if (static_cast<int>(grid.size()) != d) throw Error(ErrorCode::kInvalidArgument, "grid needs one list per control coordinate");
  std::vector<Vec> lattice{Vec::Zero(d)};
  for (int k = 0; k < d; ++k) {
    if (grid[k].empty()) throw Error(ErrorCode::kInvalidArgument, "empty grid coordinate");
    std::vector<Vec> next;
    for (const auto& v : lattice)
      for (double g : grid[k]) {
        Vec w = v;
        w(k) = g;
        next.push_back(w);
      }
    lattice = std::move(next);
  }
  std::erase_if(lattice, [&](const Vec& v) { return !P.U.contains(v); });
  if (lattice.empty()) throw Error(ErrorCode::kInvalidArgument, "no lattice point lies in U");

  const int first = dp.pinned_first() ? 1 : 0;
  double space = std::pow(static_cast<double>(lattice.size()), N - first);
  if (space > 1e7) throw Error(ErrorCode::kSearchSpaceTooLarge, "lattice has " + std::to_string(space) + " sequences");

  Controls cur(N), best_u;
  std::vector<Vec> xs(N + 1);
  xs[0] = P.x0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec> best_x;
  if (first) cur[0] = *dp.pinned_first();

  // depth-first with incremental states and running tracking sums
  auto dfs = [&](auto&& self, int i, double acc) -> void {
    if (i == N) {
      double J = acc + P.phi(xs[N]);
      if (J < best) {
        best = J;
        best_u = cur;
        best_x = xs;
      }
      return;
    }
    auto visit = [&](const Vec& v) {
      cur[i] = v;
      xs[i + 1] = catching_up_step(xs[i], v, h, P);
      self(self, i + 1, acc + dp.interval_tracking(i, (xs[i + 1] - xs[i]) / h, v));
    };
    if (i < first) visit(cur[0]);
    else
      for (const auto& v : lattice) visit(v);
  };
  dfs(dfs, 0, 0.0);

  SolveResult res;
  res.pair = {best_x, best_u};
  res.objective = best;
  res.starts_used = 1;
  res.history = {best};
  return res;
}

std::string SolveResult::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["objective"] = objective;
  j["kkt_residual"] = kkt_residual;
  j["iterations"] = iterations;
  j["starts_used"] = starts_used;
  j["best_start"] = best_start;
  j["history"] = history;
  auto rows = [](const std::vector<Vec>& vs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& v : vs) a.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return a;
  };
  j["controls"] = rows(pair.u);
  j["states"] = rows(pair.x);
  return j.dump(2) + "\n";
}

}  // namespace sweep
