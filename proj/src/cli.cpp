#include "sweep/cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sweep/certificate.hpp"
#include "sweep/discretization.hpp"
#include "sweep/optimizer.hpp"
#include "sweep/problem_file.hpp"
#include "sweep/stationarity.hpp"

namespace sweep {

namespace {

struct Flags {
  std::string file;
  int level = 7;
  std::string levels;
  std::optional<std::uint64_t> seed;
  std::optional<int> multistart;
  double tracking_weight = 0.0;
  double epsilon = 0.0;
  double tol = 1e-8;
  std::string out_dir = ".";
  std::string reference;
  std::string grid = "-1,0,1";
};

std::vector<int> parse_levels(const std::string& spec) {
  auto dots = spec.find("..");
  try {
    if (dots == std::string::npos) return {std::stoi(spec)};
    int a = std::stoi(spec.substr(0, dots)), b = std::stoi(spec.substr(dots + 2));
    if (a > b) throw Error(ErrorCode::kInvalidArgument, "--levels: empty range " + spec);
    std::vector<int> out;
    for (int m = a; m <= b; ++m) out.push_back(m);
    return out;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "--levels expects a..b, got '" + spec + "'");
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "--grid: bad value '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--grid is empty");
  return out;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

const BVControl& require_control(const ProblemFile& pf) {
  if (!pf.control) throw Error(ErrorCode::kMissingSection, "missing section [control]");
  return *pf.control;
}

std::optional<ReferencePath> load_reference(const Flags& f) {
  if (f.reference.empty()) return std::nullopt;
  return ReferencePath::from_trajectory(read_trajectory_csv(f.reference));
}

DiscreteProblem make_dp(const ProblemFile& pf, const Mesh& mesh, const Flags& f) {
  return discretize_problem(pf.problem, mesh, load_reference(f), f.epsilon, f.tracking_weight);
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  ProblemFile pf = load_problem_file(f.file);
  const BVControl& ctl = require_control(pf);
  Trajectory tr = integrate(pf.problem, ctl, build_mesh(f.level, pf.problem.T));
  std::string path = join(f.out_dir, "trajectory.csv");
  write_trajectory_csv(tr, path);
  out << "wrote " << path << "\n";
  if (tr.growth_warning) out << "warning: drift norm exceeded 1e3 (1 + |x|)\n";
  return 0;
}

int cmd_optimize(const Flags& f, std::ostream& out) {
  ProblemFile pf = load_problem_file(f.file);
  Mesh mesh = build_mesh(f.level, pf.problem.T);
  DiscreteProblem dp = make_dp(pf, mesh, f);
  SolveOptions opts = pf.solver;
  if (f.seed) opts.seed = *f.seed;
  if (f.multistart) opts.multistart = *f.multistart;
  SolveResult res = solve(dp, opts);
  Trajectory tr = simulate(pf.problem, res.pair.u, res.pair.u.back(), mesh);
  write_file_atomic(join(f.out_dir, "solve.json"), res.to_json());
  write_trajectory_csv(tr, join(f.out_dir, "trajectory.csv"));
  out.precision(17);
  out << "objective " << res.objective << "\n";
  if (dp.reference() && !dp.within_localization(res.pair))
    out << "note: solution violates the localization budget epsilon/2\n";
  return 0;
}

int cmd_check(const Flags& f, std::ostream& out) {
  ProblemFile pf = load_problem_file(f.file);
  const BVControl& ctl = require_control(pf);
  CheckTolerances tols;
  tols.residual = f.tol;
  std::vector<int> levels = f.levels.empty() ? std::vector<int>{f.level} : parse_levels(f.levels);

  std::vector<DualBundle> bundles;
  std::vector<Mesh> meshes;
  bool ok = true;
  std::string last_report;
  for (int m : levels) {
    Mesh mesh = build_mesh(m, pf.problem.T);
    DiscreteProblem dp = make_dp(pf, mesh, f);
    Trajectory tr = integrate(pf.problem, ctl, mesh);
    DiscretePair pair{tr.x, std::vector<Vec>(tr.u.begin(), tr.u.end() - 1)};
    DualBundle B = pf.certificate ? discretize_certificate(*pf.certificate, pair, dp)
                                  : recover_discrete_duals(pair, dp).bundle;
    ResidualReport rep = check_discrete(pair, dp, B, tols);
    ok = ok && rep.verdict;
    last_report = rep.to_json();
    out << "level " << m << " discrete " << (rep.verdict ? "pass" : "fail") << "\n";
    bundles.push_back(std::move(B));
    meshes.push_back(mesh);
  }
  write_file_atomic(join(f.out_dir, "report.json"), last_report);

  if (!f.levels.empty()) {
    Trajectory tr = integrate(pf.problem, ctl, meshes.back());
    ContinuousDuals D = pf.certificate ? sample_certificate(*pf.certificate, meshes.back(), pf.problem.C)
                                       : assemble_limit(bundles, meshes, pf.problem.C);
    ResidualReport rep = check_continuous(tr, D, pf.problem, tols);
    ok = ok && rep.verdict;
    write_file_atomic(join(f.out_dir, "report_continuous.json"), rep.to_json());
    out << "continuous " << (rep.verdict ? "pass" : "fail") << "\n";
  }
  return ok ? 0 : 2;
}

int cmd_converge(const Flags& f, std::ostream& out) {
  ProblemFile pf = load_problem_file(f.file);
  std::vector<int> levels = parse_levels(f.levels.empty() ? "4..8" : f.levels);
  std::optional<ReferencePath> ref = load_reference(f);
  if (!ref) {
    // fine-mesh self-reference
    const BVControl& ctl = require_control(pf);
    int fine = std::min(24, std::max(12, levels.back() + 4));
    ref = ReferencePath::from_trajectory(integrate(pf.problem, ctl, build_mesh(fine, pf.problem.T)));
  }
  ConvergenceReport rep = convergence_report(pf.problem, levels, *ref);
  std::string path = join(f.out_dir, "convergence.csv");
  write_file_atomic(path, rep.to_csv());
  out << "wrote " << path << (rep.monotone ? "" : " (errors not monotone)") << "\n";
  return 0;
}

int cmd_oracle(const Flags& f, std::ostream& out) {
  ProblemFile pf = load_problem_file(f.file);
  Mesh mesh = build_mesh(f.level, pf.problem.T);
  DiscreteProblem dp = make_dp(pf, mesh, f);
  std::vector<std::vector<double>> grid(pf.problem.d(), parse_grid(f.grid));
  SolveResult res = brute_force(dp, grid);
  write_file_atomic(join(f.out_dir, "oracle.json"), res.to_json());
  out.precision(17);
  out << "objective " << res.objective << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of sweeping processes over polyhedra"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("file", f.file, "problem file")->required();
    sub->add_option("--level", f.level, "dyadic mesh level m (N = 2^m)");
    sub->add_option("--out-dir", f.out_dir, "directory for artifacts");
    sub->add_option("--tracking-weight", f.tracking_weight, "weight of the reference tracking term");
    sub->add_option("--epsilon", f.epsilon, "localization radius around the reference");
    sub->add_option("--reference", f.reference, "trajectory CSV used as the reference");
  };
  CLI::App* sim = app.add_subcommand("simulate", "integrate the [control] section");
  CLI::App* opt = app.add_subcommand("optimize", "solve the discrete problem");
  CLI::App* chk = app.add_subcommand("check", "verify optimality conditions");
  CLI::App* cnv = app.add_subcommand("converge", "convergence table over levels");
  CLI::App* orc = app.add_subcommand("oracle", "brute-force lattice search");
  for (CLI::App* sub : {sim, opt, chk, cnv, orc}) common(sub);
  std::uint64_t seed = 0;
  int multistart = 0;
  opt->add_option("--seed", seed, "random seed for multistart draws");
  opt->add_option("--multistart", multistart, "number of starts");
  chk->add_option("--levels", f.levels, "level range a..b; adds the continuous-time check");
  chk->add_option("--tol", f.tol, "residual tolerance");
  cnv->add_option("--levels", f.levels, "level range a..b");
  orc->add_option("--grid", f.grid, "comma-separated lattice per control coordinate");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 1;
  }
  if (opt->count("--seed")) f.seed = seed;
  if (opt->count("--multistart")) f.multistart = multistart;

  try {
    if (*sim) return cmd_simulate(f, out);
    if (*opt) return cmd_optimize(f, out);
    if (*chk) return cmd_check(f, out);
    if (*cnv) return cmd_converge(f, out);
    if (*orc) return cmd_oracle(f, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace sweep
