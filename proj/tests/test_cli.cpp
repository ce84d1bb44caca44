#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sweep/cli.hpp"
#include "sweep/discretization.hpp"
#include "sweep/problem_file.hpp"

namespace fs = std::filesystem;
using sweep::Vec;

namespace {

const std::string kProblems = SWEEP_PROBLEMS_DIR;

struct Run {
  int code;
  std::string out, err;
};

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "sweep_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = sweep::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string problem(const std::string& name) { return kProblems + "/" + name; }

sweep::ErrorCode parse_code(const std::string& text, std::string* message = nullptr) {
  try {
    sweep::parse_problem_text(text, "doc.toml");
  } catch (const sweep::Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an exception");
  return sweep::ErrorCode::kIo;
}

const char* kMinimal = R"(T = 1.0
x0 = [0.0, 0.0]
[polyhedron]
generators = [[1.0, 0.0]]
offsets = [1.0]
[control_set]
kind = "box"
lo = [-1.0, -1.0]
hi = [1.0, 1.0]
[perturbation]
kind = "sine_drift"
[cost]
kind = "linear"
a = [1.0, 0.0]
)";

}  // namespace

TEST_CASE("problem files parse into the examples") {
  auto pf = sweep::load_problem_file(problem("halfspace.toml"));
  CHECK(pf.problem.n() == 2);
  CHECK(pf.problem.s() == 1);
  CHECK(pf.problem.x0(1) == 2.0);
  REQUIRE(pf.control.has_value());
  CHECK((*pf.control)(0.3)(0) == -1.0);
  CHECK(pf.solver.multistart == 8);
  CHECK_FALSE(pf.certificate.has_value());
  auto cert = sweep::load_problem_file(problem("halfspace_cert.toml"));
  REQUIRE(cert.certificate.has_value());
  CHECK(cert.certificate->psi(1) == -1.0);

  auto minimal = sweep::parse_problem_text(kMinimal);
  CHECK(minimal.problem.g.kind() == sweep::PerturbationMap::Kind::kSineDrift);
  CHECK_FALSE(minimal.control.has_value());
}

TEST_CASE("parse errors carry the source line") {
  std::string msg;
  std::string bad = kMinimal;
  bad.replace(bad.find("[0.0, 0.0]"), 10, "[0.0, oops]");
  CHECK(parse_code(bad, &msg) == sweep::ErrorCode::kParseError);
  CHECK(msg.find("doc.toml:2:") != std::string::npos);

  std::string no_poly = kMinimal;
  no_poly.erase(no_poly.find("[polyhedron]"), std::string("[polyhedron]\ngenerators = [[1.0, 0.0]]\noffsets = [1.0]\n").size());
  CHECK(parse_code(no_poly) == sweep::ErrorCode::kMissingSection);

  CHECK(parse_code(std::string(kMinimal) + "[mystery]\n") == sweep::ErrorCode::kParseError);
  // model invariants are reported through the parser too
  std::string outside = kMinimal;
  outside.replace(outside.find("[0.0, 0.0]"), 10, "[2.0, 0.0]");
  CHECK(parse_code(outside, &msg) == sweep::ErrorCode::kParseError);
  CHECK(msg.find("x0") != std::string::npos);
}

TEST_CASE("simulate writes a trajectory") {
  auto dir = fresh_dir("simulate");
  auto r = run({"simulate", problem("halfspace.toml"), "--level", "6", "--out-dir", dir.string()});
  CHECK(r.code == 0);
  auto tr = sweep::read_trajectory_csv((dir / "trajectory.csv").string());
  CHECK(tr.x.size() == 65);
  CHECK(tr.x.back()(0) == doctest::Approx(-1.0));
  CHECK(tr.x.back()(1) == doctest::Approx(1.0));
  CHECK(slurp(dir / "trajectory.csv").rfind("t,x_1,x_2,u_1,u_2,eta_1\n", 0) == 0);
}

TEST_CASE("simulate without a control section fails cleanly") {
  auto dir = fresh_dir("nocontrol");
  std::ofstream(dir / "p.toml") << kMinimal;
  auto r = run({"simulate", (dir / "p.toml").string(), "--level", "6", "--out-dir", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("MissingSection") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("optimize reports the quadrant optimum") {
  auto dir = fresh_dir("optimize");
  auto r = run({"optimize", problem("quadrant.toml"), "--level", "7", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  auto js = nlohmann::json::parse(slurp(dir / "solve.json"));
  CHECK(js["schema"] == 1);
  CHECK(js["objective"].get<double>() <= 1e-4);
  CHECK(js["controls"].size() == 128);
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("check accepts the analytic certificates") {
  for (const char* name : {"quadrant_cert.toml", "halfspace_cert.toml"}) {
    auto dir = fresh_dir(std::string("check_") + name);
    auto r = run({"check", problem(name), "--levels", "4..6", "--out-dir", dir.string()});
    INFO(name << " " << r.out << r.err);
    CHECK(r.code == 0);
    auto discrete = nlohmann::json::parse(slurp(dir / "report.json"));
    auto continuous = nlohmann::json::parse(slurp(dir / "report_continuous.json"));
    CHECK(discrete["verdict"] == "pass");
    CHECK(continuous["verdict"] == "pass");
    CHECK(continuous["schema"] == 1);
  }
}

TEST_CASE("check recovers multipliers when no certificate is given") {
  auto dir = fresh_dir("check_recover");
  auto r = run({"check", problem("halfspace_low.toml"), "--levels", "4..6", "--out-dir", dir.string()});
  INFO(r.out << r.err);
  CHECK(r.code == 0);
}

TEST_CASE("check exits 2 on a wrong certificate") {
  auto dir = fresh_dir("check_wrong");
  std::string text = slurp(problem("halfspace_cert.toml"));
  auto at = text.find("psi = [-1.0, -1.0]");
  REQUIRE(at != std::string::npos);
  text.replace(at, 18, "psi = [-1.0, -0.9]");
  std::ofstream(dir / "p.toml") << text;
  auto r = run({"check", (dir / "p.toml").string(), "--level", "5", "--out-dir", dir.string()});
  CHECK(r.code == 2);
  auto js = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(js["verdict"] == "fail");
}

TEST_CASE("converge writes a table and CSV references round trip") {
  auto dir = fresh_dir("converge");
  REQUIRE(run({"simulate", problem("halfspace_low.toml"), "--level", "10", "--out-dir", dir.string()}).code == 0);
  auto r = run({"converge", problem("halfspace_low.toml"), "--levels", "4..6", "--reference",
                (dir / "trajectory.csv").string(), "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("m,h,err_vel_L2,err_ctrl_L2,err_node_max\n", 0) == 0);

  auto pf = sweep::load_problem_file(problem("halfspace_low.toml"));
  auto tr = sweep::integrate(pf.problem, *pf.control, sweep::build_mesh(10, 1.0));
  auto direct = sweep::convergence_report(pf.problem, {4, 5, 6}, sweep::ReferencePath::from_trajectory(tr));
  CHECK(direct.to_csv() == csv);
}

TEST_CASE("oracle enumerates the lattice") {
  auto dir = fresh_dir("oracle");
  auto r = run({"oracle", problem("halfspace.toml"), "--level", "1", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  auto js = nlohmann::json::parse(slurp(dir / "oracle.json"));
  CHECK(js["objective"].get<double>() == doctest::Approx(0.0));
  CHECK(run({"oracle", problem("halfspace.toml"), "--level", "1", "--grid", "a,b", "--out-dir", dir.string()}).code == 1);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate", problem("halfspace.toml")}).code == 1);
  CHECK(run({"simulate", problem("missing.toml")}).code == 1);
  CHECK(run({"simulate", problem("halfspace.toml"), "--level", "30"}).code == 1);
  CHECK(run({"check", problem("halfspace_cert.toml"), "--levels", "6..4"}).code == 1);
}

TEST_CASE("the installed binary honours the exit-code contract") {
  auto dir = fresh_dir("binary");
  auto call = [&](const std::string& args) {
    std::string cmd = std::string(SWEEPCTL_PATH) + " " + args + " --out-dir " + dir.string() + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(call("check " + problem("quadrant_cert.toml")) == 0);
  CHECK(call("simulate " + problem("missing.toml")) == 1);
}
