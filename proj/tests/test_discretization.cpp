#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sweep/discretization.hpp"
#include "support/examples.hpp"

using fixtures::v2;
using sweep::Mat;
using sweep::Vec;

namespace {

// Composite Simpson with many panels, used as an independent quadrature for smooth integrands.
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 400) {
  const double w = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int k = 1; k < panels; ++k) acc += f(a + k * w) * (k % 2 ? 4.0 : 2.0);
  return acc * w / 3.0;
}

sweep::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const sweep::Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return sweep::ErrorCode::kIo;
}

}  // namespace

TEST_CASE("dyadic meshes nest") {
  for (int m = 1; m < 10; ++m) {
    auto coarse = sweep::build_mesh(m, 1.5), fine = sweep::build_mesh(m + 1, 1.5);
    for (int i = 0; i <= coarse.N; ++i) CHECK(coarse.node(i) == fine.node(2 * i));
  }
  auto nodes = sweep::build_mesh(2, 2.0).nodes();
  CHECK(nodes == std::vector<double>{0, 0.5, 1, 1.5, 2});
}

TEST_CASE("piecewise quadrature splits at kinks") {
  // |t - 1/3| is linear on each side of the kink, so the midpoint rule is exact there
  auto f = [](double t) { return std::abs(t - 1.0 / 3); };
  double exact = 0.5 * (1.0 / 9) + 0.5 * (4.0 / 9);
  CHECK(sweep::integrate_piecewise(f, 0, 1, {1.0 / 3}) == doctest::Approx(exact).epsilon(1e-14));
  Vec v = sweep::integrate_piecewise_vec([](double t) { return v2(1.0, t); }, 0, 2, {});
  CHECK(v(0) == doctest::Approx(2.0));
  CHECK(v(1) == doctest::Approx(2.0));
}

TEST_CASE("feasible approximation of the sliding solution") {
  auto P = fixtures::halfspace_problem(0.5);
  auto mesh = sweep::build_mesh(6, 1.0);
  auto ref = fixtures::halfspace_constant_path(0.5);
  auto approx = sweep::approximate_feasible(P, ref, mesh);
  CHECK(approx.control_l2 <= 1e-14);
  CHECK(approx.state_w12 <= 0.05);
  for (const auto& u : approx.pair.u) CHECK(u == v2(-1, -1));
  for (const auto& x : approx.pair.x) CHECK(P.C.contains(x, 1e-9));
}

TEST_CASE("step control switching on a node is reproduced exactly") {
  auto P = fixtures::quadrant_problem();
  sweep::ReferencePath ref;
  ref.control = [](double t) { return t < 0.5 ? v2(1, 0) : v2(0, 1); };
  ref.velocity = ref.control;
  ref.state = [](double t) { return t < 0.5 ? v2(-0.5 + t, -0.5) : v2(0, -0.5 + (t - 0.5)); };
  ref.kinks = {0.5};
  for (int m : {1, 3, 5}) {
    auto mesh = sweep::build_mesh(m, 1.0);
    auto approx = sweep::approximate_feasible(P, ref, mesh);
    // sampling at right endpoints shifts the switch by one interval
    for (int i = 0; i < mesh.N; ++i) CHECK(approx.pair.u[i] == ref.control(mesh.node(i + 1)));
    CHECK(approx.control_l2 == doctest::Approx(std::sqrt(2.0 * mesh.h)));
  }
}

TEST_CASE("plain Mayer objective on the quadrant example") {
  auto P = fixtures::quadrant_problem();
  auto mesh = sweep::build_mesh(2, 1.0);
  auto dp = sweep::discretize_problem(P, mesh);
  std::vector<Vec> controls(4, v2(0.5, 0.5));
  CHECK(std::abs(dp.objective(controls)) <= 1e-12);
  // hand simulation: (-1/2,-1/2) + 4 * (1/4) * (1/2,1/2) = (0,0)
  auto x = dp.states(controls);
  CHECK(x[2] == v2(-0.25, -0.25));
  std::vector<Vec> other(4, v2(0, 0.5));
  CHECK(dp.objective(other) == doctest::Approx(0.125));
  CHECK_FALSE(dp.pinned_first().has_value());
}

TEST_CASE("tracking term vanishes on the reference and matches independent quadrature") {
  auto P = fixtures::halfspace_problem(0.5);
  auto ref = fixtures::halfspace_smooth_path();
  auto mesh = sweep::build_mesh(4, 1.0);
  auto dp = sweep::discretize_problem(P, mesh, ref, 1.0, 2.0);
  REQUIRE(dp.pinned_first().has_value());
  CHECK(*dp.pinned_first() == v2(-1, -1));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int i = 0; i < mesh.N; ++i) {
    Vec v = v2(unit(rng), unit(rng)), u = v2(unit(rng), unit(rng));
    const double a = mesh.node(i), b = mesh.node(i + 1);
    double oracle = simpson([&](double t) { return (v - ref.velocity(t)).squaredNorm(); }, a, b) +
                    simpson([&](double t) { return (u - ref.control(t)).squaredNorm(); }, a, b);
    // 4-panel midpoint error bound: the two integrands have second derivative 2 each
    const double quad_bound = 4.0 * std::pow(b - a, 3) / (24.0 * 16.0);
    CHECK(std::abs(dp.interval_tracking(i, v, u) - 0.5 * 2.0 * oracle) <= quad_bound + 1e-13);
    // gradients against central differences
    Vec ty = dp.theta_y(i, v), tu = dp.theta_u(i, u);
    for (int k = 0; k < 2; ++k) {
      Vec e = Vec::Zero(2);
      e(k) = 1e-6;
      double fy = (dp.interval_tracking(i, v + e, u) - dp.interval_tracking(i, v - e, u)) / 2e-6;
      double fu = (dp.interval_tracking(i, v, u + e) - dp.interval_tracking(i, v, u - e)) / 2e-6;
      CHECK(ty(k) == doctest::Approx(fy).epsilon(1e-6));
      CHECK(tu(k) == doctest::Approx(fu).epsilon(1e-6));
    }
  }
}

TEST_CASE("self-reference passes the localization filter") {
  auto P = fixtures::quadrant_problem();
  auto mesh = sweep::build_mesh(3, 1.0);
  std::vector<Vec> controls(mesh.N, v2(0.5, 0.25));
  auto base = sweep::discretize_problem(P, mesh);
  auto pair = base.pair(controls);
  auto ref = sweep::ReferencePath::from_pair(pair, mesh);
  for (double eps : {1e-6, 1.0}) {
    auto dp = sweep::discretize_problem(P, mesh, ref, eps, 1.0);
    CHECK(dp.localization_value(pair) <= 1e-12);
    CHECK(dp.within_localization(pair));
    CHECK(dp.objective(pair) == doctest::Approx(base.objective(pair)));
  }
  auto dp = sweep::discretize_problem(P, mesh, ref, 1e-6, 1.0);
  std::vector<Vec> far(mesh.N, v2(-1, -1));
  CHECK_FALSE(dp.within_localization(dp.pair(far)));
}

TEST_CASE("discrete problem argument checks") {
  auto P = fixtures::quadrant_problem();
  auto mesh = sweep::build_mesh(3, 1.0);
  CHECK(code_of([&] { sweep::discretize_problem(P, mesh, std::nullopt, 0.0, 1.0); }) ==
        sweep::ErrorCode::kMissingReference);
  CHECK_THROWS_AS(sweep::discretize_problem(P, mesh, fixtures::quadrant_path(), 0.0, 1.0), sweep::Error);
}

TEST_CASE("convergence report on the smooth optimal couple") {
  auto P = fixtures::halfspace_problem(0.5);
  auto report = sweep::convergence_report(P, {4, 5, 6, 7, 8}, fixtures::halfspace_smooth_path());
  REQUIRE(report.rows.size() == 5);
  CHECK(report.monotone);
  for (size_t k = 1; k < report.rows.size(); ++k) {
    double ratio = report.rows[k - 1].err_vel_l2 / report.rows[k].err_vel_l2;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
    CHECK(report.rows[k].h == doctest::Approx(0.5 * report.rows[k - 1].h));
  }
  CHECK(report.to_csv().rfind("m,h,err_vel_L2,err_ctrl_L2,err_node_max\n", 0) == 0);
}

TEST_CASE("convergence report is exact when the kink sits on every mesh") {
  auto P = fixtures::halfspace_problem(0.5);
  auto report = sweep::convergence_report(P, {4, 6, 8}, fixtures::halfspace_constant_path(0.5));
  for (const auto& row : report.rows) {
    CHECK(row.err_vel_l2 <= 1e-12);
    CHECK(row.err_ctrl_l2 <= 1e-12);
    CHECK(row.err_node_max <= 1e-12);
  }
}

TEST_CASE("zero drift gives zero error") {
  auto P = fixtures::quadrant_problem();
  P.g = sweep::PerturbationMap::affine(Mat::Zero(2, 2), Mat::Zero(2, 2), Vec::Zero(2));
  sweep::ReferencePath still;
  still.state = [](double) { return v2(-0.5, -0.5); };
  still.velocity = [](double) { return v2(0, 0); };
  still.control = [](double) { return v2(0.3, 0.3); };
  auto report = sweep::convergence_report(P, {3, 4}, still);
  for (const auto& row : report.rows) CHECK(row.err_node_max + row.err_vel_l2 + row.err_ctrl_l2 == 0.0);
}

TEST_CASE("node error is first order for a constant control with affine drift") {
  // x' = -x + c from the interior point (-1/2,-1/2) of the quadrant, c = (-1,-1): stays interior
  auto P = fixtures::quadrant_problem();
  P.g = sweep::PerturbationMap::affine(-Mat::Identity(2, 2), Mat::Identity(2, 2), Vec::Zero(2));
  sweep::ReferencePath exact;
  exact.state = [](double t) { return v2(-1 + 0.5 * std::exp(-t), -1 + 0.5 * std::exp(-t)); };
  exact.velocity = [](double t) { return v2(-0.5 * std::exp(-t), -0.5 * std::exp(-t)); };
  exact.control = [](double) { return v2(-1, -1); };
  auto report = sweep::convergence_report(P, {5, 6, 7, 8}, exact);
  for (size_t k = 1; k < report.rows.size(); ++k) {
    double ratio = report.rows[k - 1].err_node_max / report.rows[k].err_node_max;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}
