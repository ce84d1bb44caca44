#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "sweep/polyhedron.hpp"
#include "support/examples.hpp"
#include "support/random_instances.hpp"

using fixtures::v2;
using sweep::Mat;
using sweep::Vec;

namespace {

sweep::Polyhedron halfspace() {
  Mat gen(1, 2);
  gen << 0, -1;
  return sweep::Polyhedron(gen, Vec::Zero(1));
}

sweep::Polyhedron quadrant() { return sweep::Polyhedron(Mat::Identity(2, 2), Vec::Zero(2)); }

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

TEST_CASE("construction validates data") {
  CHECK(code_of([] { sweep::Polyhedron(Mat::Identity(2, 2), Vec::Zero(3)); }) ==
        sweep::ErrorCode::kInvalidArgument);
  CHECK(code_of([] { sweep::Polyhedron(Mat::Zero(1, 2), Vec::Zero(1)); }) == sweep::ErrorCode::kInvalidArgument);
  Mat gen(2, 1);
  gen << 1, -1;
  CHECK(code_of([&] { sweep::Polyhedron(gen, (Vec(2) << -1, -1).finished()); }) ==
        sweep::ErrorCode::kInvalidArgument);
  // the single point {0}: accepted, but flagged
  sweep::Polyhedron point(gen, Vec::Zero(2));
  CHECK_FALSE(point.has_interior());
  CHECK(quadrant().has_interior());
}

TEST_CASE("active set and LICQ on worked cases") {
  auto C = quadrant();
  CHECK(sweep::active_set(v2(-1, -1), C).empty());
  CHECK(sweep::active_set(v2(0, -1), C).indices == std::vector<int>{0});
  CHECK(sweep::active_set(v2(0, 0), C).indices == std::vector<int>{0, 1});
  CHECK(sweep::licq(v2(0, 0), C));
  CHECK(code_of([&] { sweep::active_set(v2(0.5, 0), C); }) == sweep::ErrorCode::kInfeasiblePoint);

  // three generators tight at the origin in the plane
  Mat gen(3, 2);
  gen << 1, 0, 0, 1, 1, 1;
  sweep::Polyhedron D(gen, Vec::Zero(3));
  CHECK_FALSE(sweep::licq(v2(0, 0), D));
  CHECK(sweep::licq(v2(0, -1), D));
}

TEST_CASE("projection onto the polyhedron") {
  auto C = halfspace();
  Vec p = sweep::project_polyhedron(v2(1, -2), C);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == doctest::Approx(0.0));
  Vec inside = v2(3, 4);
  CHECK(sweep::project_polyhedron(inside, C) == inside);
  Vec q = sweep::project_polyhedron(v2(2, 3), quadrant());
  CHECK(q.norm() == doctest::Approx(0.0));
}

TEST_CASE("tangent and normal cones on the boundary of a halfspace") {
  auto C = halfspace();
  Vec x = v2(0, 0);
  Vec T = sweep::project_tangent_cone(v2(-1, -1), x, C);
  CHECK(T(0) == doctest::Approx(-1.0));
  CHECK(T(1) == doctest::Approx(0.0));
  auto N = sweep::project_normal_cone(v2(-1, -1), x, C);
  CHECK(N.point(0) == doctest::Approx(0.0));
  CHECK(N.point(1) == doctest::Approx(-1.0));
  REQUIRE(N.coefficients.size() == 1);
  CHECK(N.coefficients[0].second == doctest::Approx(1.0));
  CHECK(N.unique);
  // interior point: the tangent cone is everything, the normal cone is {0}
  Vec v = v2(0.3, -0.7);
  CHECK(sweep::project_tangent_cone(v, v2(0, 1), C) == v);
  CHECK(sweep::project_normal_cone(v, v2(0, 1), C).point.isZero());
}

TEST_CASE("normal-cone weights are flagged non-unique without LICQ") {
  Mat gen(3, 2);
  gen << 1, 0, 0, 1, 1, 1;
  sweep::Polyhedron D(gen, Vec::Zero(3));
  auto N = sweep::project_normal_cone(v2(1, 1), v2(0, 0), D);
  CHECK_FALSE(N.unique);
  CHECK((N.point - v2(1, 1)).norm() <= 1e-10);
  Vec recon = gen.transpose() * N.dense(3);
  CHECK((recon - N.point).norm() <= 1e-10);
}

TEST_CASE("Moreau decomposition on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    auto inst = fixtures::random_active_instance(rng, 4, 5);
    Vec v = 2.0 * fixtures::gaussian(rng, inst.C.dim());
    Vec T = sweep::project_tangent_cone(v, inst.x, inst.C);
    auto N = sweep::project_normal_cone(v, inst.x, inst.C);
    CHECK((T + N.point - v).norm() <= 1e-9 * (1 + v.norm()));
    CHECK(std::abs(T.dot(N.point)) <= 1e-9 * (1 + v.squaredNorm()));
    // T lies in the tangent cone: active rows nonpositive
    for (int j : inst.active) CHECK(inst.C.generators().row(j).dot(T) <= 1e-9);
    for (auto [j, w] : N.coefficients) {
      CHECK(w >= 0.0);
      CHECK(std::binary_search(inst.active.begin(), inst.active.end(), j));
    }
  }
}

TEST_CASE("projection is idempotent and nonexpansive") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = fixtures::random_active_instance(rng, 4, 6);
    const int n = inst.C.dim();
    Vec y1 = inst.x + 2.0 * fixtures::gaussian(rng, n);
    Vec y2 = inst.x + 2.0 * fixtures::gaussian(rng, n);
    Vec p1 = sweep::project_polyhedron(y1, inst.C);
    Vec p2 = sweep::project_polyhedron(y2, inst.C);
    CHECK(inst.C.contains(p1, 1e-9));
    CHECK((sweep::project_polyhedron(p1, inst.C) - p1).norm() <= 1e-9);
    CHECK((p1 - p2).norm() <= (y1 - y2).norm() + 1e-9);
    // variational inequality against the feasible point x
    CHECK((y1 - p1).dot(inst.x - p1) <= 1e-8);
  }
}

TEST_CASE("active set grows with the tolerance") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = fixtures::random_active_instance(rng, 3, 5);
    auto small = sweep::active_set(inst.x, inst.C, 1e-10);
    auto large = sweep::active_set(inst.x, inst.C, 0.5);
    CHECK(small.indices == inst.active);
    CHECK(std::includes(large.indices.begin(), large.indices.end(), small.indices.begin(), small.indices.end()));
  }
}

TEST_CASE("normal-cone weights are invariant under generator permutation") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = fixtures::random_active_instance(rng, 4, 5);
    const int s = inst.C.count(), n = inst.C.dim();
    std::vector<int> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Mat A2(s, n);
    Vec c2(s);
    for (int j = 0; j < s; ++j) {
      A2.row(j) = inst.C.generators().row(perm[j]);
      c2(j) = inst.C.offsets()(perm[j]);
    }
    sweep::Polyhedron D(A2, c2);
    Vec v = fixtures::gaussian(rng, n);
    Vec w1 = sweep::project_normal_cone(v, inst.x, inst.C).dense(s);
    Vec w2 = sweep::project_normal_cone(v, inst.x, D).dense(s);
    for (int j = 0; j < s; ++j) CHECK(std::abs(w2(j) - w1(perm[j])) <= 1e-9 * (1 + v.norm()));
  }
}
