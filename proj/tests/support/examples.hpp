#pragma once

// Worked examples used across the tests, with their closed-form solutions and
// hand-derived multipliers.

#include <cmath>

#include "sweep/certificate.hpp"
#include "sweep/model.hpp"

namespace fixtures {

using sweep::Mat;
using sweep::Vec;

inline Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

/// Halfspace {x2 >= 0}, g = u, U = [-1,1]^2, cost x1 + x2, x0 = (0, x20).
inline sweep::SweepingProblem halfspace_problem(double x20) {
  Mat gen(1, 2);
  gen << 0.0, -1.0;
  return {sweep::Polyhedron(gen, Vec::Zero(1)),
          sweep::ControlSet::box(v2(-1, -1), v2(1, 1)),
          sweep::PerturbationMap::affine(Mat::Zero(2, 2), Mat::Identity(2, 2), Vec::Zero(2)),
          sweep::CostFunction::linear(v2(1, 1)),
          v2(0.0, x20),
          1.0};
}

/// Negative quadrant, g = u, U = [-1,1]^2, cost |x|^2/2, x0 = (-1/2, -1/2).
inline sweep::SweepingProblem quadrant_problem() {
  return {sweep::Polyhedron(Mat::Identity(2, 2), Vec::Zero(2)),
          sweep::ControlSet::box(v2(-1, -1), v2(1, 1)),
          sweep::PerturbationMap::affine(Mat::Zero(2, 2), Mat::Identity(2, 2), Vec::Zero(2)),
          sweep::CostFunction::half_norm_sq(2),
          v2(-0.5, -0.5),
          1.0};
}

/// Constant control (-1,-1) from (0, x20): x2 slides down to the boundary and stays.
inline sweep::ReferencePath halfspace_constant_path(double x20) {
  sweep::ReferencePath r;
  r.state = [x20](double t) { return v2(-t, std::max(0.0, x20 - t)); };
  r.velocity = [x20](double t) { return v2(-1.0, t < x20 ? -1.0 : 0.0); };
  r.control = [](double) { return v2(-1.0, -1.0); };
  r.kinks = {x20};
  return r;
}

/// An optimal couple for x20 = 1/2: u = (-1, t - 1), x = (-t, (1 - t)^2 / 2); interior on [0, 1).
inline sweep::ReferencePath halfspace_smooth_path() {
  sweep::ReferencePath r;
  r.state = [](double t) { return v2(-t, 0.5 * (1 - t) * (1 - t)); };
  r.velocity = [](double t) { return v2(-1.0, t - 1.0); };
  r.control = [](double t) { return v2(-1.0, t - 1.0); };
  return r;
}

/// Straight line to the corner under u = (1/2, 1/2).
inline sweep::ReferencePath quadrant_path() {
  sweep::ReferencePath r;
  r.state = [](double t) { return v2(-0.5 + 0.5 * t, -0.5 + 0.5 * t); };
  r.velocity = [](double) { return v2(0.5, 0.5); };
  r.control = [](double) { return v2(0.5, 0.5); };
  return r;
}

/// lambda = 1, p = q = psi = (-1,-1), no reaction, no measure (x20 > 1).
inline sweep::Certificate halfspace_certificate() {
  sweep::Certificate c;
  c.lambda = 1.0;
  c.p = c.q = c.psi = v2(-1, -1);
  c.eta = c.eta_T = c.gamma = Vec::Zero(1);
  return c;
}

/// lambda = 1, everything else zero.
inline sweep::Certificate quadrant_certificate() {
  sweep::Certificate c;
  c.lambda = 1.0;
  c.p = c.q = c.psi = Vec::Zero(2);
  c.eta = c.eta_T = c.gamma = Vec::Zero(2);
  return c;
}

}  // namespace fixtures
