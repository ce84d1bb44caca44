#pragma once

#include <optional>
#include <string>

#include "sweep/certificate.hpp"
#include "sweep/model.hpp"
#include "sweep/optimizer.hpp"

namespace sweep {

/// Parsed problem document: top-level T and x0, sections [polyhedron], [control_set],
/// [perturbation], [cost], and optional [control], [solver], [certificate].
struct ProblemFile {
  SweepingProblem problem;
  std::optional<BVControl> control;
  SolveOptions solver;
  std::optional<Certificate> certificate;
};

ProblemFile parse_problem_text(const std::string& text, const std::string& source = "<input>");
ProblemFile load_problem_file(const std::string& path);

}  // namespace sweep
