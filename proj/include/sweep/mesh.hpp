#pragma once

#include <optional>
#include <vector>

namespace sweep {

/// Uniform mesh on [0, T]. Dyadic meshes carry their level m (N = 2^m).
struct Mesh {
  std::optional<int> level;
  int N = 0;
  double T = 0.0;
  double h = 0.0;

  double node(int i) const { return i == N ? T : i * h; }
  std::vector<double> nodes() const;
};

/// Dyadic mesh with 2^m intervals; 1 <= m <= 24 else kLevelOutOfRange.
Mesh build_mesh(int m, double T);
/// Uniform mesh with N intervals (not necessarily dyadic).
Mesh uniform_mesh(int N, double T);

}  // namespace sweep
