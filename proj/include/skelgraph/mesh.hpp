#pragma once

#include <Eigen/Core>

#include <optional>

namespace skelgraph {

// Triangle surface mesh: one position row per vertex, one index triple per face.
struct TriangleMesh {
  Eigen::MatrixX3d positions;
  Eigen::MatrixX3i triangles;
};

// Points in 3-space with optional uniform-width per-point feature rows.
struct PointCloud {
  Eigen::MatrixX3d points;
  std::optional<Eigen::MatrixXd> features;
};

// Throws std::invalid_argument when an index is out of range, a triangle
// repeats a vertex, or a triangle has (near-)zero area.
void validate_mesh(const TriangleMesh& mesh);

void validate_cloud(const PointCloud& cloud);

}  // namespace skelgraph
