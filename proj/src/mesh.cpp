#include "skelgraph/mesh.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace skelgraph {

void validate_mesh(const TriangleMesh& mesh) {
  const Eigen::Index n = mesh.positions.rows();
  for (Eigen::Index t = 0; t < mesh.triangles.rows(); ++t) {
    const int a = mesh.triangles(t, 0), b = mesh.triangles(t, 1), c = mesh.triangles(t, 2);
    if (a < 0 || a >= n || b < 0 || b >= n || c < 0 || c >= n)
      throw std::invalid_argument("mesh: vertex index out of range in triangle " + std::to_string(t));
    if (a == b || b == c || a == c)
      throw std::invalid_argument("mesh: repeated vertex in triangle " + std::to_string(t));
    const Eigen::Vector3d ab = mesh.positions.row(b) - mesh.positions.row(a);
    const Eigen::Vector3d ac = mesh.positions.row(c) - mesh.positions.row(a);
    const double area = 0.5 * ab.cross(ac).norm();
    if (area <= 1e-12)
      throw std::invalid_argument("mesh: degenerate (zero-area) triangle " + std::to_string(t));
  }
}

void validate_cloud(const PointCloud& cloud) {
  if (cloud.features && cloud.features->rows() != cloud.points.rows())
    throw std::invalid_argument("point cloud: feature row count does not match point count");
}

}  // namespace skelgraph
