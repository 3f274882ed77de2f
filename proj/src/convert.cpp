#include "skelgraph/convert.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace skelgraph {

Metric metric_from_string(const std::string& name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "manhattan") return Metric::kManhattan;
  if (name == "feature-euclidean") return Metric::kFeatureEuclidean;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

AttributedGraph voxel_to_graph(const BinaryMask& mask, const VoxelGrid* grid) {
  if (grid && grid->dims != mask.dims)
    throw std::invalid_argument("intensity grid dims do not match mask dims");
  const bool flat = mask.dims.z() == 1;

  // Vertex ids in scan order (x varies fastest).
  std::vector<int> vertex_of(static_cast<size_t>(mask.size()), -1);
  std::vector<Eigen::Vector3i> coords;
  for (int z = 0; z < mask.dims.z(); ++z)
    for (int y = 0; y < mask.dims.y(); ++y)
      for (int x = 0; x < mask.dims.x(); ++x)
        if (mask.at(x, y, z)) {
          vertex_of[static_cast<size_t>(mask.index(x, y, z))] = static_cast<int>(coords.size());
          coords.emplace_back(x, y, z);
        }

  AttributedGraph g;
  g.num_vertices = static_cast<int>(coords.size());
  Eigen::MatrixXd positions(g.num_vertices, flat ? 2 : 3);
  for (int v = 0; v < g.num_vertices; ++v) {
    positions(v, 0) = coords[static_cast<size_t>(v)].x();
    positions(v, 1) = coords[static_cast<size_t>(v)].y();
    if (!flat) positions(v, 2) = coords[static_cast<size_t>(v)].z();
  }
  g.positions = std::move(positions);

  std::vector<std::array<int, 2>> edges;
  const Eigen::Vector3i steps[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int v = 0; v < g.num_vertices; ++v) {
    const Eigen::Vector3i& c = coords[static_cast<size_t>(v)];
    for (const auto& step : steps) {
      const Eigen::Vector3i n = c + step;
      if (!mask.in_bounds(n.x(), n.y(), n.z())) continue;
      const int w = vertex_of[static_cast<size_t>(mask.index(n.x(), n.y(), n.z()))];
      if (w >= 0) edges.push_back({v, w});  // +step neighbor always has higher scan id
    }
  }
  g.edges.resize(static_cast<Eigen::Index>(edges.size()), 2);
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    g.edges(e, 0) = edges[static_cast<size_t>(e)][0];
    g.edges(e, 1) = edges[static_cast<size_t>(e)][1];
  }

  if (grid) {
    Eigen::MatrixXd intensity(g.num_vertices, 1);
    for (int v = 0; v < g.num_vertices; ++v) {
      const Eigen::Vector3i& c = coords[static_cast<size_t>(v)];
      intensity(v, 0) = grid->at(c.x(), c.y(), c.z());
    }
    g.vertex_features = std::move(intensity);
    g.meta["vertex_feature_layout"] = "intensity";
  }
  validate_graph(g);
  return g;
}

AttributedGraph mesh_to_graph(const TriangleMesh& mesh) {
  validate_mesh(mesh);
  std::set<std::pair<int, int>> sides;
  for (Eigen::Index f = 0; f < mesh.triangles.rows(); ++f)
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(f, c);
      const int b = mesh.triangles(f, (c + 1) % 3);
      sides.insert(std::minmax(a, b));
    }

  AttributedGraph g;
  g.num_vertices = static_cast<int>(mesh.positions.rows());
  g.positions = mesh.positions;
  g.edges.resize(static_cast<Eigen::Index>(sides.size()), 2);
  Eigen::Index e = 0;
  for (const auto& [a, b] : sides) {
    g.edges(e, 0) = a;
    g.edges(e, 1) = b;
    ++e;
  }
  validate_graph(g);
  return g;
}

namespace {

double cloud_distance(const PointCloud& cloud, Eigen::Index i, Eigen::Index j, Metric metric) {
  switch (metric) {
    case Metric::kEuclidean:
      return (cloud.points.row(i) - cloud.points.row(j)).norm();
    case Metric::kManhattan:
      return (cloud.points.row(i) - cloud.points.row(j)).cwiseAbs().sum();
    case Metric::kFeatureEuclidean:
      return (cloud.features->row(i) - cloud.features->row(j)).norm();
  }
  throw std::logic_error("unhandled metric");
}

void require_features_for(const PointCloud& cloud, Metric metric) {
  if (metric == Metric::kFeatureEuclidean && !cloud.features)
    throw std::invalid_argument("feature-euclidean metric requires per-point features");
}

AttributedGraph cloud_graph_shell(const PointCloud& cloud) {
  AttributedGraph g;
  g.num_vertices = static_cast<int>(cloud.points.rows());
  g.positions = cloud.points;
  if (cloud.features) g.vertex_features = *cloud.features;
  return g;
}

void set_edges(AttributedGraph& g, const std::vector<std::pair<int, int>>& edges) {
  g.edges.resize(static_cast<Eigen::Index>(edges.size()), 2);
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    g.edges(e, 0) = edges[static_cast<size_t>(e)].first;
    g.edges(e, 1) = edges[static_cast<size_t>(e)].second;
  }
}

}  // namespace

AttributedGraph cloud_to_graph_radius(const PointCloud& cloud, double radius, Metric metric) {
  validate_cloud(cloud);
  require_features_for(cloud, metric);
  if (radius < 0) throw std::invalid_argument("radius must be non-negative");
  AttributedGraph g = cloud_graph_shell(cloud);
  std::vector<std::pair<int, int>> edges;
  const Eigen::Index n = cloud.points.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (cloud_distance(cloud, i, j, metric) <= radius)
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  set_edges(g, edges);
  validate_graph(g);
  return g;
}

AttributedGraph cloud_to_graph_knn(const PointCloud& cloud, int k, Metric metric) {
  validate_cloud(cloud);
  require_features_for(cloud, metric);
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  AttributedGraph g = cloud_graph_shell(cloud);
  const Eigen::Index n = cloud.points.rows();
  std::set<std::pair<int, int>> picked;
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) order.emplace_back(cloud_distance(cloud, i, j, metric), j);
    const size_t keep = std::min<size_t>(static_cast<size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
    for (size_t m = 0; m < keep; ++m)
      picked.insert(std::minmax(static_cast<int>(i), static_cast<int>(order[m].second)));
  }
  std::vector<std::pair<int, int>> edges(picked.begin(), picked.end());
  set_edges(g, edges);
  validate_graph(g);
  return g;
}

}  // namespace skelgraph
