#pragma once

#include "skelgraph/graph.hpp"
#include "skelgraph/grid.hpp"
#include "skelgraph/mesh.hpp"

namespace skelgraph {

enum class Metric {
  kEuclidean,
  kManhattan,
  kFeatureEuclidean,  // distance on per-point feature rows
};

Metric metric_from_string(const std::string& name);

// One vertex per foreground element, edges between axis-adjacent foreground
// elements (6-connectivity in 3D, 4 in 2D). Produces a graph as large as the
// occupied volume itself; intended for small inputs and as a reference.
// When grid is non-null its intensities become a one-column vertex feature.
AttributedGraph voxel_to_graph(const BinaryMask& mask, const VoxelGrid* grid = nullptr);

// Keep vertices and the set of unique undirected triangle sides, drop faces.
AttributedGraph mesh_to_graph(const TriangleMesh& mesh);

// Edge iff metric distance <= radius. Brute-force over all pairs.
AttributedGraph cloud_to_graph_radius(const PointCloud& cloud, double radius,
                                      Metric metric = Metric::kEuclidean);

// Union of each point's k nearest neighbors (self excluded, ties broken by
// lower index), symmetrized.
AttributedGraph cloud_to_graph_knn(const PointCloud& cloud, int k,
                                   Metric metric = Metric::kEuclidean);

}  // namespace skelgraph
