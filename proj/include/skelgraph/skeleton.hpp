#pragma once

#include <cstdint>
#include <vector>

#include "skelgraph/graph.hpp"
#include "skelgraph/grid.hpp"

namespace skelgraph {

// Center and radius of a sphere inscribed in the foreground; radius equals
// the distance-field value at the center.
struct SphereNode {
  Eigen::Vector3i center;
  double radius = 0.0;
};

// Exact squared Euclidean distance from each foreground element center to the
// nearest background element center, computed with the dimension-wise lower
// envelope method. Elements outside the array count as background, except
// along z when dims.z() == 1 (the 2D encoding). Background elements hold 0.
Grid<std::int64_t> distance_transform_squared(const BinaryMask& mask);

// Square root of the exact squared transform.
DistanceField distance_transform(const BinaryMask& mask);

// Greedy inscribed-sphere selection: repeatedly pick the uncovered foreground
// element with maximal distance value (ties broken by lexicographically
// smallest (x,y,z)), place a sphere of that radius there, and discard every
// element whose center falls inside it. Stops at max_nodes or when the best
// remaining value drops below r_min. Output is in placement order.
std::vector<SphereNode> select_sphere_nodes(const Grid<std::int64_t>& squared_field,
                                            int max_nodes, double r_min);

// Candidate pair (i,j) iff |c_i - c_j| <= (r_i + r_j) * (1 + tau); accepted
// iff the segment between the centers, sampled at spacing 0.5 element-units,
// rounds to foreground elements all the way. Pairs come out i<j, deduplicated.
std::vector<std::array<int, 2>> connect_sphere_edges(const std::vector<SphereNode>& nodes,
                                                     const BinaryMask& mask, double tau);

struct SnGraphParams {
  int max_nodes = 300;
  double r_min = 1.0;
  double tau = 0.25;
  bool connect_components = false;
};

// Sphere-node skeleton graph: distance transform, greedy node selection, and
// sphere-contact edges composed into one attributed graph. Vertex positions
// are the sphere centers (2D when dims.z() == 1) and the first vertex feature
// column is the sphere radius. When grid is non-null a mean-intensity column
// is appended (averaged over each node's sphere). With connect_components the
// shortest inter-component pair is bridged repeatedly, ignoring line of
// sight, until one component remains.
AttributedGraph sn_graph(const BinaryMask& mask, const VoxelGrid* grid = nullptr,
                         const SnGraphParams& params = {});

}  // namespace skelgraph
