#pragma once

#include <string>
#include <vector>

#include "skelgraph/graph.hpp"
#include "skelgraph/grid.hpp"
#include "skelgraph/mesh.hpp"

namespace skelgraph {

// Feature matrices carry a column layout in graph.meta ("vertex_feature_layout",
// "edge_feature_layout") as comma-separated column names. The canonical vertex
// order is [degree, radius, kind, intensity] and the canonical edge order is
// [length, h, v, s, marker]; optional columns are simply omitted.
std::vector<std::string> feature_layout(const AttributedGraph& g, const std::string& which);
int feature_column(const AttributedGraph& g, const std::string& which, const std::string& name);

// Whole-graph statistics used by the decision-forest baseline.
struct GlobalDescriptor {
  double vertex_count = 0;
  double edge_count = 0;
  double average_degree = 0;
  double fraction_horizontal = 0;
  double fraction_vertical = 0;
  double mean_edge_length = 0;
  double std_edge_length = 0;
  double mean_vertex_intensity = 0;
  double connected_components = 0;
  double cycle_rank = 0;  // edges - vertices + components

  Eigen::VectorXd to_vector() const;
  static const std::vector<std::string>& names();
};

// Per-edge [length, slope one-hot(3)]: an edge whose xy-plane angle to the
// x-axis is within theta_tol degrees is horizontal, within theta_tol of 90 is
// vertical, anything else skew. A marker column, when present, is carried
// over as the last column. with_slope=false keeps lengths (and marker) only,
// which is the right choice for 3D tasks where slopes are not well defined.
void edge_features(AttributedGraph& g, double theta_tol_deg = 15.0, bool with_slope = true);

// Per-vertex [degree, radius?, kind]; the radius column is carried over when
// the graph was produced by the skeletonizer, and an intensity column, when
// already attached, stays last.
void vertex_features(AttributedGraph& g);

// Appends a mean-intensity column: the average grid value over elements
// within distance rho of the vertex position. Skeleton vertices use their own
// sphere radius instead of rho.
void intensity_features(AttributedGraph& g, const VoxelGrid& grid, double rho = 2.0);

GlobalDescriptor global_descriptor(const AttributedGraph& g, double theta_tol_deg = 15.0);

// Disjoint union of two graphs with part_id 0/1, plus a cross edge for every
// inter-part vertex pair at Euclidean distance <= threshold. Cross edges are
// marked by a trailing 0/1 edge-feature column.
AttributedGraph add_proximity_edges(const AttributedGraph& a, const AttributedGraph& b,
                                    double threshold);

// For every mesh vertex with at least one incident triangle, add a new vertex
// at position + scale * unit vertex normal (area-weighted average of incident
// triangle normals), tagged kVertexNormalTip and joined to its origin by one
// edge. The graph must be the 1-skeleton of the mesh, same vertex order.
AttributedGraph add_normal_tips(const AttributedGraph& g, const TriangleMesh& mesh, double scale);

// Per-column z-score statistics, fitted on training graphs only.
struct FeatureStats {
  Eigen::VectorXd vertex_mean, vertex_std;
  Eigen::VectorXd edge_mean, edge_std;
};

FeatureStats fit_feature_stats(const std::vector<AttributedGraph>& train_graphs);

// Applies the z-score in place; columns with std below 1e-12 are left
// unchanged. Applying the same stats twice is not an identity.
void apply_feature_stats(AttributedGraph& g, const FeatureStats& stats);

}  // namespace skelgraph
