#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skelgraph {

// Vertex kinds stored in AttributedGraph::vertex_kind.
inline constexpr int kVertexRegular = 0;
inline constexpr int kVertexNormalTip = 1;

// The central exchange type: vertices with optional positions, features and
// labels, plus undirected edges with optional feature rows. Edges are stored
// as written; helpers treat (i,j) and (j,i) as the same edge.
struct AttributedGraph {
  int num_vertices = 0;
  std::optional<Eigen::MatrixXd> positions;        // n x 2 or n x 3
  std::optional<Eigen::MatrixXd> vertex_features;  // n x dv
  Eigen::MatrixX2i edges;                          // m x 2
  std::optional<Eigen::MatrixXd> edge_features;    // m x de
  std::optional<Eigen::VectorXd> vertex_labels;    // n
  std::optional<double> graph_label;
  std::optional<Eigen::VectorXi> part_id;          // n, 0/1 part membership
  std::optional<Eigen::VectorXi> vertex_kind;      // n, kVertexRegular/kVertexNormalTip
  std::map<std::string, std::string> meta;

  Eigen::Index num_edges() const { return edges.rows(); }
};

// Throws std::invalid_argument on any invariant violation: edge endpoint out
// of range or self-referential, duplicate unordered edge, misaligned rows.
void validate_graph(const AttributedGraph& g);

// Neighbor lists without self-loops; each undirected edge appears on both ends.
std::vector<std::vector<int>> adjacency_list(const AttributedGraph& g);

Eigen::VectorXi vertex_degrees(const AttributedGraph& g);

int connected_components(const AttributedGraph& g);

// Per-vertex component id in [0, connected_components).
std::vector<int> component_labels(const AttributedGraph& g);

}  // namespace skelgraph
