#include "skelgraph/graph.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace skelgraph {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("graph: " + message);
}

}  // namespace

void validate_graph(const AttributedGraph& g) {
  require(g.num_vertices >= 0, "negative vertex count");
  const int n = g.num_vertices;
  std::set<std::pair<int, int>> seen;
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    const int a = g.edges(e, 0), b = g.edges(e, 1);
    require(a >= 0 && a < n && b >= 0 && b < n,
            "edge endpoint out of range at row " + std::to_string(e));
    require(a != b, "self-loop stored at row " + std::to_string(e));
    const auto key = std::minmax(a, b);
    require(seen.insert(key).second, "duplicate unordered edge at row " + std::to_string(e));
  }
  if (g.positions) {
    require(g.positions->rows() == n, "positions row count mismatch");
    require(g.positions->cols() == 2 || g.positions->cols() == 3,
            "positions must have 2 or 3 columns");
  }
  if (g.vertex_features) require(g.vertex_features->rows() == n, "vertex_features row count mismatch");
  if (g.edge_features)
    require(g.edge_features->rows() == g.edges.rows(), "edge_features row count mismatch");
  if (g.vertex_labels) require(g.vertex_labels->size() == n, "vertex_labels size mismatch");
  if (g.part_id) require(g.part_id->size() == n, "part_id size mismatch");
  if (g.vertex_kind) require(g.vertex_kind->size() == n, "vertex_kind size mismatch");
}

std::vector<std::vector<int>> adjacency_list(const AttributedGraph& g) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(g.num_vertices));
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    adj[static_cast<size_t>(g.edges(e, 0))].push_back(g.edges(e, 1));
    adj[static_cast<size_t>(g.edges(e, 1))].push_back(g.edges(e, 0));
  }
  return adj;
}

Eigen::VectorXi vertex_degrees(const AttributedGraph& g) {
  Eigen::VectorXi degrees = Eigen::VectorXi::Zero(g.num_vertices);
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    degrees[g.edges(e, 0)] += 1;
    degrees[g.edges(e, 1)] += 1;
  }
  return degrees;
}

std::vector<int> component_labels(const AttributedGraph& g) {
  std::vector<int> label(static_cast<size_t>(g.num_vertices), -1);
  const auto adj = adjacency_list(g);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.num_vertices; ++s) {
    if (label[static_cast<size_t>(s)] >= 0) continue;
    stack.push_back(s);
    label[static_cast<size_t>(s)] = next;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<size_t>(v)]) {
        if (label[static_cast<size_t>(w)] < 0) {
          label[static_cast<size_t>(w)] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

int connected_components(const AttributedGraph& g) {
  if (g.num_vertices == 0) return 0;
  const auto labels = component_labels(g);
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

}  // namespace skelgraph
