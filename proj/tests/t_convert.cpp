#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <utility>

#include "skelgraph/convert.hpp"

using namespace skelgraph;

namespace {

std::set<std::pair<int, int>> edge_set(const AttributedGraph& g) {
  std::set<std::pair<int, int>> out;
  for (Eigen::Index e = 0; e < g.num_edges(); ++e)
    out.insert(std::minmax(g.edges(e, 0), g.edges(e, 1)));
  return out;
}

}  // namespace

TEST_CASE("voxel graph on a 2d plus shape") {
  // . x .
  // x x x
  // . x .
  BinaryMask m(3, 3, 1);
  m.at(1, 0, 0) = 1;
  m.at(0, 1, 0) = m.at(1, 1, 0) = m.at(2, 1, 0) = 1;
  m.at(1, 2, 0) = 1;

  const AttributedGraph g = voxel_to_graph(m);
  CHECK(g.num_vertices == 5);
  CHECK(g.num_edges() == 4);  // center connects to all four arms
  REQUIRE(g.positions);
  CHECK(g.positions->cols() == 2);  // flat volumes give planar positions
  // Scan-order vertex ids: (1,0) first, then (0,1),(1,1),(2,1),(1,2).
  CHECK((*g.positions)(0, 0) == 1.0);
  CHECK((*g.positions)(0, 1) == 0.0);
  const auto edges = edge_set(g);
  CHECK(edges.count({0, 2}));  // (1,0)-(1,1)
  CHECK(edges.count({1, 2}));
  CHECK(edges.count({2, 3}));
  CHECK(edges.count({2, 4}));
  CHECK(!g.vertex_features);
}

TEST_CASE("voxel graph carries intensities when the grid is supplied") {
  VoxelGrid grid(2, 1, 1);
  grid.at(0, 0, 0) = 0.75f;
  grid.at(1, 0, 0) = 0.25f;
  BinaryMask m(2, 1, 1);
  m.at(0, 0, 0) = m.at(1, 0, 0) = 1;

  const AttributedGraph g = voxel_to_graph(m, &grid);
  REQUIRE(g.vertex_features);
  CHECK(g.vertex_features->cols() == 1);
  CHECK((*g.vertex_features)(0, 0) == doctest::Approx(0.75));
  CHECK((*g.vertex_features)(1, 0) == doctest::Approx(0.25));
  CHECK(g.meta.at("vertex_feature_layout") == "intensity");
}

TEST_CASE("voxel graph is 6-connected in 3d") {
  BinaryMask m(2, 2, 2);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) m.at(x, y, z) = 1;
  const AttributedGraph g = voxel_to_graph(m);
  CHECK(g.num_vertices == 8);
  CHECK(g.num_edges() == 12);  // cube edges only, no diagonals
  CHECK(g.positions->cols() == 3);
}

TEST_CASE("mesh graph deduplicates shared sides") {
  TriangleMesh m;
  m.positions.resize(4, 3);
  m.positions << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0.5;
  m.triangles.resize(2, 3);
  m.triangles << 0, 1, 2, 1, 3, 2;  // share side (1,2)

  const AttributedGraph g = mesh_to_graph(m);
  CHECK(g.num_vertices == 4);
  CHECK(g.num_edges() == 5);  // 6 directed-unique sides minus the shared one
  const auto edges = edge_set(g);
  CHECK(edges.count({1, 2}));
  CHECK(edges.count({0, 1}));
  CHECK(edges.count({2, 3}));
}

TEST_CASE("cloud radius graph") {
  PointCloud c;
  c.points.resize(3, 3);
  c.points << 0, 0, 0, 1, 0, 0, 5, 0, 0;

  SUBCASE("euclidean") {
    const AttributedGraph g = cloud_to_graph_radius(c, 1.5);
    CHECK(g.num_vertices == 3);
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}});
  }
  SUBCASE("radius is inclusive") {
    const AttributedGraph g = cloud_to_graph_radius(c, 1.0);
    CHECK(g.num_edges() == 1);
  }
  SUBCASE("manhattan differs from euclidean") {
    PointCloud d;
    d.points.resize(2, 3);
    d.points << 0, 0, 0, 1, 1, 0;  // euclidean sqrt(2), manhattan 2
    CHECK(cloud_to_graph_radius(d, 1.5, Metric::kEuclidean).num_edges() == 1);
    CHECK(cloud_to_graph_radius(d, 1.5, Metric::kManhattan).num_edges() == 0);
  }
}

TEST_CASE("cloud knn graph is a symmetrized union") {
  PointCloud c;
  c.points.resize(4, 3);
  c.points << 0, 0, 0, 1, 0, 0, 2, 0, 0, 10, 0, 0;

  const AttributedGraph g = cloud_to_graph_knn(c, 1);
  // 0->1, 1->0 (tie broken low), 2->1, 3->2; union gives three edges.
  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("feature metric uses feature rows and demands them") {
  PointCloud c;
  c.points.resize(3, 3);
  c.points << 0, 0, 0, 100, 0, 0, 0, 200, 0;

  SUBCASE("missing features throw") {
    CHECK_THROWS(cloud_to_graph_radius(c, 1.0, Metric::kFeatureEuclidean));
  }
  SUBCASE("nearby feature rows connect distant points") {
    c.features = Eigen::MatrixXd{{0.0}, {0.5}, {9.0}};
    const AttributedGraph g = cloud_to_graph_radius(c, 1.0, Metric::kFeatureEuclidean);
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}});
  }
}

TEST_CASE("metric names parse and unknown names throw") {
  CHECK(metric_from_string("euclidean") == Metric::kEuclidean);
  CHECK(metric_from_string("manhattan") == Metric::kManhattan);
  CHECK(metric_from_string("feature-euclidean") == Metric::kFeatureEuclidean);
  CHECK_THROWS(metric_from_string("chebyshev"));
}
