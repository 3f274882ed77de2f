#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <unistd.h>

#include "skelgraph/io.hpp"
#include "skelgraph/rng.hpp"

using namespace skelgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("skelgraph_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("volume round trip is bit exact") {
  TempDir dir;
  VoxelGrid g(7, 5, 3);
  Rng rng(42);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g.values[i] = static_cast<float>(rng.uniform01());

  write_volume(g, dir.file("vol"));
  CHECK(fs::exists(dir.file("vol.vol.json")));
  CHECK(fs::exists(dir.file("vol.vol.bin")));
  CHECK(fs::file_size(dir.file("vol.vol.bin")) == 7u * 5u * 3u * 4u);

  SUBCASE("read by stem") {
    const VoxelGrid back = read_volume(dir.file("vol"));
    REQUIRE(back.dims == g.dims);
    for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(back.values[i] == g.values[i]);
  }
  SUBCASE("read by header path") {
    const VoxelGrid back = read_volume(dir.file("vol.vol.json"));
    CHECK(back.dims == g.dims);
    CHECK((back.values == g.values).all());
  }
}

TEST_CASE("volume header validation") {
  TempDir dir;
  VoxelGrid g(2, 2, 1);
  write_volume(g, dir.file("v"));

  SUBCASE("wrong dtype") {
    write_text(dir.file("v.vol.json"),
               R"({"dims":[2,2,1],"dtype":"f64le","order":"x-fastest"})");
    CHECK_THROWS(read_volume(dir.file("v")));
  }
  SUBCASE("wrong order") {
    write_text(dir.file("v.vol.json"),
               R"({"dims":[2,2,1],"dtype":"f32le","order":"z-fastest"})");
    CHECK_THROWS(read_volume(dir.file("v")));
  }
  SUBCASE("size mismatch names both sizes") {
    write_text(dir.file("v.vol.json"),
               R"({"dims":[3,2,1],"dtype":"f32le","order":"x-fastest"})");
    try {
      read_volume(dir.file("v"));
      FAIL("expected a size mismatch error");
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      CHECK(msg.find("24") != std::string::npos);
      CHECK(msg.find("16") != std::string::npos);
    }
  }
  SUBCASE("missing raw file") {
    fs::remove(dir.file("v.vol.bin"));
    CHECK_THROWS(read_volume(dir.file("v")));
  }
  SUBCASE("non-finite payload") {
    VoxelGrid bad(1, 1, 1);
    bad.values[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS(write_volume(bad, dir.file("bad")));
  }
}

TEST_CASE("off mesh round trip") {
  TempDir dir;
  TriangleMesh m;
  m.positions.resize(4, 3);
  m.positions << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  m.triangles.resize(2, 3);
  m.triangles << 0, 1, 2, 0, 2, 3;

  write_mesh_off(m, dir.file("m.off"));
  const TriangleMesh back = read_mesh(dir.file("m.off"));
  REQUIRE(back.positions.rows() == 4);
  REQUIRE(back.triangles.rows() == 2);
  CHECK((back.positions - m.positions).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.triangles.array() == m.triangles.array()).all());
}

TEST_CASE("off parser details") {
  TempDir dir;
  SUBCASE("comments and blank lines are skipped") {
    write_text(dir.file("c.off"),
               "OFF\n# a comment\n\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const TriangleMesh m = read_mesh(dir.file("c.off"));
    CHECK(m.positions.rows() == 3);
    CHECK(m.triangles.rows() == 1);
  }
  SUBCASE("non-triangular face is rejected by name") {
    write_text(dir.file("q.off"),
               "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    try {
      read_mesh(dir.file("q.off"));
      FAIL("expected a face arity error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("non-triangular face") != std::string::npos);
    }
  }
  SUBCASE("vertex index out of range") {
    write_text(dir.file("r.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
    CHECK_THROWS(read_mesh(dir.file("r.off")));
  }
  SUBCASE("headerless variant is accepted") {
    write_text(dir.file("n.off"), "3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const TriangleMesh m = read_mesh(dir.file("n.off"));
    CHECK(m.positions.rows() == 3);
    CHECK(m.triangles.rows() == 1);
  }
  SUBCASE("garbage header is rejected") {
    write_text(dir.file("g.off"), "banana\n0 0 0\n");
    CHECK_THROWS(read_mesh(dir.file("g.off")));
  }
}

TEST_CASE("obj parser reads the v/f subset") {
  TempDir dir;
  SUBCASE("plain and slashed face entries") {
    write_text(dir.file("m.obj"),
               "# header\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
               "vn 0 0 1\nvt 0 0\ns off\ng lump\n"
               "f 1 2 3\nf 1/1 3/1 4/1\nf 2//1 3//1 4//1\n");
    const TriangleMesh m = read_mesh(dir.file("m.obj"));
    REQUIRE(m.positions.rows() == 4);
    REQUIRE(m.triangles.rows() == 3);
    CHECK(m.triangles(0, 0) == 0);  // 1-based rebased
    CHECK(m.triangles(2, 2) == 3);
  }
  SUBCASE("quad faces are rejected") {
    write_text(dir.file("q.obj"), "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    CHECK_THROWS(read_mesh(dir.file("q.obj")));
  }
  SUBCASE("index zero is out of range") {
    write_text(dir.file("z.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
    CHECK_THROWS(read_mesh(dir.file("z.obj")));
  }
}

TEST_CASE("point clouds") {
  TempDir dir;
  SUBCASE("coordinates plus features") {
    write_text(dir.file("p.txt"),
               "# cloud\n0 0 0 1.5 2.5\n1 2 3 0.5 0.25\n\n4 5 6 7 8\n");
    const PointCloud c = read_point_cloud(dir.file("p.txt"));
    REQUIRE(c.points.rows() == 3);
    REQUIRE(c.features);
    CHECK(c.features->cols() == 2);
    CHECK(c.points(1, 2) == 3.0);
    CHECK((*c.features)(0, 1) == 2.5);
  }
  SUBCASE("bare coordinates have no features") {
    write_text(dir.file("b.txt"), "0 0 0\n1 1 1\n");
    const PointCloud c = read_point_cloud(dir.file("b.txt"));
    CHECK(c.points.rows() == 2);
    CHECK(!c.features);
  }
  SUBCASE("inconsistent column count is rejected") {
    write_text(dir.file("i.txt"), "0 0 0 1\n1 1 1\n");
    try {
      read_point_cloud(dir.file("i.txt"));
      FAIL("expected a column count error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("column count") != std::string::npos);
    }
  }
  SUBCASE("fewer than three columns is rejected") {
    write_text(dir.file("s.txt"), "0 1\n");
    CHECK_THROWS(read_point_cloud(dir.file("s.txt")));
  }
}

TEST_CASE("graph json round trip preserves everything") {
  TempDir dir;
  AttributedGraph g;
  g.num_vertices = 3;
  g.positions = Eigen::MatrixXd{{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}};
  g.vertex_features = Eigen::MatrixXd{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  g.edges = Eigen::MatrixX2i{{0, 1}, {1, 2}};
  g.edge_features = Eigen::MatrixXd{{0.125}, {0.375}};
  g.vertex_labels = Eigen::VectorXd{{1.0, 0.0, 1.0}};
  g.graph_label = 1.0;
  g.part_id = Eigen::VectorXi{{0, 0, 1}};
  g.vertex_kind = Eigen::VectorXi{{0, 0, 1}};
  g.meta["layout"] = "demo";

  write_graph(g, dir.file("g.graph.json"));
  const AttributedGraph back = read_graph(dir.file("g.graph.json"));
  CHECK(back.num_vertices == 3);
  CHECK((*back.positions - *g.positions).cwiseAbs().maxCoeff() == 0.0);
  CHECK((*back.vertex_features - *g.vertex_features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.edges.array() == g.edges.array()).all());
  CHECK((*back.edge_features - *g.edge_features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((*back.vertex_labels - *g.vertex_labels).cwiseAbs().maxCoeff() == 0.0);
  CHECK(*back.graph_label == 1.0);
  CHECK((back.part_id->array() == g.part_id->array()).all());
  CHECK((back.vertex_kind->array() == g.vertex_kind->array()).all());
  CHECK(back.meta.at("layout") == "demo");

  SUBCASE("irrational values survive exactly") {
    AttributedGraph h;
    h.num_vertices = 1;
    h.positions = Eigen::MatrixXd{{std::sqrt(2.0), std::atan(1.0) * 4.0, 1.0 / 3.0}};
    write_graph(h, dir.file("h.graph.json"));
    const AttributedGraph hb = read_graph(dir.file("h.graph.json"));
    CHECK((*hb.positions)(0, 0) == std::sqrt(2.0));
    CHECK((*hb.positions)(0, 1) == std::atan(1.0) * 4.0);
    CHECK((*hb.positions)(0, 2) == 1.0 / 3.0);
  }
}

TEST_CASE("absent optionals are null and come back absent") {
  TempDir dir;
  AttributedGraph g;
  g.num_vertices = 2;
  g.edges = Eigen::MatrixX2i{{0, 1}};
  write_graph(g, dir.file("n.graph.json"));

  std::ifstream in(dir.file("n.graph.json"));
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  CHECK(text.find("\"graph_label\":null") != std::string::npos);
  CHECK(text.find("\"positions\":null") != std::string::npos);

  const AttributedGraph back = read_graph(dir.file("n.graph.json"));
  CHECK(back.num_vertices == 2);
  CHECK(!back.positions);
  CHECK(!back.vertex_features);
  CHECK(!back.graph_label);
  CHECK(!back.vertex_labels);
  CHECK(back.num_edges() == 1);
}

TEST_CASE("graph validation failures") {
  TempDir dir;
  SUBCASE("edge endpoint out of range") {
    write_text(dir.file("bad.graph.json"),
               R"({"num_vertices": 2, "positions": null, "vertex_features": null,
                   "edges": [[0, 5]], "edge_features": null, "vertex_labels": null,
                   "graph_label": null, "part_id": null, "vertex_kind": null, "meta": {}})");
    CHECK_THROWS(read_graph(dir.file("bad.graph.json")));
  }
  SUBCASE("missing required key") {
    write_text(dir.file("k.graph.json"), R"({"num_vertices": 1})");
    CHECK_THROWS(read_graph(dir.file("k.graph.json")));
  }
  SUBCASE("self loop rejected on write") {
    AttributedGraph g;
    g.num_vertices = 2;
    g.edges = Eigen::MatrixX2i{{1, 1}};
    CHECK_THROWS(write_graph(g, dir.file("x.graph.json")));
  }
  SUBCASE("duplicate unordered edge rejected") {
    AttributedGraph g;
    g.num_vertices = 2;
    g.edges = Eigen::MatrixX2i{{0, 1}, {1, 0}};
    CHECK_THROWS(validate_graph(g));
  }
  SUBCASE("misaligned feature rows rejected") {
    AttributedGraph g;
    g.num_vertices = 3;
    g.vertex_features = Eigen::MatrixXd::Zero(2, 4);
    CHECK_THROWS(validate_graph(g));
  }
}
