#include "skelgraph/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace skelgraph {

using nlohmann::json;

namespace {

std::string volume_stem(const std::string& path) {
  const std::string suffix = ".vol.json";
  if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json parse_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("malformed JSON in " + path);
  return j;
}

void check_finite(const VoxelGrid& grid, const std::string& path) {
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    if (!std::isfinite(grid.values[i]))
      throw std::runtime_error("non-finite value in volume " + path);
}

// Matrix/vector <-> JSON arrays (row per entry for matrices).
json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::runtime_error("graph schema: " + key + " must be an array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  if (!j[0].is_array()) throw std::runtime_error("graph schema: " + key + " rows must be arrays");
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw std::runtime_error("graph schema: ragged rows in " + key);
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

VoxelGrid read_volume(const std::string& path) {
  const std::string stem = volume_stem(path);
  const json header = parse_json_file(stem + ".vol.json");
  if (!header.contains("dims") || !header.contains("dtype") || !header.contains("order"))
    throw std::runtime_error("malformed volume header " + stem + ".vol.json: missing keys");
  if (header["dtype"] != "f32le" || header["order"] != "x-fastest")
    throw std::runtime_error("unsupported volume encoding in " + stem + ".vol.json");
  const auto dims = header["dims"];
  if (!dims.is_array() || dims.size() != 3)
    throw std::runtime_error("malformed dims in " + stem + ".vol.json");
  const int nx = dims[0].get<int>(), ny = dims[1].get<int>(), nz = dims[2].get<int>();
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw std::runtime_error("non-positive dims in " + stem + ".vol.json");

  std::ifstream raw(stem + ".vol.bin", std::ios::binary);
  if (!raw) throw std::runtime_error("cannot open " + stem + ".vol.bin");
  raw.seekg(0, std::ios::end);
  const std::streamoff bytes = raw.tellg();
  raw.seekg(0, std::ios::beg);
  const std::streamoff expected =
      static_cast<std::streamoff>(nx) * ny * nz * static_cast<std::streamoff>(sizeof(float));
  if (bytes != expected)
    throw std::runtime_error("volume size mismatch for " + stem + ": header declares " +
                             std::to_string(expected) + " bytes, raw file has " +
                             std::to_string(bytes));

  VoxelGrid grid(nx, ny, nz);
  raw.read(reinterpret_cast<char*>(grid.values.data()), expected);
  if (!raw) throw std::runtime_error("short read from " + stem + ".vol.bin");
  check_finite(grid, stem);
  return grid;
}

void write_volume(const VoxelGrid& grid, const std::string& path) {
  check_finite(grid, path);
  const std::string stem = volume_stem(path);
  json header = {{"dims", {grid.dims.x(), grid.dims.y(), grid.dims.z()}},
                 {"dtype", "f32le"},
                 {"order", "x-fastest"}};
  std::ofstream hdr(stem + ".vol.json");
  if (!hdr) throw std::runtime_error("cannot write " + stem + ".vol.json");
  hdr << header.dump() << "\n";
  std::ofstream raw(stem + ".vol.bin", std::ios::binary);
  if (!raw) throw std::runtime_error("cannot write " + stem + ".vol.bin");
  raw.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.size() * sizeof(float)));
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

TriangleMesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string token;
  std::string line;
  int line_no = 0;
  // Collect meaningful tokens line by line so errors can name the line.
  auto next_line_tokens = [&](std::vector<std::string>& tokens) -> bool {
    tokens.clear();
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> tokens;
  if (!next_line_tokens(tokens)) throw std::runtime_error(path + ": empty OFF file");
  size_t cursor = 0;
  if (tokens[0] == "OFF") {
    ++cursor;
    if (cursor >= tokens.size()) {
      if (!next_line_tokens(tokens)) parse_fail(path, line_no, "missing counts");
      cursor = 0;
    }
  }
  if (tokens.size() - cursor < 3) parse_fail(path, line_no, "expected vertex/face/edge counts");
  long nv = 0, nf = 0;
  try {
    nv = std::stol(tokens[cursor]);
    nf = std::stol(tokens[cursor + 1]);
  } catch (const std::exception&) {
    parse_fail(path, line_no, "bad counts");
  }
  if (nv < 0 || nf < 0) parse_fail(path, line_no, "negative counts");

  TriangleMesh mesh;
  mesh.positions.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    if (!next_line_tokens(tokens)) parse_fail(path, line_no, "unexpected end of file in vertices");
    if (tokens.size() < 3) parse_fail(path, line_no, "vertex line needs 3 coordinates");
    try {
      for (int c = 0; c < 3; ++c) mesh.positions(v, c) = std::stod(tokens[static_cast<size_t>(c)]);
    } catch (const std::exception&) {
      parse_fail(path, line_no, "bad vertex coordinate");
    }
  }
  mesh.triangles.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    if (!next_line_tokens(tokens)) parse_fail(path, line_no, "unexpected end of file in faces");
    long arity = 0;
    try {
      arity = std::stol(tokens[0]);
    } catch (const std::exception&) {
      parse_fail(path, line_no, "bad face arity");
    }
    if (arity != 3) parse_fail(path, line_no, "non-triangular face");
    if (tokens.size() < 4) parse_fail(path, line_no, "face line needs 3 indices");
    for (int c = 0; c < 3; ++c) {
      long idx = 0;
      try {
        idx = std::stol(tokens[static_cast<size_t>(c + 1)]);
      } catch (const std::exception&) {
        parse_fail(path, line_no, "bad face index");
      }
      if (idx < 0 || idx >= nv) parse_fail(path, line_no, "face index out of range");
      mesh.triangles(f, c) = static_cast<int>(idx);
    }
  }
  return mesh;
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3i> triangles;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) parse_fail(path, line_no, "bad vertex line");
      positions.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string entry;
      while (ls >> entry) {
        // Accept "i", "i/t", "i/t/n", "i//n": the vertex index is the leading integer.
        const size_t slash = entry.find('/');
        const std::string head = slash == std::string::npos ? entry : entry.substr(0, slash);
        long i = 0;
        try {
          i = std::stol(head);
        } catch (const std::exception&) {
          parse_fail(path, line_no, "bad face index '" + entry + "'");
        }
        if (i < 1 || i > static_cast<long>(positions.size()))
          parse_fail(path, line_no, "face index out of range");
        idx.push_back(i - 1);  // OBJ is 1-based
      }
      if (idx.size() != 3) parse_fail(path, line_no, "non-triangular face");
      triangles.emplace_back(static_cast<int>(idx[0]), static_cast<int>(idx[1]),
                             static_cast<int>(idx[2]));
    }
    // Other tags (vn, vt, o, g, s, usemtl, ...) are ignored.
  }
  TriangleMesh mesh;
  mesh.positions.resize(static_cast<Eigen::Index>(positions.size()), 3);
  for (size_t i = 0; i < positions.size(); ++i) mesh.positions.row(static_cast<Eigen::Index>(i)) = positions[i];
  mesh.triangles.resize(static_cast<Eigen::Index>(triangles.size()), 3);
  for (size_t i = 0; i < triangles.size(); ++i) mesh.triangles.row(static_cast<Eigen::Index>(i)) = triangles[i];
  return mesh;
}

}  // namespace

TriangleMesh read_mesh(const std::string& path) {
  TriangleMesh mesh = has_suffix(path, ".obj") ? read_obj(path) : read_off(path);
  validate_mesh(mesh);
  return mesh;
}

void write_mesh_off(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "OFF\n" << mesh.positions.rows() << " " << mesh.triangles.rows() << " 0\n";
  for (Eigen::Index v = 0; v < mesh.positions.rows(); ++v)
    out << mesh.positions(v, 0) << " " << mesh.positions(v, 1) << " " << mesh.positions(v, 2) << "\n";
  for (Eigen::Index f = 0; f < mesh.triangles.rows(); ++f)
    out << "3 " << mesh.triangles(f, 0) << " " << mesh.triangles(f, 1) << " "
        << mesh.triangles(f, 2) << "\n";
}

PointCloud read_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  Eigen::Index width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) parse_fail(path, line_no, "bad number");
    if (row.empty()) continue;
    if (row.size() < 3) parse_fail(path, line_no, "point line needs at least x y z");
    if (width < 0) width = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != width)
      parse_fail(path, line_no, "inconsistent column count (expected " + std::to_string(width) + ")");
    rows.push_back(std::move(row));
  }
  PointCloud cloud;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  cloud.points.resize(n, 3);
  if (width > 3) cloud.features = Eigen::MatrixXd(n, width - 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) cloud.points(i, c) = rows[static_cast<size_t>(i)][static_cast<size_t>(c)];
    if (width > 3)
      for (Eigen::Index c = 3; c < width; ++c)
        (*cloud.features)(i, c - 3) = rows[static_cast<size_t>(i)][static_cast<size_t>(c)];
  }
  validate_cloud(cloud);
  return cloud;
}

AttributedGraph read_graph(const std::string& path) {
  const json j = parse_json_file(path);
  for (const char* key : {"num_vertices", "positions", "vertex_features", "edges", "edge_features",
                          "vertex_labels", "graph_label", "part_id", "vertex_kind", "meta"})
    if (!j.contains(key)) throw std::runtime_error("graph schema: missing key '" + std::string(key) + "' in " + path);

  AttributedGraph g;
  g.num_vertices = j["num_vertices"].get<int>();
  if (!j["positions"].is_null()) g.positions = matrix_from_json(j["positions"], "positions");
  if (!j["vertex_features"].is_null())
    g.vertex_features = matrix_from_json(j["vertex_features"], "vertex_features");
  {
    const auto& edges = j["edges"];
    if (!edges.is_array()) throw std::runtime_error("graph schema: edges must be an array");
    g.edges.resize(static_cast<Eigen::Index>(edges.size()), 2);
    for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
      if (!edges[e].is_array() || edges[e].size() != 2)
        throw std::runtime_error("graph schema: edge rows must be index pairs");
      g.edges(e, 0) = edges[e][0].get<int>();
      g.edges(e, 1) = edges[e][1].get<int>();
    }
  }
  if (!j["edge_features"].is_null()) {
    Eigen::MatrixXd ef = matrix_from_json(j["edge_features"], "edge_features");
    if (ef.rows() == 0) ef.resize(0, 0);
    g.edge_features = std::move(ef);
  }
  if (!j["vertex_labels"].is_null()) {
    const auto& labels = j["vertex_labels"];
    Eigen::VectorXd v(static_cast<Eigen::Index>(labels.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = labels[i].get<double>();
    g.vertex_labels = std::move(v);
  }
  if (!j["graph_label"].is_null()) g.graph_label = j["graph_label"].get<double>();
  if (!j["part_id"].is_null()) {
    const auto& ids = j["part_id"];
    Eigen::VectorXi v(static_cast<Eigen::Index>(ids.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = ids[i].get<int>();
    g.part_id = std::move(v);
  }
  if (!j["vertex_kind"].is_null()) {
    const auto& kinds = j["vertex_kind"];
    Eigen::VectorXi v(static_cast<Eigen::Index>(kinds.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = kinds[i].get<int>();
    g.vertex_kind = std::move(v);
  }
  if (!j["meta"].is_null())
    for (const auto& [key, value] : j["meta"].items()) g.meta[key] = value.get<std::string>();
  validate_graph(g);
  return g;
}

void write_graph(const AttributedGraph& g, const std::string& path) {
  validate_graph(g);
  json j;
  j["num_vertices"] = g.num_vertices;
  j["positions"] = g.positions ? matrix_to_json(*g.positions) : json(nullptr);
  j["vertex_features"] = g.vertex_features ? matrix_to_json(*g.vertex_features) : json(nullptr);
  {
    json edges = json::array();
    for (Eigen::Index e = 0; e < g.edges.rows(); ++e)
      edges.push_back({g.edges(e, 0), g.edges(e, 1)});
    j["edges"] = std::move(edges);
  }
  j["edge_features"] = g.edge_features ? matrix_to_json(*g.edge_features) : json(nullptr);
  if (g.vertex_labels) {
    json labels = json::array();
    for (Eigen::Index i = 0; i < g.vertex_labels->size(); ++i) labels.push_back((*g.vertex_labels)[i]);
    j["vertex_labels"] = std::move(labels);
  } else {
    j["vertex_labels"] = nullptr;
  }
  j["graph_label"] = g.graph_label ? json(*g.graph_label) : json(nullptr);
  if (g.part_id) {
    json ids = json::array();
    for (Eigen::Index i = 0; i < g.part_id->size(); ++i) ids.push_back((*g.part_id)[i]);
    j["part_id"] = std::move(ids);
  } else {
    j["part_id"] = nullptr;
  }
  if (g.vertex_kind) {
    json kinds = json::array();
    for (Eigen::Index i = 0; i < g.vertex_kind->size(); ++i) kinds.push_back((*g.vertex_kind)[i]);
    j["vertex_kind"] = std::move(kinds);
  } else {
    j["vertex_kind"] = nullptr;
  }
  j["meta"] = json::object();
  for (const auto& [key, value] : g.meta) j["meta"][key] = value;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

}  // namespace skelgraph
