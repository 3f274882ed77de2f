#include "skelgraph/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace skelgraph {

namespace {

std::string layout_key(const std::string& which) {
  if (which == "vertex") return "vertex_feature_layout";
  if (which == "edge") return "edge_feature_layout";
  throw std::invalid_argument("feature layout selector must be 'vertex' or 'edge'");
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += names[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> feature_layout(const AttributedGraph& g, const std::string& which) {
  const auto it = g.meta.find(layout_key(which));
  std::vector<std::string> names;
  if (it == g.meta.end()) return names;
  std::istringstream in(it->second);
  std::string name;
  while (std::getline(in, name, ','))
    if (!name.empty()) names.push_back(name);
  return names;
}

int feature_column(const AttributedGraph& g, const std::string& which, const std::string& name) {
  const std::vector<std::string> names = feature_layout(g, which);
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

Eigen::VectorXd GlobalDescriptor::to_vector() const {
  Eigen::VectorXd v(10);
  v << vertex_count, edge_count, average_degree, fraction_horizontal, fraction_vertical,
      mean_edge_length, std_edge_length, mean_vertex_intensity, connected_components, cycle_rank;
  return v;
}

const std::vector<std::string>& GlobalDescriptor::names() {
  static const std::vector<std::string> kNames = {
      "vertex_count",     "edge_count",      "average_degree",
      "fraction_horizontal", "fraction_vertical", "mean_edge_length",
      "std_edge_length",  "mean_vertex_intensity", "connected_components",
      "cycle_rank"};
  return kNames;
}

namespace {

enum class Slope { kHorizontal, kVertical, kSkew };

// Classified by the angle the edge makes with the x-axis in the xy-plane;
// zero-length edges count as horizontal.
Slope classify_slope(const Eigen::RowVectorXd& pa, const Eigen::RowVectorXd& pb,
                     double theta_tol_deg) {
  const double dx = std::abs(pb[0] - pa[0]);
  const double dy = std::abs(pb[1] - pa[1]);
  const double angle = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  if (angle <= theta_tol_deg) return Slope::kHorizontal;
  if (angle >= 90.0 - theta_tol_deg) return Slope::kVertical;
  return Slope::kSkew;
}

}  // namespace

void edge_features(AttributedGraph& g, double theta_tol_deg, bool with_slope) {
  validate_graph(g);
  if (!g.positions) throw std::invalid_argument("edge features need vertex positions");
  const int marker_col = feature_column(g, "edge", "marker");
  if (marker_col >= 0 && (!g.edge_features || g.edge_features->cols() <= marker_col))
    throw std::invalid_argument("edge feature layout names a marker column that is missing");

  const Eigen::Index m = g.edges.rows();
  const int cols = (with_slope ? 4 : 1) + (marker_col >= 0 ? 1 : 0);
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(m, cols);
  for (Eigen::Index e = 0; e < m; ++e) {
    const Eigen::RowVectorXd pa = g.positions->row(g.edges(e, 0));
    const Eigen::RowVectorXd pb = g.positions->row(g.edges(e, 1));
    features(e, 0) = (pb - pa).norm();
    if (with_slope) {
      switch (classify_slope(pa, pb, theta_tol_deg)) {
        case Slope::kHorizontal: features(e, 1) = 1.0; break;
        case Slope::kVertical: features(e, 2) = 1.0; break;
        case Slope::kSkew: features(e, 3) = 1.0; break;
      }
    }
    if (marker_col >= 0) features(e, cols - 1) = (*g.edge_features)(e, marker_col);
  }
  g.edge_features = std::move(features);
  std::vector<std::string> layout = with_slope
                                        ? std::vector<std::string>{"length", "h", "v", "s"}
                                        : std::vector<std::string>{"length"};
  if (marker_col >= 0) layout.push_back("marker");
  g.meta["edge_feature_layout"] = join(layout);
}

void vertex_features(AttributedGraph& g) {
  validate_graph(g);
  const int radius_col = feature_column(g, "vertex", "radius");
  const int intensity_col = feature_column(g, "vertex", "intensity");
  const Eigen::VectorXi degrees = vertex_degrees(g);

  const int n = g.num_vertices;
  std::vector<std::string> layout = {"degree"};
  if (radius_col >= 0) layout.push_back("radius");
  layout.push_back("kind");
  if (intensity_col >= 0) layout.push_back("intensity");

  Eigen::MatrixXd features(n, static_cast<Eigen::Index>(layout.size()));
  for (int v = 0; v < n; ++v) {
    int c = 0;
    features(v, c++) = degrees[v];
    if (radius_col >= 0) features(v, c++) = (*g.vertex_features)(v, radius_col);
    features(v, c++) = g.vertex_kind ? (*g.vertex_kind)[v] : kVertexRegular;
    if (intensity_col >= 0) features(v, c++) = (*g.vertex_features)(v, intensity_col);
  }
  g.vertex_features = std::move(features);
  g.meta["vertex_feature_layout"] = join(layout);
}

void intensity_features(AttributedGraph& g, const VoxelGrid& grid, double rho) {
  validate_graph(g);
  if (!g.positions) throw std::invalid_argument("intensity features need vertex positions");
  const int radius_col = feature_column(g, "vertex", "radius");

  const int n = g.num_vertices;
  Eigen::VectorXd intensity(n);
  for (int v = 0; v < n; ++v) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (Eigen::Index c = 0; c < g.positions->cols(); ++c) p[c] = (*g.positions)(v, c);
    const double r = radius_col >= 0 ? (*g.vertex_features)(v, radius_col) : rho;
    const double rsq = r * r + 1e-9;
    double total = 0.0;
    int count = 0;
    for (int z = std::max(0, static_cast<int>(std::ceil(p.z() - r)));
         z <= std::min(grid.dims.z() - 1, static_cast<int>(std::floor(p.z() + r))); ++z)
      for (int y = std::max(0, static_cast<int>(std::ceil(p.y() - r)));
           y <= std::min(grid.dims.y() - 1, static_cast<int>(std::floor(p.y() + r))); ++y)
        for (int x = std::max(0, static_cast<int>(std::ceil(p.x() - r)));
             x <= std::min(grid.dims.x() - 1, static_cast<int>(std::floor(p.x() + r))); ++x) {
          const Eigen::Vector3d d = Eigen::Vector3d(x, y, z) - p;
          if (d.squaredNorm() > rsq) continue;
          total += grid.at(x, y, z);
          ++count;
        }
    intensity[v] = count ? total / count : 0.0;
  }

  std::vector<std::string> layout = feature_layout(g, "vertex");
  if (g.vertex_features) {
    Eigen::MatrixXd features(n, g.vertex_features->cols() + 1);
    features.leftCols(g.vertex_features->cols()) = *g.vertex_features;
    features.col(features.cols() - 1) = intensity;
    g.vertex_features = std::move(features);
  } else {
    g.vertex_features = intensity;
    layout.clear();
  }
  layout.push_back("intensity");
  g.meta["vertex_feature_layout"] = join(layout);
}

GlobalDescriptor global_descriptor(const AttributedGraph& g, double theta_tol_deg) {
  validate_graph(g);
  GlobalDescriptor d;
  const Eigen::Index n = g.num_vertices, m = g.edges.rows();
  d.vertex_count = static_cast<double>(n);
  d.edge_count = static_cast<double>(m);
  d.average_degree = n > 0 ? 2.0 * static_cast<double>(m) / static_cast<double>(n) : 0.0;
  d.connected_components = connected_components(g);
  d.cycle_rank = static_cast<double>(m) - static_cast<double>(n) + d.connected_components;

  if (m > 0) {
    if (!g.positions) throw std::invalid_argument("global descriptor needs vertex positions");
    Eigen::VectorXd lengths(m);
    Eigen::Index horizontal = 0, vertical = 0;
    for (Eigen::Index e = 0; e < m; ++e) {
      const Eigen::RowVectorXd pa = g.positions->row(g.edges(e, 0));
      const Eigen::RowVectorXd pb = g.positions->row(g.edges(e, 1));
      lengths[e] = (pb - pa).norm();
      switch (classify_slope(pa, pb, theta_tol_deg)) {
        case Slope::kHorizontal: ++horizontal; break;
        case Slope::kVertical: ++vertical; break;
        case Slope::kSkew: break;
      }
    }
    d.fraction_horizontal = static_cast<double>(horizontal) / static_cast<double>(m);
    d.fraction_vertical = static_cast<double>(vertical) / static_cast<double>(m);
    d.mean_edge_length = lengths.mean();
    d.std_edge_length = std::sqrt((lengths.array() - d.mean_edge_length).square().mean());
  }

  const int intensity_col = feature_column(g, "vertex", "intensity");
  if (intensity_col >= 0 && n > 0)
    d.mean_vertex_intensity = g.vertex_features->col(intensity_col).mean();
  return d;
}

namespace {

std::string meta_or_empty(const AttributedGraph& g, const std::string& key) {
  const auto it = g.meta.find(key);
  return it == g.meta.end() ? std::string() : it->second;
}

}  // namespace

AttributedGraph add_proximity_edges(const AttributedGraph& a, const AttributedGraph& b,
                                    double threshold) {
  validate_graph(a);
  validate_graph(b);
  if (!a.positions || !b.positions)
    throw std::invalid_argument("proximity edges need vertex positions on both graphs");
  if (a.positions->cols() != b.positions->cols())
    throw std::invalid_argument("position dimensionality mismatch between the two graphs");
  if (a.vertex_features.has_value() != b.vertex_features.has_value() ||
      (a.vertex_features && a.vertex_features->cols() != b.vertex_features->cols()))
    throw std::invalid_argument("vertex feature mismatch between the two graphs");
  if (meta_or_empty(a, "vertex_feature_layout") != meta_or_empty(b, "vertex_feature_layout") ||
      meta_or_empty(a, "edge_feature_layout") != meta_or_empty(b, "edge_feature_layout"))
    throw std::invalid_argument("feature layout mismatch between the two graphs");
  if (a.edge_features.has_value() != b.edge_features.has_value() ||
      (a.edge_features && a.edge_features->cols() != b.edge_features->cols()))
    throw std::invalid_argument("edge feature mismatch between the two graphs");

  const int na = a.num_vertices, nb = b.num_vertices;
  AttributedGraph g;
  g.num_vertices = na + nb;
  Eigen::MatrixXd positions(na + nb, a.positions->cols());
  positions.topRows(na) = *a.positions;
  positions.bottomRows(nb) = *b.positions;
  g.positions = std::move(positions);

  if (a.vertex_features) {
    Eigen::MatrixXd features(na + nb, a.vertex_features->cols());
    features.topRows(na) = *a.vertex_features;
    features.bottomRows(nb) = *b.vertex_features;
    g.vertex_features = std::move(features);
  }

  std::vector<std::pair<int, int>> cross;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if ((a.positions->row(i) - b.positions->row(j)).norm() <= threshold)
        cross.emplace_back(i, na + j);

  const Eigen::Index ma = a.edges.rows(), mb = b.edges.rows();
  const Eigen::Index m = ma + mb + static_cast<Eigen::Index>(cross.size());
  g.edges.resize(m, 2);
  g.edges.topRows(ma) = a.edges;
  for (Eigen::Index e = 0; e < mb; ++e) {
    g.edges(ma + e, 0) = b.edges(e, 0) + na;
    g.edges(ma + e, 1) = b.edges(e, 1) + na;
  }
  for (Eigen::Index e = 0; e < static_cast<Eigen::Index>(cross.size()); ++e) {
    g.edges(ma + mb + e, 0) = cross[static_cast<size_t>(e)].first;
    g.edges(ma + mb + e, 1) = cross[static_cast<size_t>(e)].second;
  }

  // Existing edge columns carry over (zero on cross edges); a trailing marker
  // column separates within-part edges (0) from cross-part edges (1).
  const Eigen::Index old_cols = a.edge_features ? a.edge_features->cols() : 0;
  Eigen::MatrixXd edge_feat = Eigen::MatrixXd::Zero(m, old_cols + 1);
  if (a.edge_features) {
    edge_feat.block(0, 0, ma, old_cols) = *a.edge_features;
    edge_feat.block(ma, 0, mb, old_cols) = *b.edge_features;
  }
  edge_feat.block(ma + mb, old_cols, static_cast<Eigen::Index>(cross.size()), 1).setOnes();
  g.edge_features = std::move(edge_feat);
  {
    std::vector<std::string> layout = feature_layout(a, "edge");
    layout.push_back("marker");
    g.meta["edge_feature_layout"] = join(layout);
  }
  if (a.meta.count("vertex_feature_layout"))
    g.meta["vertex_feature_layout"] = a.meta.at("vertex_feature_layout");

  Eigen::VectorXi part(na + nb);
  part.head(na).setZero();
  part.tail(nb).setOnes();
  g.part_id = std::move(part);

  if (a.vertex_kind || b.vertex_kind) {
    Eigen::VectorXi kind = Eigen::VectorXi::Constant(na + nb, kVertexRegular);
    if (a.vertex_kind) kind.head(na) = *a.vertex_kind;
    if (b.vertex_kind) kind.tail(nb) = *b.vertex_kind;
    g.vertex_kind = std::move(kind);
  }
  if (a.vertex_labels && b.vertex_labels) {
    Eigen::VectorXd labels(na + nb);
    labels.head(na) = *a.vertex_labels;
    labels.tail(nb) = *b.vertex_labels;
    g.vertex_labels = std::move(labels);
  }
  validate_graph(g);
  return g;
}

AttributedGraph add_normal_tips(const AttributedGraph& g, const TriangleMesh& mesh, double scale) {
  validate_graph(g);
  validate_mesh(mesh);
  if (g.num_vertices != mesh.positions.rows())
    throw std::invalid_argument("graph and mesh vertex counts differ");
  if (!g.positions || g.positions->cols() != 3)
    throw std::invalid_argument("normal tips need 3D vertex positions");

  // A consistently wound surface never repeats a directed side.
  {
    std::set<std::pair<int, int>> directed;
    bool warned = false;
    for (Eigen::Index f = 0; f < mesh.triangles.rows() && !warned; ++f)
      for (int c = 0; c < 3; ++c) {
        const int s = mesh.triangles(f, c), t = mesh.triangles(f, (c + 1) % 3);
        if (!directed.insert({s, t}).second) {
          std::cerr << "warning: inconsistent triangle winding; normal directions may flip\n";
          warned = true;
          break;
        }
      }
  }

  const int n = g.num_vertices;
  Eigen::MatrixXd normal_sum = Eigen::MatrixXd::Zero(n, 3);
  std::vector<bool> touched(static_cast<size_t>(n), false);
  for (Eigen::Index f = 0; f < mesh.triangles.rows(); ++f) {
    const Eigen::Vector3d pa = mesh.positions.row(mesh.triangles(f, 0));
    const Eigen::Vector3d pb = mesh.positions.row(mesh.triangles(f, 1));
    const Eigen::Vector3d pc = mesh.positions.row(mesh.triangles(f, 2));
    const Eigen::Vector3d weighted = (pb - pa).cross(pc - pa);  // 2*area*unit normal
    for (int c = 0; c < 3; ++c) {
      normal_sum.row(mesh.triangles(f, c)) += weighted;
      touched[static_cast<size_t>(mesh.triangles(f, c))] = true;
    }
  }

  std::vector<int> origin;  // vertices that get a tip, in vertex order
  for (int v = 0; v < n; ++v)
    if (touched[static_cast<size_t>(v)] && normal_sum.row(v).norm() > 1e-12) origin.push_back(v);

  const int tips = static_cast<int>(origin.size());
  AttributedGraph out;
  out.num_vertices = n + tips;
  Eigen::MatrixXd positions(n + tips, 3);
  positions.topRows(n) = *g.positions;
  for (int t = 0; t < tips; ++t) {
    const int v = origin[static_cast<size_t>(t)];
    positions.row(n + t) = g.positions->row(v) + scale * normal_sum.row(v).normalized();
  }
  out.positions = std::move(positions);

  out.edges.resize(g.edges.rows() + tips, 2);
  out.edges.topRows(g.edges.rows()) = g.edges;
  for (int t = 0; t < tips; ++t) {
    out.edges(g.edges.rows() + t, 0) = origin[static_cast<size_t>(t)];
    out.edges(g.edges.rows() + t, 1) = n + t;
  }

  Eigen::VectorXi kind = Eigen::VectorXi::Constant(n + tips, kVertexRegular);
  if (g.vertex_kind) kind.head(n) = *g.vertex_kind;
  kind.tail(tips).setConstant(kVertexNormalTip);
  out.vertex_kind = std::move(kind);

  if (g.vertex_features) {
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(n + tips, g.vertex_features->cols());
    features.topRows(n) = *g.vertex_features;
    out.vertex_features = std::move(features);
  }
  if (g.edge_features) {
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(out.edges.rows(), g.edge_features->cols());
    features.topRows(g.edges.rows()) = *g.edge_features;
    out.edge_features = std::move(features);
  }
  if (g.part_id) {
    Eigen::VectorXi part(n + tips);
    part.head(n) = *g.part_id;
    for (int t = 0; t < tips; ++t) part[n + t] = (*g.part_id)[origin[static_cast<size_t>(t)]];
    out.part_id = std::move(part);
  }
  if (g.vertex_labels) {
    Eigen::VectorXd labels = Eigen::VectorXd::Zero(n + tips);
    labels.head(n) = *g.vertex_labels;
    out.vertex_labels = std::move(labels);
  }
  out.graph_label = g.graph_label;
  out.meta = g.meta;
  validate_graph(out);
  return out;
}

FeatureStats fit_feature_stats(const std::vector<AttributedGraph>& train_graphs) {
  FeatureStats stats;
  auto fit = [](auto select, const std::vector<AttributedGraph>& graphs, Eigen::VectorXd& mean,
                Eigen::VectorXd& stddev) {
    Eigen::Index cols = -1, rows = 0;
    for (const AttributedGraph& g : graphs) {
      const auto& block = select(g);
      if (!block) continue;
      if (cols < 0) cols = block->cols();
      if (block->cols() != cols)
        throw std::invalid_argument("inconsistent feature column counts across graphs");
      rows += block->rows();
    }
    if (cols < 0 || rows == 0) {
      mean.resize(0);
      stddev.resize(0);
      return;
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(cols);
    for (const AttributedGraph& g : graphs) {
      const auto& block = select(g);
      if (block) total += block->colwise().sum().transpose();
    }
    mean = total / static_cast<double>(rows);
    Eigen::VectorXd varsum = Eigen::VectorXd::Zero(cols);
    for (const AttributedGraph& g : graphs) {
      const auto& block = select(g);
      if (block)
        varsum += (block->rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    }
    stddev = (varsum / static_cast<double>(rows)).cwiseSqrt();
  };
  fit([](const AttributedGraph& g) -> const std::optional<Eigen::MatrixXd>& { return g.vertex_features; },
      train_graphs, stats.vertex_mean, stats.vertex_std);
  fit([](const AttributedGraph& g) -> const std::optional<Eigen::MatrixXd>& { return g.edge_features; },
      train_graphs, stats.edge_mean, stats.edge_std);
  return stats;
}

void apply_feature_stats(AttributedGraph& g, const FeatureStats& stats) {
  auto apply = [](std::optional<Eigen::MatrixXd>& block, const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& stddev) {
    if (!block || mean.size() == 0) return;
    if (block->cols() != mean.size())
      throw std::invalid_argument("feature stats were fitted for a different column count");
    for (Eigen::Index c = 0; c < block->cols(); ++c) {
      if (stddev[c] < 1e-12) continue;
      block->col(c) = (block->col(c).array() - mean[c]) / stddev[c];
    }
  };
  apply(g.vertex_features, stats.vertex_mean, stats.vertex_std);
  apply(g.edge_features, stats.edge_mean, stats.edge_std);
}

}  // namespace skelgraph
