#include "skelgraph/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace skelgraph {

namespace {

// Large enough to dominate any in-grid squared distance, small enough that
// envelope intersections stay exact in double arithmetic.
constexpr std::int64_t kFar = std::int64_t{1} << 30;

// Lower envelope of parabolas rooted at (i, f[i]) (the dimension-wise exact
// squared distance pass), evaluated at all integer positions into d.
void envelope_pass(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n) + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto intersect = [&](int p) {
      return (static_cast<double>(f[static_cast<size_t>(q)] + std::int64_t{q} * q) -
              static_cast<double>(f[static_cast<size_t>(p)] + std::int64_t{p} * p)) /
             (2.0 * (q - p));
    };
    double s = intersect(v[static_cast<size_t>(k)]);
    while (s <= z[static_cast<size_t>(k)]) {
      --k;
      s = intersect(v[static_cast<size_t>(k)]);
    }
    ++k;
    v[static_cast<size_t>(k)] = q;
    z[static_cast<size_t>(k)] = s;
    z[static_cast<size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  d.resize(static_cast<size_t>(n));
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<size_t>(k) + 1] < q) ++k;
    const std::int64_t dx = q - v[static_cast<size_t>(k)];
    d[static_cast<size_t>(q)] = dx * dx + f[static_cast<size_t>(v[static_cast<size_t>(k)])];
  }
}

}  // namespace

Grid<std::int64_t> distance_transform_squared(const BinaryMask& mask) {
  const int nx = mask.dims.x(), ny = mask.dims.y(), nz = mask.dims.z();
  Grid<std::int64_t> sq(nx, ny, nz);
  for (Eigen::Index i = 0; i < mask.size(); ++i) sq.values[i] = mask.values[i] ? kFar : 0;

  std::vector<std::int64_t> f, d;
  // x pass
  f.resize(static_cast<size_t>(nx));
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[static_cast<size_t>(x)] = sq.at(x, y, z);
      envelope_pass(f, d);
      for (int x = 0; x < nx; ++x) sq.at(x, y, z) = d[static_cast<size_t>(x)];
    }
  // y pass
  f.resize(static_cast<size_t>(ny));
  for (int z = 0; z < nz; ++z)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[static_cast<size_t>(y)] = sq.at(x, y, z);
      envelope_pass(f, d);
      for (int y = 0; y < ny; ++y) sq.at(x, y, z) = d[static_cast<size_t>(y)];
    }
  // z pass, skipped for single-slice volumes
  if (nz > 1) {
    f.resize(static_cast<size_t>(nz));
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        for (int z = 0; z < nz; ++z) f[static_cast<size_t>(z)] = sq.at(x, y, z);
        envelope_pass(f, d);
        for (int z = 0; z < nz; ++z) sq.at(x, y, z) = d[static_cast<size_t>(z)];
      }
  }

  // Everything outside the array counts as background; along z only when the
  // volume has more than one slice.
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        auto& value = sq.at(x, y, z);
        if (value == 0) continue;
        std::int64_t border = std::min({x + 1, nx - x, y + 1, ny - y});
        if (nz > 1) border = std::min({border, std::int64_t{z} + 1, std::int64_t{nz - z}});
        value = std::min(value, border * border);
      }
  return sq;
}

DistanceField distance_transform(const BinaryMask& mask) {
  const Grid<std::int64_t> sq = distance_transform_squared(mask);
  DistanceField field(mask.dims.x(), mask.dims.y(), mask.dims.z());
  for (Eigen::Index i = 0; i < sq.size(); ++i)
    field.values[i] = std::sqrt(static_cast<double>(sq.values[i]));
  return field;
}

std::vector<SphereNode> select_sphere_nodes(const Grid<std::int64_t>& squared_field,
                                            int max_nodes, double r_min) {
  const int nx = squared_field.dims.x(), ny = squared_field.dims.y(), nz = squared_field.dims.z();
  Grid<std::int64_t> alive = squared_field;  // zeroed as spheres cover elements
  std::vector<SphereNode> nodes;
  const double min_sq = r_min * r_min;
  while (static_cast<int>(nodes.size()) < max_nodes) {
    std::int64_t best = 0;
    Eigen::Vector3i at(-1, -1, -1);
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          const std::int64_t value = alive.at(x, y, z);
          if (value < best || value == 0) continue;
          // Strictly better, or equal with lexicographically smaller (x,y,z).
          const Eigen::Vector3i c(x, y, z);
          if (value > best || at.x() < 0 ||
              std::lexicographical_compare(c.data(), c.data() + 3, at.data(), at.data() + 3)) {
            best = value;
            at = c;
          }
        }
    if (at.x() < 0 || static_cast<double>(best) < min_sq) break;
    const double radius = std::sqrt(static_cast<double>(best));
    nodes.push_back({at, radius});
    const int reach = static_cast<int>(std::floor(radius));
    for (int z = std::max(0, at.z() - reach); z <= std::min(nz - 1, at.z() + reach); ++z)
      for (int y = std::max(0, at.y() - reach); y <= std::min(ny - 1, at.y() + reach); ++y)
        for (int x = std::max(0, at.x() - reach); x <= std::min(nx - 1, at.x() + reach); ++x) {
          const std::int64_t dx = x - at.x(), dy = y - at.y(), dz = z - at.z();
          if (dx * dx + dy * dy + dz * dz <= best) alive.at(x, y, z) = 0;
        }
  }
  return nodes;
}

namespace {

bool line_of_sight(const Eigen::Vector3i& a, const Eigen::Vector3i& b, const BinaryMask& mask) {
  const Eigen::Vector3d pa = a.cast<double>(), pb = b.cast<double>();
  const double len = (pb - pa).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
  for (int k = 0; k <= steps; ++k) {
    const Eigen::Vector3d p = pa + (pb - pa) * (static_cast<double>(k) / steps);
    const int x = static_cast<int>(std::llround(p.x()));
    const int y = static_cast<int>(std::llround(p.y()));
    const int z = static_cast<int>(std::llround(p.z()));
    if (!mask.in_bounds(x, y, z) || !mask.at(x, y, z)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::array<int, 2>> connect_sphere_edges(const std::vector<SphereNode>& nodes,
                                                     const BinaryMask& mask, double tau) {
  std::vector<std::array<int, 2>> edges;
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dist =
          (nodes[static_cast<size_t>(i)].center - nodes[static_cast<size_t>(j)].center)
              .cast<double>()
              .norm();
      const double touch =
          (nodes[static_cast<size_t>(i)].radius + nodes[static_cast<size_t>(j)].radius) *
          (1.0 + tau);
      if (dist <= touch &&
          line_of_sight(nodes[static_cast<size_t>(i)].center,
                        nodes[static_cast<size_t>(j)].center, mask))
        edges.push_back({i, j});
    }
  return edges;
}

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<size_t>(b)] = a;
    return true;
  }
};

}  // namespace

AttributedGraph sn_graph(const BinaryMask& mask, const VoxelGrid* grid,
                         const SnGraphParams& params) {
  if (grid && grid->dims != mask.dims)
    throw std::invalid_argument("intensity grid dims do not match mask dims");
  const Grid<std::int64_t> sq = distance_transform_squared(mask);
  const std::vector<SphereNode> nodes = select_sphere_nodes(sq, params.max_nodes, params.r_min);
  std::vector<std::array<int, 2>> edges = connect_sphere_edges(nodes, mask, params.tau);

  const int n = static_cast<int>(nodes.size());
  if (params.connect_components && n > 1) {
    Dsu dsu(n);
    int components = n;
    for (const auto& e : edges)
      if (dsu.unite(e[0], e[1])) --components;
    // Bridge nearest cross-component pairs (shortest first, then lowest
    // indices) until everything hangs together; sight checks don't apply here.
    while (components > 1) {
      double best = std::numeric_limits<double>::infinity();
      int bi = -1, bj = -1;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          if (dsu.find(i) == dsu.find(j)) continue;
          const double dist =
              (nodes[static_cast<size_t>(i)].center - nodes[static_cast<size_t>(j)].center)
                  .cast<double>()
                  .norm();
          if (dist < best) {
            best = dist;
            bi = i;
            bj = j;
          }
        }
      edges.push_back({bi, bj});
      dsu.unite(bi, bj);
      --components;
    }
  }

  const bool flat = mask.dims.z() == 1;
  AttributedGraph g;
  g.num_vertices = n;
  Eigen::MatrixXd positions(n, flat ? 2 : 3);
  Eigen::MatrixXd features(n, grid ? 2 : 1);
  for (int v = 0; v < n; ++v) {
    const SphereNode& node = nodes[static_cast<size_t>(v)];
    positions(v, 0) = node.center.x();
    positions(v, 1) = node.center.y();
    if (!flat) positions(v, 2) = node.center.z();
    features(v, 0) = node.radius;
    if (grid) {
      // Mean intensity over the elements the sphere covers.
      const std::int64_t rsq = static_cast<std::int64_t>(std::llround(node.radius * node.radius));
      const int reach = static_cast<int>(std::floor(node.radius));
      double total = 0.0;
      int count = 0;
      for (int z = std::max(0, node.center.z() - reach);
           z <= std::min(mask.dims.z() - 1, node.center.z() + reach); ++z)
        for (int y = std::max(0, node.center.y() - reach);
             y <= std::min(mask.dims.y() - 1, node.center.y() + reach); ++y)
          for (int x = std::max(0, node.center.x() - reach);
               x <= std::min(mask.dims.x() - 1, node.center.x() + reach); ++x) {
            const std::int64_t dx = x - node.center.x(), dy = y - node.center.y(),
                               dz = z - node.center.z();
            if (dx * dx + dy * dy + dz * dz > rsq) continue;
            total += grid->at(x, y, z);
            ++count;
          }
      features(v, 1) = count ? total / count : 0.0;
    }
  }
  g.positions = std::move(positions);
  g.vertex_features = std::move(features);
  g.meta["vertex_feature_layout"] = grid ? "radius,intensity" : "radius";
  g.edges.resize(static_cast<Eigen::Index>(edges.size()), 2);
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    g.edges(e, 0) = edges[static_cast<size_t>(e)][0];
    g.edges(e, 1) = edges[static_cast<size_t>(e)][1];
  }
  validate_graph(g);
  return g;
}

}  // namespace skelgraph
