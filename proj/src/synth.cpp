#include "skelgraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <Eigen/Geometry>

#include "skelgraph/rng.hpp"

namespace skelgraph {

int grid_score(double jitter_sigma, double rupture_prob) {
  const double raw = 10.0 - 4.0 * jitter_sigma / 3.0 - 5.0 * rupture_prob / 0.4;
  return static_cast<int>(std::clamp(std::llround(raw), 1ll, 10ll));
}

namespace {

// One family member: a line x = offset + jitter_sigma*sin(2*pi*t/wavelength +
// phase) running along t, cut into segments between crossings with the
// perpendicular family (plus the image borders); ruptured segments are gone.
struct JitteredLine {
  double offset = 0.0;
  double wavelength = 60.0;
  double phase = 0.0;
  std::vector<std::pair<double, double>> kept;  // surviving [lo, hi) spans along t
};

double line_position(const JitteredLine& line, double t, double amplitude) {
  return line.offset +
         amplitude * std::sin(2.0 * std::numbers::pi * t / line.wavelength + line.phase);
}

std::vector<JitteredLine> make_family(const GridParams& params, Rng& rng) {
  std::vector<JitteredLine> family;
  const double spacing = rng.uniform(params.spacing_min, params.spacing_max);
  const double start = rng.uniform(0.0, spacing);
  for (double offset = start; offset < params.size; offset += spacing) {
    JitteredLine line;
    line.offset = offset;
    line.wavelength = rng.uniform(40.0, 90.0);
    line.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    family.push_back(line);
  }
  return family;
}

void rupture_family(std::vector<JitteredLine>& family, const std::vector<JitteredLine>& crossing,
                    const GridParams& params, Rng& rng) {
  for (JitteredLine& line : family) {
    std::vector<double> cuts = {0.0};
    for (const JitteredLine& other : crossing) cuts.push_back(other.offset);
    cuts.push_back(static_cast<double>(params.size));
    std::sort(cuts.begin(), cuts.end());
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
      const bool ruptured = rng.uniform01() < params.rupture_prob;
      if (!ruptured) line.kept.emplace_back(cuts[s], cuts[s + 1]);
    }
  }
}

bool span_contains(const JitteredLine& line, double t) {
  for (const auto& [lo, hi] : line.kept)
    if (t >= lo && t < hi) return true;
  return false;
}

}  // namespace

GridSample gen_grid_image(const GridParams& params) {
  if (params.size < 1) throw std::invalid_argument("image size must be positive");
  GridSample sample;
  sample.params = params;
  sample.score = grid_score(params.jitter_sigma, params.rupture_prob);
  sample.label = sample.score > 5 ? 1 : 0;
  sample.image = VoxelGrid(params.size, params.size, 1);

  Rng rng(params.seed);
  // Vertical lines run along y (t = y, position = x); horizontal lines run
  // along x. Ruptures cut both families at their crossings.
  std::vector<JitteredLine> vertical = make_family(params, rng);
  std::vector<JitteredLine> horizontal = make_family(params, rng);
  rupture_family(vertical, horizontal, params, rng);
  rupture_family(horizontal, vertical, params, rng);

  // Gaussian cross-section, max-blended so crossings don't bloom; sigma is
  // tuned so the binarized (0.5 threshold) stroke is 2-3 px wide.
  const double sigma = params.line_width * 0.8;
  const double reach = 3.0 * sigma + params.jitter_sigma;

  for (int y = 0; y < params.size; ++y)
    for (int x = 0; x < params.size; ++x) {
      double value = 0.0;
      for (const JitteredLine& line : vertical) {
        if (std::abs(line.offset - x) > reach + 1.0) continue;
        if (!span_contains(line, y)) continue;
        const double d = x - line_position(line, y, params.jitter_sigma);
        value = std::max(value, params.line_intensity * std::exp(-d * d / (2.0 * sigma * sigma)));
      }
      for (const JitteredLine& line : horizontal) {
        if (std::abs(line.offset - y) > reach + 1.0) continue;
        if (!span_contains(line, x)) continue;
        const double d = y - line_position(line, x, params.jitter_sigma);
        value = std::max(value, params.line_intensity * std::exp(-d * d / (2.0 * sigma * sigma)));
      }
      sample.image.at(x, y, 0) = static_cast<float>(value);
    }

  // Blob artifacts: soft discs at random positions.
  for (int b = 0; b < params.blob_count; ++b) {
    const double cx = rng.uniform(0.0, params.size);
    const double cy = rng.uniform(0.0, params.size);
    const double radius = rng.uniform(3.0, 8.0);
    const double intensity = rng.uniform(0.5, 0.9);
    const double blob_sigma = radius / 2.0;
    const int lo_x = std::max(0, static_cast<int>(cx - 3 * blob_sigma));
    const int hi_x = std::min(params.size - 1, static_cast<int>(cx + 3 * blob_sigma));
    const int lo_y = std::max(0, static_cast<int>(cy - 3 * blob_sigma));
    const int hi_y = std::min(params.size - 1, static_cast<int>(cy + 3 * blob_sigma));
    for (int y = lo_y; y <= hi_y; ++y)
      for (int x = lo_x; x <= hi_x; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        const float v =
            static_cast<float>(intensity * std::exp(-d2 / (2.0 * blob_sigma * blob_sigma)));
        sample.image.at(x, y, 0) = std::max(sample.image.at(x, y, 0), v);
      }
  }

  // 1% pixel noise.
  for (Eigen::Index i = 0; i < sample.image.size(); ++i)
    sample.image.values[i] = static_cast<float>(
        std::clamp(sample.image.values[i] + 0.01 * rng.normal(), 0.0, 1.0));
  return sample;
}

GridSample gen_grid_volume(const GridParams& params, int slices) {
  if (slices < 1) throw std::invalid_argument("need at least one slice");
  GridSample volume;
  volume.params = params;
  volume.score = grid_score(params.jitter_sigma, params.rupture_prob);
  volume.label = volume.score > 5 ? 1 : 0;
  volume.image = VoxelGrid(params.size, params.size, slices);
  Rng seeds(params.seed);
  for (int z = 0; z < slices; ++z) {
    GridParams slice_params = params;
    slice_params.seed = seeds.fork(static_cast<std::uint64_t>(z)).next_u64();
    const GridSample slice = gen_grid_image(slice_params);
    for (int y = 0; y < params.size; ++y)
      for (int x = 0; x < params.size; ++x)
        volume.image.at(x, y, z) = slice.image.at(x, y, 0);
  }
  return volume;
}

std::vector<GridSample> gen_grid_dataset(int n, std::uint64_t seed, int slices) {
  if (n < 0) throw std::invalid_argument("dataset size must be non-negative");
  std::vector<GridSample> dataset;
  int want_positive = (n + 1) / 2, want_negative = n / 2;
  Rng rng(seed);
  std::uint64_t draw = 0;
  while (static_cast<int>(dataset.size()) < n) {
    GridParams params;
    params.jitter_sigma = rng.uniform(0.0, 3.0);
    params.rupture_prob = rng.uniform(0.0, 0.4);
    params.blob_count = rng.uniform_int(0, 5);
    params.seed = rng.fork(draw++).next_u64();
    const int score = grid_score(params.jitter_sigma, params.rupture_prob);
    int& quota = score > 5 ? want_positive : want_negative;
    if (quota == 0) continue;  // class full, redraw
    --quota;
    dataset.push_back(slices == 1 ? gen_grid_image(params) : gen_grid_volume(params, slices));
  }
  return dataset;
}

namespace {

// Axis-aligned rectangle in 3D: origin corner plus two edge vectors; the
// outward normal is u x v.
struct FaceRect {
  Eigen::Vector3d origin, u, v;
};

void tessellate(const std::vector<FaceRect>& faces, int k, TriangleMesh& mesh) {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3i> triangles;
  std::map<std::tuple<long long, long long, long long>, int> welded;

  // Weld key: positions quantized well below any feature size.
  Eigen::Vector3d lo = faces[0].origin, hi = faces[0].origin;
  for (const FaceRect& f : faces) {
    const Eigen::Vector3d corners[4] = {f.origin, f.origin + f.u, f.origin + f.v,
                                        f.origin + f.u + f.v};
    for (const Eigen::Vector3d& p : corners) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  const double quantum = std::max(1e-12, 1e-6 * (hi - lo).norm());

  auto vertex_id = [&](const Eigen::Vector3d& p) {
    const std::tuple<long long, long long, long long> key = {
        std::llround(p.x() / quantum), std::llround(p.y() / quantum),
        std::llround(p.z() / quantum)};
    const auto it = welded.find(key);
    if (it != welded.end()) return it->second;
    const int id = static_cast<int>(positions.size());
    positions.push_back(p);
    welded.emplace(key, id);
    return id;
  };

  for (const FaceRect& face : faces)
    for (int row = 0; row < k; ++row)
      for (int col = 0; col < k; ++col) {
        const auto corner = [&](int dc, int dr) {
          return face.origin + face.u * (static_cast<double>(col + dc) / k) +
                 face.v * (static_cast<double>(row + dr) / k);
        };
        const int p00 = vertex_id(corner(0, 0));
        const int p10 = vertex_id(corner(1, 0));
        const int p01 = vertex_id(corner(0, 1));
        const int p11 = vertex_id(corner(1, 1));
        triangles.emplace_back(p00, p10, p11);  // counter-clockwise seen from u x v
        triangles.emplace_back(p00, p11, p01);
      }

  mesh.positions.resize(static_cast<Eigen::Index>(positions.size()), 3);
  for (size_t i = 0; i < positions.size(); ++i)
    mesh.positions.row(static_cast<Eigen::Index>(i)) = positions[i];
  mesh.triangles.resize(static_cast<Eigen::Index>(triangles.size()), 3);
  for (size_t i = 0; i < triangles.size(); ++i)
    mesh.triangles.row(static_cast<Eigen::Index>(i)) = triangles[i];
}

// Rectangle helpers; normals point along +axis or -axis as named.
FaceRect rect_z(double x0, double x1, double y0, double y1, double z, bool up) {
  // u x v = +z when up
  if (up) return {{x0, y0, z}, {x1 - x0, 0, 0}, {0, y1 - y0, 0}};
  return {{x0, y0, z}, {0, y1 - y0, 0}, {x1 - x0, 0, 0}};
}

FaceRect rect_x(double y0, double y1, double z0, double z1, double x, bool positive) {
  if (positive) return {{x, y0, z0}, {0, y1 - y0, 0}, {0, 0, z1 - z0}};
  return {{x, y0, z0}, {0, 0, z1 - z0}, {0, y1 - y0, 0}};
}

FaceRect rect_y(double x0, double x1, double z0, double z1, double y, bool positive) {
  if (positive) return {{x0, y, z0}, {0, 0, z1 - z0}, {x1 - x0, 0, 0}};
  return {{x0, y, z0}, {x1 - x0, 0, 0}, {0, 0, z1 - z0}};
}

std::vector<FaceRect> box_faces(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  return {rect_z(lo.x(), hi.x(), lo.y(), hi.y(), lo.z(), false),
          rect_z(lo.x(), hi.x(), lo.y(), hi.y(), hi.z(), true),
          rect_x(lo.y(), hi.y(), lo.z(), hi.z(), lo.x(), false),
          rect_x(lo.y(), hi.y(), lo.z(), hi.z(), hi.x(), true),
          rect_y(lo.x(), hi.x(), lo.z(), hi.z(), lo.y(), false),
          rect_y(lo.x(), hi.x(), lo.z(), hi.z(), hi.y(), true)};
}

}  // namespace

PartPair gen_part_pair(const PartPairParams& params) {
  const Eigen::Vector3d& plate = params.plate_dims;
  const Eigen::Vector3d& boss = params.boss_dims;
  if (plate.minCoeff() <= 0) throw std::invalid_argument("plate dimensions must be positive");
  if (boss.x() < 0 || boss.y() < 0 || boss.z() < 0)
    throw std::invalid_argument("boss dimensions must be non-negative");
  if (boss.x() >= plate.x() || boss.y() >= plate.y())
    throw std::invalid_argument("boss must fit strictly inside the plate footprint");
  if (params.gap < 0) throw std::invalid_argument("gap must be non-negative");
  if (params.tessellation < 1) throw std::invalid_argument("tessellation must be >= 1");

  const double W = plate.x(), D = plate.y(), H = plate.z();
  const double bx0 = (W - boss.x()) / 2.0, bx1 = (W + boss.x()) / 2.0;
  const double by0 = (D - boss.y()) / 2.0, by1 = (D + boss.y()) / 2.0;
  const double bh = boss.z();
  const double g = params.gap;
  const double clearance = params.clearance_factor * bh;
  const bool degenerate = boss.x() <= 0 || boss.y() <= 0 || bh <= 0;

  PartPair pair;
  pair.params = params;

  if (degenerate) {
    // No boss: two plain boxes with facing plates at distance g.
    tessellate(box_faces({0, 0, 0}, {W, D, H}), params.tessellation, pair.part_a);
    tessellate(box_faces({0, 0, H + g}, {W, D, 2 * H + g}), params.tessellation, pair.part_b);
  } else {
    // Part A: plate with a centered boss on top. The plate top is a ring of
    // four strips around the boss footprint.
    std::vector<FaceRect> a = {
        rect_z(0, W, 0, D, 0, false),            // plate bottom
        rect_x(0, D, 0, H, 0, false),            // plate sides
        rect_x(0, D, 0, H, W, true),
        rect_y(0, W, 0, H, 0, false),
        rect_y(0, W, 0, H, D, true),
        rect_z(0, bx0, 0, D, H, true),           // top ring
        rect_z(bx1, W, 0, D, H, true),
        rect_z(bx0, bx1, 0, by0, H, true),
        rect_z(bx0, bx1, by1, D, H, true),
        rect_x(by0, by1, H, H + bh, bx0, false),  // boss sides
        rect_x(by0, by1, H, H + bh, bx1, true),
        rect_y(bx0, bx1, H, H + bh, by0, false),
        rect_y(bx0, bx1, H, H + bh, by1, true),
        rect_z(bx0, bx1, by0, by1, H + bh, true),  // boss top
    };
    tessellate(a, params.tessellation, pair.part_a);

    // Part B: plate directly above with a pocket opening downward. Pocket
    // walls sit gap away from the boss sides, the ceiling gap above the boss
    // top; the pocket is one clearance shallower than the boss clearance
    // budget so only the upper boss band comes close.
    const double zb0 = H + g + clearance;      // B bottom face
    const double zb1 = zb0 + H;                // B top face
    const double zp = H + bh + g;              // pocket ceiling
    const double px0 = bx0 - g, px1 = bx1 + g;
    const double py0 = by0 - g, py1 = by1 + g;
    if (px0 <= 0 || px1 >= W || py0 <= 0 || py1 >= D)
      throw std::invalid_argument("gap too large: pocket breaches the plate sides");
    if (zp >= zb1) throw std::invalid_argument("pocket deeper than the upper plate");
    std::vector<FaceRect> b = {
        rect_z(0, W, 0, D, zb1, true),            // top
        rect_x(0, D, zb0, zb1, 0, false),         // outer sides
        rect_x(0, D, zb0, zb1, W, true),
        rect_y(0, W, zb0, zb1, 0, false),
        rect_y(0, W, zb0, zb1, D, true),
        rect_z(0, px0, 0, D, zb0, false),         // bottom ring around the opening
        rect_z(px1, W, 0, D, zb0, false),
        rect_z(px0, px1, 0, py0, zb0, false),
        rect_z(px0, px1, py1, D, zb0, false),
        rect_x(py0, py1, zb0, zp, px0, true),     // pocket walls face inward
        rect_x(py0, py1, zb0, zp, px1, false),
        rect_y(px0, px1, zb0, zp, py0, true),
        rect_y(px0, px1, zb0, zp, py1, false),
        rect_z(px0, px1, py0, py1, zp, false),    // pocket ceiling faces down
    };
    tessellate(b, params.tessellation, pair.part_b);
  }

  // Label epsilon resolved against the joint extent before any motion.
  if (params.label_eps >= 0) {
    pair.eps = params.label_eps;
  } else {
    Eigen::Vector3d lo = pair.part_a.positions.colwise().minCoeff();
    Eigen::Vector3d hi = pair.part_a.positions.colwise().maxCoeff();
    lo = lo.cwiseMin(Eigen::Vector3d(pair.part_b.positions.colwise().minCoeff()));
    hi = hi.cwiseMax(Eigen::Vector3d(pair.part_b.positions.colwise().maxCoeff()));
    pair.eps = g + 1e-6 * (hi - lo).norm();
  }

  random_rigid_motion(params.motion_seed, pair.rotation, pair.translation);
  apply_rigid_motion(pair.part_a, pair.rotation, pair.translation);
  apply_rigid_motion(pair.part_b, pair.rotation, pair.translation);
  validate_mesh(pair.part_a);
  validate_mesh(pair.part_b);
  return pair;
}

double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  // Closest point by barycentric region tests.
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();  // vertex a

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();  // vertex b

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {  // edge ab
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();  // vertex c

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {  // edge ac
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {  // edge bc
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);  // interior
  const double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

ContactLabels contact_oracle(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, double eps) {
  validate_mesh(mesh_a);
  validate_mesh(mesh_b);
  auto label = [eps](const TriangleMesh& verts, const TriangleMesh& tris) {
    std::vector<std::uint8_t> out(static_cast<size_t>(verts.positions.rows()), 0);
    for (Eigen::Index v = 0; v < verts.positions.rows(); ++v) {
      const Eigen::Vector3d p = verts.positions.row(v);
      for (Eigen::Index t = 0; t < tris.triangles.rows(); ++t) {
        const double d = point_triangle_distance(p, tris.positions.row(tris.triangles(t, 0)),
                                                 tris.positions.row(tris.triangles(t, 1)),
                                                 tris.positions.row(tris.triangles(t, 2)));
        if (d <= eps) {
          out[static_cast<size_t>(v)] = 1;
          break;
        }
      }
    }
    return out;
  };
  return {label(mesh_a, mesh_b), label(mesh_b, mesh_a)};
}

void random_rigid_motion(std::uint64_t seed, Eigen::Matrix3d& rotation,
                         Eigen::Vector3d& translation) {
  Rng rng(seed);
  // Uniform rotation via a uniform unit quaternion.
  const double u1 = rng.uniform01(), u2 = rng.uniform01(), u3 = rng.uniform01();
  const double two_pi = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(two_pi * u3),
                             std::sqrt(1.0 - u1) * std::sin(two_pi * u2),
                             std::sqrt(1.0 - u1) * std::cos(two_pi * u2),
                             std::sqrt(u1) * std::sin(two_pi * u3));
  rotation = q.toRotationMatrix();
  translation = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
}

void apply_rigid_motion(TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                        const Eigen::Vector3d& translation) {
  mesh.positions = (mesh.positions * rotation.transpose()).rowwise() + translation.transpose();
}

}  // namespace skelgraph
