#pragma once

#include <cstdint>
#include <vector>

#include "skelgraph/grid.hpp"
#include "skelgraph/mesh.hpp"

namespace skelgraph {

// Parameters of the synthetic grid-network images. Jitter displaces each line
// by a smooth wave of amplitude jitter_sigma; each inter-crossing segment is
// deleted with probability rupture_prob; bright blob artifacts and 1%
// Gaussian pixel noise are added on top.
struct GridParams {
  int size = 256;
  double spacing_min = 18.0, spacing_max = 30.0;  // px between lines
  double line_width = 8.0;                        // px, Gaussian cross-section
  double line_intensity = 0.8;
  double jitter_sigma = 0.0;   // [0, 3] px
  double rupture_prob = 0.0;   // [0, 0.4]
  int blob_count = 0;          // [0, 5]
  std::uint64_t seed = 0;
};

struct GridSample {
  VoxelGrid image;  // size x size x slices
  int score = 10;   // 1..10, from the perturbation magnitudes
  int label = 1;    // 1 iff score > 5
  GridParams params;
};

// Integer score on a 1..10 scale: round(10 - 4*sigma_j/3 - 5*p_r/0.4),
// clamped. Scores above 5 count as the positive (regular-grid) class.
int grid_score(double jitter_sigma, double rupture_prob);

GridSample gen_grid_image(const GridParams& params);

// Stack of `slices` independently rendered slices sharing one parameter set
// and therefore one score/label.
GridSample gen_grid_volume(const GridParams& params, int slices);

// n samples with jitter/rupture/blob parameters drawn uniformly, class-
// balanced to an exact floor(n/2) / ceil(n/2) split.
std::vector<GridSample> gen_grid_dataset(int n, std::uint64_t seed, int slices = 1);

// Interlocking part pair: a plate with a raised rectangular boss and a plate
// with the matching pocket, mating faces at distance gap (0 = touching). The
// pocket is one clearance deeper than the boss is tall so that only the boss
// top and the upper side walls come close to the other part. Every
// rectangular face is tessellated into a k x k grid of cells, two triangles
// each, and one random rigid motion is applied to both meshes jointly.
struct PartPairParams {
  Eigen::Vector3d plate_dims{4.0, 4.0, 1.0};
  Eigen::Vector3d boss_dims{2.0, 2.0, 1.0};  // must fit strictly inside the plate footprint
  double gap = 0.0;
  int tessellation = 4;          // k, cells per face edge
  double clearance_factor = 0.3; // extra pocket standoff, fraction of boss height
  std::uint64_t motion_seed = 0;
  double label_eps = -1.0;       // <0: gap + 1e-6 * joint bounding-box diagonal
};

struct PartPair {
  TriangleMesh part_a;  // plate with boss
  TriangleMesh part_b;  // plate with pocket
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  double eps = 0.0;     // resolved label epsilon
  PartPairParams params;
};

PartPair gen_part_pair(const PartPairParams& params);

// Exact Euclidean distance from p to the closest point of the closed triangle.
double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c);

struct ContactLabels {
  std::vector<std::uint8_t> a;  // per vertex of mesh A
  std::vector<std::uint8_t> b;
};

// Vertex labeled contact iff its distance to the closest triangle of the
// other mesh is <= eps. Brute force over all vertex-triangle pairs.
ContactLabels contact_oracle(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, double eps);

// Uniform random rotation (quaternion method) and a bounded translation.
void random_rigid_motion(std::uint64_t seed, Eigen::Matrix3d& rotation,
                         Eigen::Vector3d& translation);

void apply_rigid_motion(TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                        const Eigen::Vector3d& translation);

}  // namespace skelgraph
