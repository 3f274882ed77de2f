#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace skelgraph {

// Dense scalar field on a regular lattice, stored x-fastest. A 2D image is a
// grid with dims.z() == 1; all volume code shares one path for 2D and 3D.
template <typename Scalar>
struct Grid {
  Eigen::Vector3i dims{0, 0, 0};
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values;

  Grid() = default;
  Grid(int nx, int ny, int nz)
      : dims(nx, ny, nz),
        values(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(
            static_cast<Eigen::Index>(nx) * ny * nz)) {}

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z();
  }

  Eigen::Index index(int x, int y, int z) const {
    return x + static_cast<Eigen::Index>(dims.x()) * (y + static_cast<Eigen::Index>(dims.y()) * z);
  }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < dims.x() && y >= 0 && y < dims.y() && z >= 0 && z < dims.z();
  }

  Scalar& at(int x, int y, int z) { return values[index(x, y, z)]; }
  Scalar at(int x, int y, int z) const { return values[index(x, y, z)]; }
};

using VoxelGrid = Grid<float>;        // normalized intensity in [0,1]
using BinaryMask = Grid<std::uint8_t>;  // foreground flag per element
using DistanceField = Grid<double>;   // distance to nearest background, 0 on background

// Fixed-size tile cut from one z-slice, zero-padded at the volume boundary.
struct Patch {
  VoxelGrid grid;                    // dims (P, P, 1)
  Eigen::Vector2i origin{0, 0};      // top-left offset in the source slice
  int source_slice = 0;
};

struct SparsityStats {
  double foreground_fraction = 0.0;
  // Tight bounding box over foreground elements; absent when the mask is empty.
  std::optional<std::pair<Eigen::Vector3i, Eigen::Vector3i>> bounding_box;
};

// Foreground flag per element: set iff value > threshold.
BinaryMask binarize(const VoxelGrid& grid, double threshold);

SparsityStats sparsity_stats(const BinaryMask& mask);

// Tile every z-slice with stride patch_size; boundary patches are zero-padded
// to full size. Patches are emitted x-tile fastest, then y-tile, then slice.
std::vector<Patch> slice_to_patches(const VoxelGrid& grid, int patch_size);

}  // namespace skelgraph
