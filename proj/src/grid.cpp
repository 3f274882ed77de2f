#include "skelgraph/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace skelgraph {

BinaryMask binarize(const VoxelGrid& grid, double threshold) {
  BinaryMask mask(grid.dims.x(), grid.dims.y(), grid.dims.z());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    mask.values[i] = grid.values[i] > threshold ? 1 : 0;
  return mask;
}

SparsityStats sparsity_stats(const BinaryMask& mask) {
  SparsityStats stats;
  if (mask.size() == 0) return stats;
  Eigen::Vector3i lo = mask.dims, hi{-1, -1, -1};
  long count = 0;
  for (int z = 0; z < mask.dims.z(); ++z)
    for (int y = 0; y < mask.dims.y(); ++y)
      for (int x = 0; x < mask.dims.x(); ++x) {
        if (!mask.at(x, y, z)) continue;
        ++count;
        lo = lo.cwiseMin(Eigen::Vector3i(x, y, z));
        hi = hi.cwiseMax(Eigen::Vector3i(x, y, z));
      }
  stats.foreground_fraction = static_cast<double>(count) / static_cast<double>(mask.size());
  if (count > 0) stats.bounding_box = {lo, hi};
  return stats;
}

std::vector<Patch> slice_to_patches(const VoxelGrid& grid, int patch_size) {
  if (patch_size < 1) throw std::invalid_argument("slice_to_patches: patch_size must be >= 1");
  std::vector<Patch> patches;
  if (grid.size() == 0) return patches;
  const int tiles_x = (grid.dims.x() + patch_size - 1) / patch_size;
  const int tiles_y = (grid.dims.y() + patch_size - 1) / patch_size;
  for (int z = 0; z < grid.dims.z(); ++z)
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx) {
        Patch patch;
        patch.grid = VoxelGrid(patch_size, patch_size, 1);
        patch.origin = {tx * patch_size, ty * patch_size};
        patch.source_slice = z;
        const int x0 = patch.origin.x(), y0 = patch.origin.y();
        const int nx = std::min(patch_size, grid.dims.x() - x0);
        const int ny = std::min(patch_size, grid.dims.y() - y0);
        for (int y = 0; y < ny; ++y)
          for (int x = 0; x < nx; ++x)
            patch.grid.at(x, y, 0) = grid.at(x0 + x, y0 + y, z);
        patches.push_back(std::move(patch));
      }
  return patches;
}

}  // namespace skelgraph
