#pragma once

#include <string>

#include "skelgraph/graph.hpp"
#include "skelgraph/grid.hpp"
#include "skelgraph/mesh.hpp"

namespace skelgraph {

// Volumes are stored as a pair of files: <stem>.vol.json (a JSON header with
// dims/dtype/order) and <stem>.vol.bin (raw little-endian 32-bit floats,
// x-fastest). Paths may name either the header file or the bare stem.
VoxelGrid read_volume(const std::string& path);
void write_volume(const VoxelGrid& grid, const std::string& path);

// ASCII OFF, or the v/f subset of OBJ (triangular faces, 1-based indices).
// Format picked by extension: ".obj" parses as OBJ, anything else as OFF.
TriangleMesh read_mesh(const std::string& path);
void write_mesh_off(const TriangleMesh& mesh, const std::string& path);

// Whitespace-separated "x y z [f1 f2 ...]" lines; '#' starts a comment.
PointCloud read_point_cloud(const std::string& path);

// JSON with keys num_vertices, positions, vertex_features, edges,
// edge_features, vertex_labels, graph_label, part_id, vertex_kind, meta.
// Absent optional fields are encoded as null. Round-trips exactly.
AttributedGraph read_graph(const std::string& path);
void write_graph(const AttributedGraph& g, const std::string& path);

}  // namespace skelgraph
