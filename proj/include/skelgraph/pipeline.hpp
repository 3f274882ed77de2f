#pragma once

#include <string>
#include <vector>

#include "skelgraph/nn.hpp"
#include "skelgraph/skeleton.hpp"
#include "skelgraph/synth.hpp"
#include "skelgraph/tabular.hpp"

namespace skelgraph {

// Shared end-to-end flows used by both the command-line tool and the
// integration suite, so that both exercise exactly the same code path.

struct GridPipelineOptions {
  double binarize_threshold = 0.5;
  int patch_size = 256;
  SnGraphParams skeleton;
  double theta_tol_deg = 15.0;
};

// Volume -> patches -> skeleton graphs with [degree, radius, kind, intensity]
// vertex features and [length, h, v, s] edge features. Each graph carries the
// sample label and meta entries volume_id / slice / patch.
std::vector<AttributedGraph> grid_sample_to_graphs(const GridSample& sample,
                                                   const std::string& volume_id,
                                                   const GridPipelineOptions& options = {});

struct PartPipelineOptions {
  double proximity_threshold = 0.25;
  double normal_scale = 0.25;
  bool with_normal_tips = true;
};

// Meshes -> 1-skeletons with oracle contact labels -> normal tips ->
// proximity-merged pair graph with [degree, kind] vertex features and
// [length, marker] edge features (slopes are meaningless in 3D, and dropping
// them keeps the inputs rigid-motion invariant).
AttributedGraph part_pair_to_graph(const PartPair& pair,
                                   const PartPipelineOptions& options = {});

// Stacks one descriptor row per graph; labels read from graph_label.
void descriptor_table(const std::vector<AttributedGraph>& graphs, Eigen::MatrixXd& features,
                      Eigen::VectorXi& labels);

// Per-volume aggregate accuracy: graphs are grouped by meta["volume_id"],
// patch probabilities averaged, and the aggregate compared to the label.
double volume_aggregate_accuracy(const ModelParams& params, const ModelConfig& config,
                                 const std::vector<AttributedGraph>& graphs);

}  // namespace skelgraph
