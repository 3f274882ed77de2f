#include "skelgraph/pipeline.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "skelgraph/convert.hpp"
#include "skelgraph/features.hpp"

namespace skelgraph {

std::vector<AttributedGraph> grid_sample_to_graphs(const GridSample& sample,
                                                   const std::string& volume_id,
                                                   const GridPipelineOptions& options) {
  std::vector<AttributedGraph> graphs;
  const std::vector<Patch> patches = slice_to_patches(sample.image, options.patch_size);
  for (size_t p = 0; p < patches.size(); ++p) {
    const Patch& patch = patches[p];
    const BinaryMask mask = binarize(patch.grid, options.binarize_threshold);
    AttributedGraph g = sn_graph(mask, &patch.grid, options.skeleton);
    if (g.num_vertices == 0) continue;  // nothing on this patch
    vertex_features(g);
    edge_features(g, options.theta_tol_deg, /*with_slope=*/true);
    g.graph_label = sample.label;
    g.meta["volume_id"] = volume_id;
    g.meta["slice"] = std::to_string(patch.source_slice);
    g.meta["patch"] = std::to_string(p);
    graphs.push_back(std::move(g));
  }
  return graphs;
}

AttributedGraph part_pair_to_graph(const PartPair& pair, const PartPipelineOptions& options) {
  AttributedGraph ga = mesh_to_graph(pair.part_a);
  AttributedGraph gb = mesh_to_graph(pair.part_b);

  const ContactLabels contact = contact_oracle(pair.part_a, pair.part_b, pair.eps);
  Eigen::VectorXd labels_a(ga.num_vertices), labels_b(gb.num_vertices);
  for (int v = 0; v < ga.num_vertices; ++v) labels_a[v] = contact.a[static_cast<size_t>(v)];
  for (int v = 0; v < gb.num_vertices; ++v) labels_b[v] = contact.b[static_cast<size_t>(v)];
  ga.vertex_labels = std::move(labels_a);
  gb.vertex_labels = std::move(labels_b);

  if (options.with_normal_tips) {
    ga = add_normal_tips(ga, pair.part_a, options.normal_scale);
    gb = add_normal_tips(gb, pair.part_b, options.normal_scale);
  }

  AttributedGraph g = add_proximity_edges(ga, gb, options.proximity_threshold);
  if (!g.vertex_kind) g.vertex_kind = Eigen::VectorXi::Zero(g.num_vertices);
  vertex_features(g);
  // Slope one-hots depend on the random rigid pose, so the pair task keeps
  // only intrinsic edge features.
  edge_features(g, 15.0, /*with_slope=*/false);
  return g;
}

void descriptor_table(const std::vector<AttributedGraph>& graphs, Eigen::MatrixXd& features,
                      Eigen::VectorXi& labels) {
  features.resize(static_cast<Eigen::Index>(graphs.size()), 10);
  labels.resize(static_cast<Eigen::Index>(graphs.size()));
  for (size_t i = 0; i < graphs.size(); ++i) {
    if (!graphs[i].graph_label)
      throw std::invalid_argument("descriptor table needs graph_label on every graph");
    features.row(static_cast<Eigen::Index>(i)) = global_descriptor(graphs[i]).to_vector();
    labels[static_cast<Eigen::Index>(i)] = static_cast<int>(std::llround(*graphs[i].graph_label));
  }
}

double volume_aggregate_accuracy(const ModelParams& params, const ModelConfig& config,
                                 const std::vector<AttributedGraph>& graphs) {
  if (config.task != Task::kGraphClassification)
    throw std::invalid_argument("volume aggregation applies to the graph task");
  std::map<std::string, std::vector<double>> probs;
  std::map<std::string, int> truth;
  for (const AttributedGraph& g : graphs) {
    const auto it = g.meta.find("volume_id");
    if (it == g.meta.end()) throw std::invalid_argument("graph is missing meta volume_id");
    if (!g.graph_label) throw std::invalid_argument("graph is missing its graph_label");
    probs[it->second].push_back(forward(params, config, g)[0]);
    truth[it->second] = static_cast<int>(std::llround(*g.graph_label));
  }
  if (probs.empty()) throw std::invalid_argument("no graphs to aggregate");
  int correct = 0;
  for (const auto& [volume, patch_probs] : probs)
    if (aggregate_volume(patch_probs).label == truth[volume]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(probs.size());
}

}  // namespace skelgraph
