#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelgraph/features.hpp"
#include "skelgraph/graph.hpp"

namespace skelgraph {

enum class Task { kGraphClassification, kVertexSegmentation };

Task task_from_string(const std::string& name);
std::string task_to_string(Task task);

struct ModelConfig {
  Task task = Task::kGraphClassification;
  int num_attention_layers = 4;  // 3 is the usual pick for vertex segmentation
  int hidden_dim = 32;
  int num_heads = 1;             // hidden_dim must be divisible by num_heads
  int vertex_feature_dim = 1;
  int edge_feature_dim = 0;      // 0 disables the edge-feature score term
  int fc_layers = 2;             // fixed
  double leaky_slope = 0.2;
};

// Defaults per task: 4 attention layers for graph classification, 3 for
// vertex segmentation, hidden 32, one head, two fully connected layers.
ModelConfig default_config(Task task, int vertex_feature_dim, int edge_feature_dim);

// Per attention layer: W projects inputs to hidden_dim (head blocks stacked
// row-wise), a_src/a_dst score the projected endpoint states per head, and U
// (one row per head) projects edge features into the score. Self-loops are
// added at forward time with a zero edge-feature vector.
struct GatLayerParams {
  Eigen::MatrixXd W;       // hidden x d_in
  Eigen::MatrixXd a_src;   // hidden x 1
  Eigen::MatrixXd a_dst;   // hidden x 1
  Eigen::MatrixXd U;       // heads x d_e (0x0 when edge features are off)
};

struct DenseParams {
  Eigen::MatrixXd W;
  Eigen::MatrixXd b;  // column vector
};

struct ModelParams {
  std::vector<GatLayerParams> att;
  DenseParams fc1, fc2;
};

// Named views over every tensor, in a fixed order ("att0.W", ..., "fc2.bias").
std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_tensors(ModelParams& params);

ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// One graph-attention layer: z = W h; scores LeakyReLU(a_src.z_i + a_dst.z_j
// + U f_ij), softmax over the closed neighborhood of i, ELU on the weighted
// sum; heads concatenated.
Eigen::MatrixXd gat_layer(const GatLayerParams& layer, const ModelConfig& config,
                          const AttributedGraph& g, const Eigen::MatrixXd& h);

// Graph classification: mean-pool the final vertex states, then
// FC(hidden, ReLU) -> FC(1) -> sigmoid, one scalar in (0,1).
// Vertex segmentation: the same two dense layers applied per vertex.
Eigen::VectorXd forward(const ModelParams& params, const ModelConfig& config,
                        const AttributedGraph& g);

// Mean over elements of -[pos_weight*y*log p + (1-y)*log(1-p)], with p
// clamped to [1e-7, 1 - 1e-7].
double bce_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                double pos_weight = 1.0);

// Exact reverse-mode gradients of bce_loss(forward(...)) for every parameter.
struct BackwardResult {
  ModelParams grads;
  double loss = 0.0;
  Eigen::VectorXd predictions;
};

BackwardResult backward(const ModelParams& params, const ModelConfig& config,
                        const AttributedGraph& g, const Eigen::VectorXd& target,
                        double pos_weight = 1.0);

// Compares every analytic gradient entry against central differences on a
// small random instance; returns the maximum relative error.
double grad_check(const ModelConfig& config, std::uint64_t seed);
double grad_check(Task task, bool with_edge_features, std::uint64_t seed);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int step = 0;
  std::vector<Eigen::MatrixXd> m, v;  // aligned with named_tensors order
};

AdamState init_adam(ModelParams& params, double lr);
void adam_step(ModelParams& params, ModelParams& grads, AdamState& state);

struct TrainOptions {
  int epochs = 30;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double pos_weight = -1.0;  // <0: 1 for graph task, N_neg/N_pos for vertex task
};

struct EpochLoss {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> log;
  double pos_weight = 1.0;
};

// Full-batch per-graph updates in seeded shuffled order; Glorot-uniform init.
// Targets come from graph_label / vertex_labels on the graphs themselves.
TrainResult train(const ModelConfig& config, const std::vector<AttributedGraph>& train_set,
                  const std::vector<AttributedGraph>& val_set, const TrainOptions& options);

struct EvalResult {
  double accuracy = 0.0;
  // Confusion counts at the given threshold; predicted positive iff p > threshold.
  long tn = 0, fp = 0, fn = 0, tp = 0;
  double mean_pred_pos = 0.0;  // mean prediction over true-positive-class items
  double mean_pred_neg = 0.0;
  long count = 0;
};

EvalResult evaluate(const ModelParams& params, const ModelConfig& config,
                    const std::vector<AttributedGraph>& dataset, double threshold = 0.5);

struct VolumePrediction {
  double probability = 0.0;
  int label = 0;  // probability > 0.5
};

// Mean of patch probabilities, thresholded at 0.5 (strict).
VolumePrediction aggregate_volume(const std::vector<double>& patch_predictions);

// Checkpoint JSON: {"config": {...}, "feature_stats": {...}|null,
// "tensors": {name: {"shape": [...], "data": [...]}}}. Round-trips exactly.
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::optional<FeatureStats> feature_stats;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace skelgraph
