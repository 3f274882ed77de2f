#include "skelgraph/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "skelgraph/rng.hpp"

namespace skelgraph {

using nlohmann::json;

Task task_from_string(const std::string& name) {
  if (name == "graph_classification") return Task::kGraphClassification;
  if (name == "vertex_segmentation") return Task::kVertexSegmentation;
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::string task_to_string(Task task) {
  return task == Task::kGraphClassification ? "graph_classification" : "vertex_segmentation";
}

ModelConfig default_config(Task task, int vertex_feature_dim, int edge_feature_dim) {
  ModelConfig config;
  config.task = task;
  config.num_attention_layers = task == Task::kGraphClassification ? 4 : 3;
  config.vertex_feature_dim = vertex_feature_dim;
  config.edge_feature_dim = edge_feature_dim;
  return config;
}

namespace {

void validate_config(const ModelConfig& config) {
  if (config.num_attention_layers < 1) throw std::invalid_argument("need at least one attention layer");
  if (config.hidden_dim < 1 || config.num_heads < 1 || config.vertex_feature_dim < 1)
    throw std::invalid_argument("model dimensions must be positive");
  if (config.hidden_dim % config.num_heads != 0)
    throw std::invalid_argument("hidden_dim must be divisible by num_heads");
  if (config.edge_feature_dim < 0) throw std::invalid_argument("edge_feature_dim must be >= 0");
  if (config.fc_layers != 2) throw std::invalid_argument("fc_layers is fixed at 2");
}

double leaky_relu(double x, double slope) { return x > 0 ? x : slope * x; }
double leaky_relu_grad(double x, double slope) { return x > 0 ? 1.0 : slope; }
double elu(double x) { return x > 0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0 ? 1.0 : std::exp(x); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kProbClamp = 1e-7;

// Per vertex: (neighbor, undirected edge row), the self entry first with edge
// row -1, then neighbors in ascending id order. Fixed order keeps float
// summation deterministic.
std::vector<std::vector<std::pair<int, int>>> closed_neighborhoods(const AttributedGraph& g) {
  std::vector<std::vector<std::pair<int, int>>> nbr(static_cast<size_t>(g.num_vertices));
  for (int v = 0; v < g.num_vertices; ++v) nbr[static_cast<size_t>(v)].push_back({v, -1});
  for (Eigen::Index e = 0; e < g.edges.rows(); ++e) {
    nbr[static_cast<size_t>(g.edges(e, 0))].push_back({g.edges(e, 1), static_cast<int>(e)});
    nbr[static_cast<size_t>(g.edges(e, 1))].push_back({g.edges(e, 0), static_cast<int>(e)});
  }
  for (auto& list : nbr)
    std::sort(list.begin() + 1, list.end());
  return nbr;
}

struct LayerTrace {
  Eigen::MatrixXd h_in;                  // n x d_in
  Eigen::MatrixXd z;                     // n x hidden
  std::vector<Eigen::MatrixXd> raw;      // per vertex: |N(i)|+1 x heads, pre-LeakyReLU
  std::vector<Eigen::MatrixXd> alpha;    // per vertex: |N(i)|+1 x heads
  Eigen::MatrixXd pooled;                // n x hidden, pre-ELU
};

Eigen::MatrixXd layer_forward(const GatLayerParams& layer, const ModelConfig& config,
                              const AttributedGraph& g,
                              const std::vector<std::vector<std::pair<int, int>>>& nbr,
                              const Eigen::MatrixXd& h, LayerTrace* trace) {
  const int n = g.num_vertices;
  const int hidden = static_cast<int>(layer.W.rows());
  const int heads = config.num_heads;
  const int dh = hidden / heads;
  const int de = config.edge_feature_dim;
  if (layer.W.cols() != h.cols()) throw std::invalid_argument("attention weight/input shape mismatch");
  if (h.rows() != n) throw std::invalid_argument("hidden state row count differs from vertex count");
  if (de > 0 && (!g.edge_features || g.edge_features->cols() != de))
    throw std::invalid_argument("graph edge features do not match edge_feature_dim");

  const Eigen::MatrixXd z = h * layer.W.transpose();  // n x hidden
  // Per-head endpoint scores.
  Eigen::MatrixXd s_src(n, heads), s_dst(n, heads);
  for (int k = 0; k < heads; ++k) {
    s_src.col(k) = z.middleCols(k * dh, dh) * layer.a_src.col(0).segment(k * dh, dh);
    s_dst.col(k) = z.middleCols(k * dh, dh) * layer.a_dst.col(0).segment(k * dh, dh);
  }

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(n, hidden);
  if (trace) {
    trace->h_in = h;
    trace->z = z;
    trace->raw.resize(static_cast<size_t>(n));
    trace->alpha.resize(static_cast<size_t>(n));
  }
  for (int i = 0; i < n; ++i) {
    const auto& list = nbr[static_cast<size_t>(i)];
    const int deg = static_cast<int>(list.size());
    Eigen::MatrixXd raw(deg, heads);
    for (int a = 0; a < deg; ++a) {
      const auto [j, edge] = list[static_cast<size_t>(a)];
      for (int k = 0; k < heads; ++k) {
        double score = s_src(i, k) + s_dst(j, k);
        if (de > 0 && edge >= 0)
          score += layer.U.row(k).dot(g.edge_features->row(edge));
        raw(a, k) = score;
      }
    }
    Eigen::MatrixXd scores = raw.unaryExpr([&](double x) { return leaky_relu(x, config.leaky_slope); });
    Eigen::MatrixXd alpha(deg, heads);
    for (int k = 0; k < heads; ++k) {
      const double peak = scores.col(k).maxCoeff();
      const Eigen::ArrayXd ex = (scores.col(k).array() - peak).exp();
      alpha.col(k) = (ex / ex.sum()).matrix();
    }
    for (int a = 0; a < deg; ++a) {
      const int j = list[static_cast<size_t>(a)].first;
      for (int k = 0; k < heads; ++k)
        pooled.row(i).segment(k * dh, dh) += alpha(a, k) * z.row(j).segment(k * dh, dh);
    }
    if (trace) {
      trace->raw[static_cast<size_t>(i)] = std::move(raw);
      trace->alpha[static_cast<size_t>(i)] = std::move(alpha);
    }
  }
  if (trace) trace->pooled = pooled;
  return pooled.unaryExpr([](double x) { return elu(x); });
}

struct ForwardTrace {
  std::vector<std::vector<std::pair<int, int>>> nbr;
  std::vector<LayerTrace> layers;
  Eigen::MatrixXd final_state;  // n x hidden
  Eigen::MatrixXd fc_in;        // rows x hidden (1 row for graph task)
  Eigen::MatrixXd u1;           // rows x hidden, pre-ReLU
  Eigen::MatrixXd r;            // rows x hidden
  Eigen::VectorXd u2;           // rows, pre-sigmoid
  Eigen::VectorXd pred;         // rows, sigmoid output
};

void run_forward(const ModelParams& params, const ModelConfig& config, const AttributedGraph& g,
                 ForwardTrace& trace) {
  validate_config(config);
  if (static_cast<int>(params.att.size()) != config.num_attention_layers)
    throw std::invalid_argument("parameter/layer count mismatch");
  if (g.num_vertices < 1) throw std::invalid_argument("forward needs at least one vertex");
  if (!g.vertex_features || g.vertex_features->cols() != config.vertex_feature_dim)
    throw std::invalid_argument("graph vertex features do not match vertex_feature_dim");

  trace.nbr = closed_neighborhoods(g);
  trace.layers.resize(params.att.size());
  Eigen::MatrixXd h = *g.vertex_features;
  for (size_t l = 0; l < params.att.size(); ++l)
    h = layer_forward(params.att[l], config, g, trace.nbr, h, &trace.layers[l]);
  trace.final_state = h;

  if (config.task == Task::kGraphClassification)
    trace.fc_in = h.colwise().mean();
  else
    trace.fc_in = h;

  trace.u1 = (trace.fc_in * params.fc1.W.transpose()).rowwise() + params.fc1.b.col(0).transpose();
  trace.r = trace.u1.cwiseMax(0.0);
  trace.u2 = trace.r * params.fc2.W.transpose().col(0);
  trace.u2.array() += params.fc2.b(0, 0);
  trace.pred = trace.u2.unaryExpr([](double x) { return sigmoid(x); });
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z;
  z.att.resize(params.att.size());
  for (size_t l = 0; l < params.att.size(); ++l) {
    z.att[l].W = Eigen::MatrixXd::Zero(params.att[l].W.rows(), params.att[l].W.cols());
    z.att[l].a_src = Eigen::MatrixXd::Zero(params.att[l].a_src.rows(), 1);
    z.att[l].a_dst = Eigen::MatrixXd::Zero(params.att[l].a_dst.rows(), 1);
    z.att[l].U = Eigen::MatrixXd::Zero(params.att[l].U.rows(), params.att[l].U.cols());
  }
  z.fc1.W = Eigen::MatrixXd::Zero(params.fc1.W.rows(), params.fc1.W.cols());
  z.fc1.b = Eigen::MatrixXd::Zero(params.fc1.b.rows(), 1);
  z.fc2.W = Eigen::MatrixXd::Zero(params.fc2.W.rows(), params.fc2.W.cols());
  z.fc2.b = Eigen::MatrixXd::Zero(params.fc2.b.rows(), 1);
  return z;
}

}  // namespace

std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_tensors(ModelParams& params) {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  for (size_t l = 0; l < params.att.size(); ++l) {
    const std::string base = "att" + std::to_string(l) + ".";
    out.emplace_back(base + "W", &params.att[l].W);
    out.emplace_back(base + "a_src", &params.att[l].a_src);
    out.emplace_back(base + "a_dst", &params.att[l].a_dst);
    out.emplace_back(base + "U", &params.att[l].U);
  }
  out.emplace_back("fc1.weight", &params.fc1.W);
  out.emplace_back("fc1.bias", &params.fc1.b);
  out.emplace_back("fc2.weight", &params.fc2.W);
  out.emplace_back("fc2.bias", &params.fc2.b);
  return out;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  validate_config(config);
  ModelParams params;
  params.att.resize(static_cast<size_t>(config.num_attention_layers));
  for (int l = 0; l < config.num_attention_layers; ++l) {
    const int d_in = l == 0 ? config.vertex_feature_dim : config.hidden_dim;
    params.att[static_cast<size_t>(l)].W.resize(config.hidden_dim, d_in);
    params.att[static_cast<size_t>(l)].a_src.resize(config.hidden_dim, 1);
    params.att[static_cast<size_t>(l)].a_dst.resize(config.hidden_dim, 1);
    params.att[static_cast<size_t>(l)].U.resize(config.edge_feature_dim > 0 ? config.num_heads : 0,
                                                config.edge_feature_dim);
  }
  params.fc1.W.resize(config.hidden_dim, config.hidden_dim);
  params.fc1.b = Eigen::MatrixXd::Zero(config.hidden_dim, 1);
  params.fc2.W.resize(1, config.hidden_dim);
  params.fc2.b = Eigen::MatrixXd::Zero(1, 1);

  Rng rng(seed);
  // Glorot-uniform fill in named order, row-major within each tensor; biases
  // stay zero.
  for (auto& [name, tensor] : named_tensors(params)) {
    if (name == "fc1.bias" || name == "fc2.bias") continue;
    if (tensor->size() == 0) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(tensor->rows() + tensor->cols()));
    for (Eigen::Index r = 0; r < tensor->rows(); ++r)
      for (Eigen::Index c = 0; c < tensor->cols(); ++c)
        (*tensor)(r, c) = rng.uniform(-limit, limit);
  }
  return params;
}

Eigen::MatrixXd gat_layer(const GatLayerParams& layer, const ModelConfig& config,
                          const AttributedGraph& g, const Eigen::MatrixXd& h) {
  validate_config(config);
  return layer_forward(layer, config, g, closed_neighborhoods(g), h, nullptr);
}

Eigen::VectorXd forward(const ModelParams& params, const ModelConfig& config,
                        const AttributedGraph& g) {
  ForwardTrace trace;
  run_forward(params, config, g, trace);
  return trace.pred;
}

double bce_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target, double pos_weight) {
  if (pred.size() != target.size()) throw std::invalid_argument("prediction/target size mismatch");
  if (pred.size() == 0) throw std::invalid_argument("empty prediction vector");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kProbClamp, 1.0 - kProbClamp);
    const double y = target[i];
    total += -(pos_weight * y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return total / static_cast<double>(pred.size());
}

BackwardResult backward(const ModelParams& params, const ModelConfig& config,
                        const AttributedGraph& g, const Eigen::VectorXd& target,
                        double pos_weight) {
  ForwardTrace trace;
  run_forward(params, config, g, trace);
  if (trace.pred.size() != target.size())
    throw std::invalid_argument("prediction/target size mismatch");

  BackwardResult result;
  result.predictions = trace.pred;
  result.loss = bce_loss(trace.pred, target, pos_weight);
  result.grads = zeros_like(params);

  const Eigen::Index rows = trace.pred.size();
  const double inv_n = 1.0 / static_cast<double>(rows);

  // Loss -> pre-sigmoid logits. Predictions outside the clamp window carry no
  // gradient.
  Eigen::VectorXd du2(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double p = trace.pred[i];
    if (p < kProbClamp || p > 1.0 - kProbClamp) {
      du2[i] = 0.0;
      continue;
    }
    const double y = target[i];
    const double dldp = (-pos_weight * y / p + (1.0 - y) / (1.0 - p)) * inv_n;
    du2[i] = dldp * p * (1.0 - p);
  }

  // Dense head.
  result.grads.fc2.W.row(0) = du2.transpose() * trace.r;
  result.grads.fc2.b(0, 0) = du2.sum();
  Eigen::MatrixXd dr = du2 * params.fc2.W;  // rows x hidden
  Eigen::MatrixXd du1 =
      dr.cwiseProduct((trace.u1.array() > 0.0).cast<double>().matrix());  // ReLU'(0) = 0
  result.grads.fc1.W = du1.transpose() * trace.fc_in;
  result.grads.fc1.b.col(0) = du1.colwise().sum().transpose();
  Eigen::MatrixXd dfc_in = du1 * params.fc1.W;  // rows x hidden

  const int n = g.num_vertices;
  Eigen::MatrixXd dh;  // gradient w.r.t. the current layer output, n x hidden
  if (config.task == Task::kGraphClassification)
    dh = (Eigen::VectorXd::Ones(n) * dfc_in.row(0)) / static_cast<double>(n);  // mean pool
  else
    dh = dfc_in;

  const int hidden = config.hidden_dim;
  const int heads = config.num_heads;
  const int dh_dim = hidden / heads;
  const int de = config.edge_feature_dim;

  for (int l = config.num_attention_layers - 1; l >= 0; --l) {
    const LayerTrace& lt = trace.layers[static_cast<size_t>(l)];
    const GatLayerParams& lp = params.att[static_cast<size_t>(l)];
    GatLayerParams& lg = result.grads.att[static_cast<size_t>(l)];

    // Through ELU.
    Eigen::MatrixXd ds = dh.cwiseProduct(lt.pooled.unaryExpr([](double x) { return elu_grad(x); }));

    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, hidden);
    Eigen::MatrixXd ds_src = Eigen::MatrixXd::Zero(n, heads);
    Eigen::MatrixXd ds_dst = Eigen::MatrixXd::Zero(n, heads);

    for (int i = 0; i < n; ++i) {
      const auto& list = trace.nbr[static_cast<size_t>(i)];
      const int deg = static_cast<int>(list.size());
      const Eigen::MatrixXd& alpha = lt.alpha[static_cast<size_t>(i)];
      const Eigen::MatrixXd& raw = lt.raw[static_cast<size_t>(i)];

      // d(pooled_i) -> d(alpha), d(z_j)
      Eigen::MatrixXd dalpha(deg, heads);
      for (int a = 0; a < deg; ++a) {
        const int j = list[static_cast<size_t>(a)].first;
        for (int k = 0; k < heads; ++k) {
          dalpha(a, k) = ds.row(i).segment(k * dh_dim, dh_dim)
                             .dot(lt.z.row(j).segment(k * dh_dim, dh_dim));
          dz.row(j).segment(k * dh_dim, dh_dim) +=
              alpha(a, k) * ds.row(i).segment(k * dh_dim, dh_dim);
        }
      }
      // Softmax, then LeakyReLU.
      for (int k = 0; k < heads; ++k) {
        const double dot = alpha.col(k).dot(dalpha.col(k));
        for (int a = 0; a < deg; ++a) {
          const double de_score = alpha(a, k) * (dalpha(a, k) - dot);
          const double draw = de_score * leaky_relu_grad(raw(a, k), config.leaky_slope);
          const auto [j, edge] = list[static_cast<size_t>(a)];
          ds_src(i, k) += draw;
          ds_dst(j, k) += draw;
          if (de > 0 && edge >= 0) lg.U.row(k) += draw * g.edge_features->row(edge);
        }
      }
    }

    // Endpoint scores -> a_src/a_dst and z.
    for (int k = 0; k < heads; ++k) {
      lg.a_src.col(0).segment(k * dh_dim, dh_dim) +=
          lt.z.middleCols(k * dh_dim, dh_dim).transpose() * ds_src.col(k);
      lg.a_dst.col(0).segment(k * dh_dim, dh_dim) +=
          lt.z.middleCols(k * dh_dim, dh_dim).transpose() * ds_dst.col(k);
      dz.middleCols(k * dh_dim, dh_dim) +=
          ds_src.col(k) * lp.a_src.col(0).segment(k * dh_dim, dh_dim).transpose() +
          ds_dst.col(k) * lp.a_dst.col(0).segment(k * dh_dim, dh_dim).transpose();
    }

    // z = h W^T
    lg.W = dz.transpose() * lt.h_in;
    dh = dz * lp.W;  // gradient w.r.t. this layer's input
  }

  return result;
}

double grad_check(const ModelConfig& config, std::uint64_t seed) {
  validate_config(config);
  Rng rng(seed);

  AttributedGraph g;
  const int n = 6;
  g.num_vertices = n;
  const int pairs[8][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {0, 3}, {1, 4}};
  g.edges.resize(8, 2);
  for (int e = 0; e < 8; ++e) {
    g.edges(e, 0) = pairs[e][0];
    g.edges(e, 1) = pairs[e][1];
  }

  // Central differences are only trusted away from activation kinks, so
  // resample the instance until every pre-activation clears a guard band.
  ModelParams params;
  Eigen::VectorXd target;
  const double pos_weight = 1.5;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng draw = rng.fork(static_cast<std::uint64_t>(attempt));
    Eigen::MatrixXd vf(n, config.vertex_feature_dim);
    for (Eigen::Index r = 0; r < vf.rows(); ++r)
      for (Eigen::Index c = 0; c < vf.cols(); ++c) vf(r, c) = draw.normal();
    g.vertex_features = std::move(vf);
    if (config.edge_feature_dim > 0) {
      Eigen::MatrixXd ef(8, config.edge_feature_dim);
      for (Eigen::Index r = 0; r < ef.rows(); ++r)
        for (Eigen::Index c = 0; c < ef.cols(); ++c) ef(r, c) = draw.normal();
      g.edge_features = std::move(ef);
    } else {
      g.edge_features.reset();
    }
    if (config.task == Task::kGraphClassification) {
      target = Eigen::VectorXd::Constant(1, static_cast<double>(draw.uniform_int(0, 1)));
    } else {
      target.resize(n);
      for (int v = 0; v < n; ++v) target[v] = static_cast<double>(draw.uniform_int(0, 1));
    }
    params = init_params(config, draw.next_u64());

    ForwardTrace trace;
    run_forward(params, config, g, trace);
    double margin = std::numeric_limits<double>::infinity();
    for (const LayerTrace& lt : trace.layers)
      for (const Eigen::MatrixXd& raw : lt.raw)
        margin = std::min(margin, raw.cwiseAbs().minCoeff());
    margin = std::min(margin, trace.u1.cwiseAbs().minCoeff());
    if (margin > 1e-3) break;
  }

  const BackwardResult analytic = backward(params, config, g, target, pos_weight);

  double worst = 0.0;
  ModelParams probe = params;
  auto tensors = named_tensors(probe);
  ModelParams grads = analytic.grads;
  auto grad_tensors = named_tensors(grads);
  for (size_t t = 0; t < tensors.size(); ++t) {
    Eigen::MatrixXd* tensor = tensors[t].second;
    for (Eigen::Index r = 0; r < tensor->rows(); ++r)
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
        const double theta = (*tensor)(r, c);
        const double h = 1e-5 * std::max(1.0, std::abs(theta));
        (*tensor)(r, c) = theta + h;
        const double up = bce_loss(forward(probe, config, g), target, pos_weight);
        (*tensor)(r, c) = theta - h;
        const double down = bce_loss(forward(probe, config, g), target, pos_weight);
        (*tensor)(r, c) = theta;
        const double numeric = (up - down) / (2.0 * h);
        const double exact = (*grad_tensors[t].second)(r, c);
        const double rel = std::abs(exact - numeric) /
                           std::max({std::abs(exact), std::abs(numeric), 1e-8});
        worst = std::max(worst, rel);
      }
  }
  return worst;
}

double grad_check(Task task, bool with_edge_features, std::uint64_t seed) {
  ModelConfig config;
  config.task = task;
  config.num_attention_layers = 2;
  config.hidden_dim = 4;
  config.num_heads = 2;
  config.vertex_feature_dim = 3;
  config.edge_feature_dim = with_edge_features ? 2 : 0;
  return grad_check(config, seed);
}

AdamState init_adam(ModelParams& params, double lr) {
  AdamState state;
  state.lr = lr;
  for (auto& [name, tensor] : named_tensors(params)) {
    (void)name;
    state.m.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
    state.v.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
  }
  return state;
}

void adam_step(ModelParams& params, ModelParams& grads, AdamState& state) {
  auto tensors = named_tensors(params);
  auto grad_tensors = named_tensors(grads);
  if (tensors.size() != grad_tensors.size() || tensors.size() != state.m.size())
    throw std::invalid_argument("optimizer state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (size_t t = 0; t < tensors.size(); ++t) {
    const Eigen::MatrixXd& grad = *grad_tensors[t].second;
    Eigen::MatrixXd& m = state.m[t];
    Eigen::MatrixXd& v = state.v[t];
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    tensors[t].second->array() -=
        state.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
  }
}

namespace {

Eigen::VectorXd target_of(const AttributedGraph& g, Task task) {
  if (task == Task::kGraphClassification) {
    if (!g.graph_label) throw std::invalid_argument("graph is missing its graph_label");
    return Eigen::VectorXd::Constant(1, *g.graph_label);
  }
  if (!g.vertex_labels) throw std::invalid_argument("graph is missing vertex_labels");
  return *g.vertex_labels;
}

double mean_loss(const ModelParams& params, const ModelConfig& config,
                 const std::vector<AttributedGraph>& graphs, double pos_weight) {
  if (graphs.empty()) return 0.0;
  double total = 0.0;
  for (const AttributedGraph& g : graphs)
    total += bce_loss(forward(params, config, g), target_of(g, config.task), pos_weight);
  return total / static_cast<double>(graphs.size());
}

}  // namespace

TrainResult train(const ModelConfig& config, const std::vector<AttributedGraph>& train_set,
                  const std::vector<AttributedGraph>& val_set, const TrainOptions& options) {
  validate_config(config);
  if (train_set.empty()) throw std::invalid_argument("empty training set");

  TrainResult result;
  result.pos_weight = options.pos_weight;
  if (result.pos_weight < 0) {
    if (config.task == Task::kGraphClassification) {
      result.pos_weight = 1.0;
    } else {
      long pos = 0, neg = 0;
      for (const AttributedGraph& g : train_set) {
        const Eigen::VectorXd y = target_of(g, config.task);
        for (Eigen::Index i = 0; i < y.size(); ++i) (y[i] > 0.5 ? pos : neg) += 1;
      }
      result.pos_weight = pos > 0 ? static_cast<double>(neg) / static_cast<double>(pos) : 1.0;
    }
  }

  result.params = init_params(config, options.seed);
  if (options.epochs <= 0) return result;  // initial params, empty log

  AdamState adam = init_adam(result.params, options.lr);
  Rng order_rng = Rng(options.seed).fork(1);
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  result.log.push_back({0, mean_loss(result.params, config, train_set, result.pos_weight),
                        mean_loss(result.params, config, val_set, result.pos_weight)});
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (const int idx : order) {
      const AttributedGraph& g = train_set[static_cast<size_t>(idx)];
      BackwardResult br = backward(result.params, config, g, target_of(g, config.task),
                                   result.pos_weight);
      adam_step(result.params, br.grads, adam);
    }
    result.log.push_back({epoch, mean_loss(result.params, config, train_set, result.pos_weight),
                          mean_loss(result.params, config, val_set, result.pos_weight)});
  }
  return result;
}

EvalResult evaluate(const ModelParams& params, const ModelConfig& config,
                    const std::vector<AttributedGraph>& dataset, double threshold) {
  EvalResult result;
  double sum_pos = 0.0, sum_neg = 0.0;
  long n_pos = 0, n_neg = 0;
  for (const AttributedGraph& g : dataset) {
    const Eigen::VectorXd pred = forward(params, config, g);
    const Eigen::VectorXd y = target_of(g, config.task);
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      const bool truth = y[i] > 0.5;
      const bool called = pred[i] > threshold;
      if (truth && called) ++result.tp;
      if (truth && !called) ++result.fn;
      if (!truth && called) ++result.fp;
      if (!truth && !called) ++result.tn;
      (truth ? sum_pos : sum_neg) += pred[i];
      (truth ? n_pos : n_neg) += 1;
      ++result.count;
    }
  }
  if (result.count > 0)
    result.accuracy = static_cast<double>(result.tp + result.tn) / static_cast<double>(result.count);
  result.mean_pred_pos = n_pos > 0 ? sum_pos / static_cast<double>(n_pos) : 0.0;
  result.mean_pred_neg = n_neg > 0 ? sum_neg / static_cast<double>(n_neg) : 0.0;
  return result;
}

VolumePrediction aggregate_volume(const std::vector<double>& patch_predictions) {
  if (patch_predictions.empty()) throw std::invalid_argument("no patch predictions to aggregate");
  VolumePrediction out;
  out.probability = std::accumulate(patch_predictions.begin(), patch_predictions.end(), 0.0) /
                    static_cast<double>(patch_predictions.size());
  out.label = out.probability > 0.5 ? 1 : 0;
  return out;
}

namespace {

json config_to_json(const ModelConfig& config) {
  return json{{"task", task_to_string(config.task)},
              {"num_attention_layers", config.num_attention_layers},
              {"hidden_dim", config.hidden_dim},
              {"num_heads", config.num_heads},
              {"vertex_feature_dim", config.vertex_feature_dim},
              {"edge_feature_dim", config.edge_feature_dim},
              {"fc_layers", config.fc_layers},
              {"leaky_slope", config.leaky_slope}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig config;
  config.task = task_from_string(j.at("task").get<std::string>());
  config.num_attention_layers = j.at("num_attention_layers").get<int>();
  config.hidden_dim = j.at("hidden_dim").get<int>();
  config.num_heads = j.at("num_heads").get<int>();
  config.vertex_feature_dim = j.at("vertex_feature_dim").get<int>();
  config.edge_feature_dim = j.at("edge_feature_dim").get<int>();
  config.fc_layers = j.at("fc_layers").get<int>();
  config.leaky_slope = j.at("leaky_slope").get<double>();
  return config;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json j;
  j["config"] = config_to_json(ckpt.config);
  if (ckpt.feature_stats) {
    j["feature_stats"] = {{"vertex_mean", vector_to_json(ckpt.feature_stats->vertex_mean)},
                          {"vertex_std", vector_to_json(ckpt.feature_stats->vertex_std)},
                          {"edge_mean", vector_to_json(ckpt.feature_stats->edge_mean)},
                          {"edge_std", vector_to_json(ckpt.feature_stats->edge_std)}};
  } else {
    j["feature_stats"] = nullptr;
  }
  json tensors = json::object();
  ModelParams copy = ckpt.params;
  for (const auto& [name, tensor] : named_tensors(copy)) {
    json data = json::array();
    for (Eigen::Index r = 0; r < tensor->rows(); ++r)
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) data.push_back((*tensor)(r, c));
    tensors[name] = {{"shape", {tensor->rows(), tensor->cols()}}, {"data", std::move(data)}};
  }
  j["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("malformed JSON in " + path);

  Checkpoint ckpt;
  ckpt.config = config_from_json(j.at("config"));
  ckpt.params = init_params(ckpt.config, 0);  // right shapes, then overwritten
  for (auto& [name, tensor] : named_tensors(ckpt.params)) {
    if (!j.at("tensors").contains(name))
      throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
    const json& entry = j["tensors"][name];
    const Eigen::Index rows = entry.at("shape")[0].get<Eigen::Index>();
    const Eigen::Index cols = entry.at("shape")[1].get<Eigen::Index>();
    if (rows != tensor->rows() || cols != tensor->cols())
      throw std::runtime_error("checkpoint tensor '" + name + "' shape does not match config");
    const json& data = entry.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw std::runtime_error("checkpoint tensor '" + name + "' data length mismatch");
    Eigen::Index flat = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) (*tensor)(r, c) = data[flat++].get<double>();
  }
  if (!j.at("feature_stats").is_null()) {
    FeatureStats stats;
    stats.vertex_mean = vector_from_json(j["feature_stats"].at("vertex_mean"));
    stats.vertex_std = vector_from_json(j["feature_stats"].at("vertex_std"));
    stats.edge_mean = vector_from_json(j["feature_stats"].at("edge_mean"));
    stats.edge_std = vector_from_json(j["feature_stats"].at("edge_std"));
    ckpt.feature_stats = std::move(stats);
  }
  return ckpt;
}

}  // namespace skelgraph
