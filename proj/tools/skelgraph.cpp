#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skelgraph/convert.hpp"
#include "skelgraph/features.hpp"
#include "skelgraph/io.hpp"
#include "skelgraph/nn.hpp"
#include "skelgraph/pipeline.hpp"
#include "skelgraph/rng.hpp"
#include "skelgraph/skeleton.hpp"
#include "skelgraph/synth.hpp"
#include "skelgraph/tabular.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skelgraph;

namespace {

// Values from --config files apply only where the flag was not passed on the
// command line, so flags always win. Keys use underscores (e.g. "max_nodes").
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::runtime_error("malformed config " + path);
  return j;
}

template <typename T>
void config_override(const CLI::App* cmd, const json& cfg, const std::string& flag,
                     const std::string& key, T& value) {
  if (cmd->count("--" + flag) == 0 && cfg.contains(key)) value = cfg[key].get<T>();
}

std::string input_stem(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (const std::string suffix :
       {".vol.json", ".vol.bin", ".graph.json", ".off", ".obj", ".json", ".txt", ".xyz"}) {
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

std::vector<std::string> sorted(std::vector<std::string> paths) {
  std::sort(paths.begin(), paths.end());
  return paths;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(static_cast<size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

json metrics_json(const EvalResult& r) {
  return json{{"accuracy", r.accuracy},
              {"confusion", {{"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}, {"tp", r.tp}}},
              {"mean_pred_pos", r.mean_pred_pos},
              {"mean_pred_neg", r.mean_pred_neg},
              {"count", r.count}};
}

Task task_from_flag(const std::string& flag) {
  if (flag == "graph-class") return Task::kGraphClassification;
  if (flag == "vertex-seg") return Task::kVertexSegmentation;
  throw std::runtime_error("unknown task '" + flag + "' (expected graph-class or vertex-seg)");
}

// ---------------------------------------------------------------- generate

int cmd_generate(const std::string& what, int count, std::uint64_t seed, int slices, double gap,
                 const std::string& out_dir) {
  json manifest = {{"kind", what}, {"count", count}, {"seed", seed}, {"samples", json::array()}};

  if (what == "grids") {
    manifest["slices"] = slices;
    const std::vector<GridSample> samples = gen_grid_dataset(count, seed, slices);
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
      const GridSample& s = samples[static_cast<size_t>(i)];
      const std::string stem = "grid_" + zero_pad(i, 3);
      write_volume(s.image, (fs::path(out_dir) / stem).string());
      manifest["samples"].push_back({{"stem", stem},
                                     {"score", s.score},
                                     {"label", s.label},
                                     {"jitter_sigma", s.params.jitter_sigma},
                                     {"rupture_prob", s.params.rupture_prob},
                                     {"blob_count", s.params.blob_count},
                                     {"seed", s.params.seed}});
    }
  } else if (what == "parts") {
    Rng rng(seed);
    std::vector<std::pair<PartPair, AttributedGraph>> pairs;
    for (int i = 0; i < count; ++i) {
      PartPairParams params;
      params.gap = gap;
      params.motion_seed = rng.fork(static_cast<std::uint64_t>(i)).next_u64();
      const PartPair pair = gen_part_pair(params);
      AttributedGraph g = part_pair_to_graph(pair);
      pairs.emplace_back(pair, std::move(g));
    }
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
      const auto& [pair, g] = pairs[static_cast<size_t>(i)];
      const std::string stem = "pair_" + zero_pad(i, 3);
      write_mesh_off(pair.part_a, (fs::path(out_dir) / (stem + "_a.off")).string());
      write_mesh_off(pair.part_b, (fs::path(out_dir) / (stem + "_b.off")).string());
      write_graph(g, (fs::path(out_dir) / (stem + ".graph.json")).string());
      manifest["samples"].push_back({{"stem", stem},
                                     {"gap", gap},
                                     {"eps", pair.eps},
                                     {"motion_seed", pair.params.motion_seed},
                                     {"contact_vertices", g.vertex_labels->sum()}});
    }
  } else {
    throw std::runtime_error("unknown dataset kind '" + what + "' (expected grids or parts)");
  }
  write_json(manifest, (fs::path(out_dir) / "manifest.json").string());
  std::cout << "wrote " << count << " " << what << " samples to " << out_dir << "\n";
  return 0;
}

// ----------------------------------------------------------------- convert

int cmd_convert(const std::string& from, const std::vector<std::string>& inputs,
                const std::string& out_dir, double threshold, double radius, int knn,
                const std::string& metric_name) {
  const Metric metric = metric_from_string(metric_name);
  std::vector<std::pair<std::string, AttributedGraph>> done;
  for (const std::string& path : sorted(inputs)) {
    AttributedGraph g;
    if (from == "voxel") {
      const VoxelGrid grid = read_volume(path);
      g = voxel_to_graph(binarize(grid, threshold), &grid);
    } else if (from == "mesh") {
      g = mesh_to_graph(read_mesh(path));
    } else if (from == "cloud") {
      const PointCloud cloud = read_point_cloud(path);
      g = knn > 0 ? cloud_to_graph_knn(cloud, knn, metric)
                  : cloud_to_graph_radius(cloud, radius, metric);
    } else {
      throw std::runtime_error("unknown --from '" + from + "' (expected voxel, mesh or cloud)");
    }
    done.emplace_back(input_stem(path), std::move(g));
  }
  fs::create_directories(out_dir);
  for (const auto& [stem, g] : done) {
    const std::string out = (fs::path(out_dir) / (stem + ".graph.json")).string();
    write_graph(g, out);
    std::cout << stem << " -> " << out << " (" << g.num_vertices << " vertices, "
              << g.num_edges() << " edges)\n";
  }
  return 0;
}

// ------------------------------------------------------------- skeletonize

// Labels travel with the dataset manifest: when the volume's directory holds
// a manifest.json whose sample list names this stem, its label is attached to
// every graph cut from the volume.
std::map<std::string, double> manifest_labels(const fs::path& dir) {
  std::map<std::string, double> labels;
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) return labels;
  std::ifstream in(manifest);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("samples")) return labels;
  for (const json& sample : j["samples"])
    if (sample.contains("stem") && sample.contains("label"))
      labels[sample["stem"].get<std::string>()] = sample["label"].get<double>();
  return labels;
}

int cmd_skeletonize(const std::vector<std::string>& inputs, const std::string& out_dir,
                    double threshold, int patch_size, const SnGraphParams& params) {
  std::map<std::string, std::map<std::string, double>> manifests;
  std::vector<std::pair<std::string, AttributedGraph>> done;
  for (const std::string& path : sorted(inputs)) {
    const std::string stem = input_stem(path);
    const VoxelGrid volume = read_volume(path);
    const std::string dir = fs::path(path).parent_path().string();
    if (!manifests.count(dir)) manifests[dir] = manifest_labels(dir);
    const auto& labels = manifests[dir];

    const std::vector<Patch> patches = slice_to_patches(volume, patch_size);
    int written = 0;
    for (size_t p = 0; p < patches.size(); ++p) {
      AttributedGraph g =
          sn_graph(binarize(patches[p].grid, threshold), &patches[p].grid, params);
      if (g.num_vertices == 0) continue;
      if (labels.count(stem)) g.graph_label = labels.at(stem);
      g.meta["volume_id"] = stem;
      g.meta["slice"] = std::to_string(patches[p].source_slice);
      g.meta["patch"] = std::to_string(p);
      const std::string name =
          patches.size() == 1 ? stem : stem + "_p" + zero_pad(static_cast<int>(p), 3);
      done.emplace_back(name, std::move(g));
      ++written;
    }
    std::cout << path << " -> " << written << " skeleton graph(s)\n";
  }
  fs::create_directories(out_dir);
  for (const auto& [name, g] : done)
    write_graph(g, (fs::path(out_dir) / (name + ".graph.json")).string());
  return 0;
}

// --------------------------------------------------------------- featurize

int cmd_featurize(const std::vector<std::string>& inputs, const std::string& out_dir,
                  double theta_tol, bool no_slope) {
  std::vector<std::pair<std::string, AttributedGraph>> done;
  for (const std::string& path : sorted(inputs)) {
    AttributedGraph g = read_graph(path);
    vertex_features(g);
    edge_features(g, theta_tol, !no_slope);
    done.emplace_back(input_stem(path), std::move(g));
  }

  fs::create_directories(out_dir);
  std::ofstream table((fs::path(out_dir) / "descriptors.csv").string());
  if (!table) throw std::runtime_error("cannot write descriptor table");
  table << "file";
  for (const std::string& name : GlobalDescriptor::names()) table << "," << name;
  table << ",label\n";
  table.precision(17);
  for (auto& [stem, g] : done) {
    write_graph(g, (fs::path(out_dir) / (stem + ".graph.json")).string());
    const Eigen::VectorXd d = global_descriptor(g, theta_tol).to_vector();
    table << stem;
    for (Eigen::Index c = 0; c < d.size(); ++c) table << "," << d[c];
    if (g.graph_label)
      table << "," << *g.graph_label << "\n";
    else
      table << ",\n";
  }
  std::cout << "featurized " << done.size() << " graphs into " << out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const std::string& model, const std::string& task_flag,
              const std::vector<std::string>& inputs, const std::string& out_dir, int epochs,
              double lr, std::uint64_t seed, double val_fraction, int hidden, int heads,
              int layers, double pos_weight) {
  std::vector<AttributedGraph> graphs;
  for (const std::string& path : sorted(inputs)) graphs.push_back(read_graph(path));
  if (graphs.empty()) throw std::runtime_error("no input graphs");

  if (model == "forest") {
    Eigen::MatrixXd features;
    Eigen::VectorXi labels;
    descriptor_table(graphs, features, labels);
    const Forest forest = fit_forest(features, labels, 50, 6, seed);
    fs::create_directories(out_dir);
    save_forest(forest, (fs::path(out_dir) / "forest.json").string());
    const Eigen::VectorXd probs = predict_forest(forest, features);
    long correct = 0;
    for (Eigen::Index i = 0; i < probs.size(); ++i)
      if ((probs[i] > 0.5 ? 1 : 0) == labels[i]) ++correct;
    std::cout << "forest training accuracy "
              << static_cast<double>(correct) / static_cast<double>(probs.size()) << "\n";
    return 0;
  }
  if (model != "gat") throw std::runtime_error("unknown --model '" + model + "'");

  const Task task = task_from_flag(task_flag);
  // Seeded validation split.
  std::vector<int> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng(seed).fork(7).shuffle(order);
  const int val_count = std::min(static_cast<int>(graphs.size()) - 1,
                                 static_cast<int>(std::llround(val_fraction * graphs.size())));
  std::vector<AttributedGraph> train_set, val_set;
  for (size_t i = 0; i < order.size(); ++i)
    (static_cast<int>(i) < val_count ? val_set : train_set)
        .push_back(graphs[static_cast<size_t>(order[i])]);

  const FeatureStats stats = fit_feature_stats(train_set);
  for (AttributedGraph& g : train_set) apply_feature_stats(g, stats);
  for (AttributedGraph& g : val_set) apply_feature_stats(g, stats);

  ModelConfig config = default_config(task, static_cast<int>(train_set[0].vertex_features->cols()),
                                      train_set[0].edge_features
                                          ? static_cast<int>(train_set[0].edge_features->cols())
                                          : 0);
  config.hidden_dim = hidden;
  config.num_heads = heads;
  if (layers > 0) config.num_attention_layers = layers;

  TrainOptions options;
  options.epochs = epochs;
  options.lr = lr;
  options.seed = seed;
  options.pos_weight = pos_weight;
  const TrainResult result = train(config, train_set, val_set, options);

  fs::create_directories(out_dir);
  save_checkpoint({config, result.params, stats},
                  (fs::path(out_dir) / "checkpoint.json").string());
  std::ofstream loss((fs::path(out_dir) / "loss.csv").string());
  if (!loss) throw std::runtime_error("cannot write loss log");
  loss << "epoch,train_loss,val_loss\n";
  loss.precision(17);
  for (const EpochLoss& row : result.log)
    loss << row.epoch << "," << row.train_loss << "," << row.val_loss << "\n";
  if (!result.log.empty())
    std::cout << "final train loss " << result.log.back().train_loss << ", val loss "
              << result.log.back().val_loss << " (pos_weight " << result.pos_weight << ")\n";
  return 0;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const std::string& model, const std::vector<std::string>& inputs,
             const std::string& checkpoint_path, const std::string& out_dir, double threshold,
             const std::string& aggregate) {
  std::vector<AttributedGraph> graphs;
  for (const std::string& path : sorted(inputs)) graphs.push_back(read_graph(path));
  if (graphs.empty()) throw std::runtime_error("no input graphs");

  json report;
  if (model == "forest") {
    const Forest forest = load_forest(checkpoint_path);
    Eigen::MatrixXd features;
    Eigen::VectorXi labels;
    descriptor_table(graphs, features, labels);
    const Eigen::VectorXd probs = predict_forest(forest, features);
    EvalResult r;
    double sum_pos = 0.0, sum_neg = 0.0;
    long n_pos = 0, n_neg = 0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      const bool truth = labels[i] == 1;
      const bool called = probs[i] > threshold;
      if (truth && called) ++r.tp;
      if (truth && !called) ++r.fn;
      if (!truth && called) ++r.fp;
      if (!truth && !called) ++r.tn;
      (truth ? sum_pos : sum_neg) += probs[i];
      (truth ? n_pos : n_neg) += 1;
      ++r.count;
    }
    r.accuracy = r.count ? static_cast<double>(r.tp + r.tn) / static_cast<double>(r.count) : 0.0;
    r.mean_pred_pos = n_pos ? sum_pos / static_cast<double>(n_pos) : 0.0;
    r.mean_pred_neg = n_neg ? sum_neg / static_cast<double>(n_neg) : 0.0;
    report = metrics_json(r);
  } else if (model == "gat") {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    if (ckpt.feature_stats)
      for (AttributedGraph& g : graphs) apply_feature_stats(g, *ckpt.feature_stats);
    report = metrics_json(evaluate(ckpt.params, ckpt.config, graphs, threshold));
    if (aggregate == "volume") {
      report["volume_aggregate_accuracy"] =
          volume_aggregate_accuracy(ckpt.params, ckpt.config, graphs);
    }
  } else {
    throw std::runtime_error("unknown --model '" + model + "'");
  }

  fs::create_directories(out_dir);
  const std::string out = (fs::path(out_dir) / "metrics.json").string();
  write_json(report, out);
  std::cout << report.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------- gradcheck

int cmd_gradcheck(std::uint64_t seed, int seeds) {
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s)
    for (const Task task : {Task::kGraphClassification, Task::kVertexSegmentation})
      for (const bool with_edges : {false, true}) {
        const double err = grad_check(task, with_edges, seed + static_cast<std::uint64_t>(s));
        worst = std::max(worst, err);
        std::cout << task_to_string(task) << (with_edges ? " +edges" : "        ") << " seed "
                  << seed + static_cast<std::uint64_t>(s) << ": max rel err " << err << "\n";
      }
  std::cout << "overall max relative error " << worst << "\n";
  return worst < 1e-4 ? 0 : 1;
}

// ------------------------------------------------------------------- stats

int cmd_stats(const std::vector<std::string>& inputs, double threshold) {
  json all = json::array();
  for (const std::string& path : sorted(inputs)) {
    json entry = {{"file", path}};
    if (path.ends_with(".graph.json")) {
      const AttributedGraph g = read_graph(path);
      entry["num_vertices"] = g.num_vertices;
      entry["num_edges"] = g.num_edges();
      entry["connected_components"] = connected_components(g);
      if (g.positions || g.num_edges() == 0) {
        const GlobalDescriptor d = global_descriptor(g);
        json desc;
        const Eigen::VectorXd v = d.to_vector();
        for (size_t i = 0; i < GlobalDescriptor::names().size(); ++i)
          desc[GlobalDescriptor::names()[i]] = v[static_cast<Eigen::Index>(i)];
        entry["descriptor"] = desc;
      }
    } else {
      const VoxelGrid grid = read_volume(path);
      const SparsityStats s = sparsity_stats(binarize(grid, threshold));
      entry["dims"] = {grid.dims.x(), grid.dims.y(), grid.dims.z()};
      entry["foreground_fraction"] = s.foreground_fraction;
      if (s.bounding_box) {
        entry["bounding_box"] = {
            {s.bounding_box->first.x(), s.bounding_box->first.y(), s.bounding_box->first.z()},
            {s.bounding_box->second.x(), s.bounding_box->second.y(), s.bounding_box->second.z()}};
      } else {
        entry["bounding_box"] = nullptr;
      }
    }
    all.push_back(std::move(entry));
  }
  std::cout << all.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attributed-graph toolkit: volumes/meshes/clouds to graphs, features and models"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize grid volumes or part pairs");
  std::string gen_what, gen_out = "data", gen_config;
  int gen_count = 10, gen_slices = 1;
  std::uint64_t gen_seed = 0;
  double gen_gap = 0.0;
  gen->add_option("what", gen_what, "grids or parts")->required();
  gen->add_option("--count", gen_count, "samples to generate");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--slices", gen_slices, "slices per grid volume");
  gen->add_option("--gap", gen_gap, "part separation distance");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--config", gen_config, "JSON config file");

  // convert
  auto* conv = app.add_subcommand("convert", "turn volumes/meshes/clouds into graphs");
  std::string conv_from, conv_out = "graphs", conv_metric = "euclidean", conv_config;
  std::vector<std::string> conv_inputs;
  double conv_threshold = 0.5, conv_radius = 1.0;
  int conv_knn = 0;
  conv->add_option("--from", conv_from, "voxel, mesh or cloud")->required();
  conv->add_option("inputs", conv_inputs, "input files")->required();
  conv->add_option("--out", conv_out, "output directory");
  conv->add_option("--threshold", conv_threshold, "binarization threshold (voxel)");
  conv->add_option("--radius", conv_radius, "connection radius (cloud)");
  conv->add_option("--knn", conv_knn, "k nearest neighbors (cloud; overrides --radius)");
  conv->add_option("--metric", conv_metric, "euclidean, manhattan or feature-euclidean");
  conv->add_option("--config", conv_config, "JSON config file");

  // skeletonize
  auto* skel = app.add_subcommand("skeletonize", "sphere-node skeleton graphs from volumes");
  std::string skel_out = "graphs", skel_config;
  std::vector<std::string> skel_inputs;
  double skel_threshold = 0.5;
  int skel_patch = 256;
  SnGraphParams skel_params;
  skel->add_option("inputs", skel_inputs, "input volumes")->required();
  skel->add_option("--out", skel_out, "output directory");
  skel->add_option("--threshold", skel_threshold, "binarization threshold");
  skel->add_option("--patch-size", skel_patch, "slice tile size");
  skel->add_option("--max-nodes", skel_params.max_nodes, "sphere budget");
  skel->add_option("--r-min", skel_params.r_min, "minimum sphere radius");
  skel->add_option("--tau", skel_params.tau, "contact tolerance");
  skel->add_flag("--connect-components", skel_params.connect_components,
                 "bridge disconnected components");
  skel->add_option("--config", skel_config, "JSON config file");

  // featurize
  auto* feat = app.add_subcommand("featurize", "attach vertex/edge features, emit descriptors");
  std::string feat_out = "featurized", feat_config;
  std::vector<std::string> feat_inputs;
  double feat_theta = 15.0;
  bool feat_no_slope = false;
  feat->add_option("inputs", feat_inputs, "input graphs")->required();
  feat->add_option("--out", feat_out, "output directory");
  feat->add_option("--theta-tol", feat_theta, "slope tolerance in degrees");
  feat->add_flag("--no-slope", feat_no_slope, "skip slope one-hot columns");
  feat->add_option("--config", feat_config, "JSON config file");

  // train
  auto* tr = app.add_subcommand("train", "fit the attention network or the forest baseline");
  std::string tr_model = "gat", tr_task = "graph-class", tr_out = "model", tr_config;
  std::vector<std::string> tr_inputs;
  int tr_epochs = 30, tr_hidden = 32, tr_heads = 1, tr_layers = 0;
  double tr_lr = 1e-3, tr_val = 0.2, tr_pos_weight = -1.0;
  std::uint64_t tr_seed = 0;
  tr->add_option("inputs", tr_inputs, "training graphs")->required();
  tr->add_option("--model", tr_model, "gat or forest");
  tr->add_option("--task", tr_task, "graph-class or vertex-seg");
  tr->add_option("--epochs", tr_epochs, "training epochs");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--val-fraction", tr_val, "validation split fraction");
  tr->add_option("--hidden", tr_hidden, "hidden width");
  tr->add_option("--heads", tr_heads, "attention heads");
  tr->add_option("--layers", tr_layers, "attention layers (0 = task default)");
  tr->add_option("--pos-weight", tr_pos_weight, "positive-class loss weight (<0 = auto)");
  tr->add_option("--out", tr_out, "output directory");
  tr->add_option("--config", tr_config, "JSON config file");

  // eval
  auto* ev = app.add_subcommand("eval", "score a trained model on labeled graphs");
  std::string ev_model = "gat", ev_ckpt, ev_out = "eval", ev_aggregate = "patch", ev_config;
  std::vector<std::string> ev_inputs;
  double ev_threshold = 0.5;
  ev->add_option("inputs", ev_inputs, "evaluation graphs")->required();
  ev->add_option("--model", ev_model, "gat or forest");
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint or forest file")->required();
  ev->add_option("--threshold", ev_threshold, "decision threshold");
  ev->add_option("--aggregate", ev_aggregate, "patch or volume");
  ev->add_option("--out", ev_out, "output directory");
  ev->add_option("--config", ev_config, "JSON config file");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "verify analytic gradients numerically");
  std::uint64_t gc_seed = 0;
  int gc_seeds = 5;
  gc->add_option("--seed", gc_seed, "first seed");
  gc->add_option("--seeds", gc_seeds, "number of seeds");

  // stats
  auto* st = app.add_subcommand("stats", "report volume/graph statistics");
  std::vector<std::string> st_inputs;
  double st_threshold = 0.5;
  st->add_option("inputs", st_inputs, "volumes or graphs")->required();
  st->add_option("--threshold", st_threshold, "binarization threshold for volumes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const json cfg = load_config(gen_config);
      config_override(gen, cfg, "count", "count", gen_count);
      config_override(gen, cfg, "seed", "seed", gen_seed);
      config_override(gen, cfg, "slices", "slices", gen_slices);
      config_override(gen, cfg, "gap", "gap", gen_gap);
      config_override(gen, cfg, "out", "out", gen_out);
      return cmd_generate(gen_what, gen_count, gen_seed, gen_slices, gen_gap, gen_out);
    }
    if (conv->parsed()) {
      const json cfg = load_config(conv_config);
      config_override(conv, cfg, "threshold", "threshold", conv_threshold);
      config_override(conv, cfg, "radius", "radius", conv_radius);
      config_override(conv, cfg, "knn", "knn", conv_knn);
      config_override(conv, cfg, "metric", "metric", conv_metric);
      config_override(conv, cfg, "out", "out", conv_out);
      return cmd_convert(conv_from, conv_inputs, conv_out, conv_threshold, conv_radius, conv_knn,
                         conv_metric);
    }
    if (skel->parsed()) {
      const json cfg = load_config(skel_config);
      config_override(skel, cfg, "threshold", "threshold", skel_threshold);
      config_override(skel, cfg, "patch-size", "patch_size", skel_patch);
      config_override(skel, cfg, "max-nodes", "max_nodes", skel_params.max_nodes);
      config_override(skel, cfg, "r-min", "r_min", skel_params.r_min);
      config_override(skel, cfg, "tau", "tau", skel_params.tau);
      config_override(skel, cfg, "out", "out", skel_out);
      return cmd_skeletonize(skel_inputs, skel_out, skel_threshold, skel_patch, skel_params);
    }
    if (feat->parsed()) {
      const json cfg = load_config(feat_config);
      config_override(feat, cfg, "theta-tol", "theta_tol", feat_theta);
      config_override(feat, cfg, "out", "out", feat_out);
      return cmd_featurize(feat_inputs, feat_out, feat_theta, feat_no_slope);
    }
    if (tr->parsed()) {
      const json cfg = load_config(tr_config);
      config_override(tr, cfg, "model", "model", tr_model);
      config_override(tr, cfg, "task", "task", tr_task);
      config_override(tr, cfg, "epochs", "epochs", tr_epochs);
      config_override(tr, cfg, "lr", "lr", tr_lr);
      config_override(tr, cfg, "seed", "seed", tr_seed);
      config_override(tr, cfg, "val-fraction", "val_fraction", tr_val);
      config_override(tr, cfg, "hidden", "hidden", tr_hidden);
      config_override(tr, cfg, "heads", "heads", tr_heads);
      config_override(tr, cfg, "layers", "layers", tr_layers);
      config_override(tr, cfg, "pos-weight", "pos_weight", tr_pos_weight);
      config_override(tr, cfg, "out", "out", tr_out);
      return cmd_train(tr_model, tr_task, tr_inputs, tr_out, tr_epochs, tr_lr, tr_seed, tr_val,
                       tr_hidden, tr_heads, tr_layers, tr_pos_weight);
    }
    if (ev->parsed()) {
      const json cfg = load_config(ev_config);
      config_override(ev, cfg, "model", "model", ev_model);
      config_override(ev, cfg, "threshold", "threshold", ev_threshold);
      config_override(ev, cfg, "aggregate", "aggregate", ev_aggregate);
      config_override(ev, cfg, "out", "out", ev_out);
      return cmd_eval(ev_model, ev_inputs, ev_ckpt, ev_out, ev_threshold, ev_aggregate);
    }
    if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_seeds);
    if (st->parsed()) return cmd_stats(st_inputs, st_threshold);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
