// Copyright 2026 The qpskbf Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpskbf/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qpskbf/errors.hpp"
#include "qpskbf/parallel.hpp"
#include "qpskbf/version.hpp"

namespace qpskbf {
namespace {

constexpr double kMinSplitGain = 1e-12;
constexpr double kMinHessian = 1e-16;

// Column-major copy of the features plus, per feature, the row order sorted by
// value (ties by row index) and the values in that order.
struct ColumnIndex {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<double> columns;
  std::vector<std::uint32_t> order;
  std::vector<double> sorted_values;

  double value(std::size_t f, std::size_t r) const { return columns[f * rows + r]; }
};

ColumnIndex build_index(const TrainingDataset& ds) {
  ColumnIndex idx;
  idx.rows = ds.rows.size();
  idx.features = feature_length(static_cast<std::size_t>(ds.n_antennas));
  idx.columns.resize(idx.rows * idx.features);
  for (std::size_t r = 0; r < idx.rows; ++r)
    for (std::size_t f = 0; f < idx.features; ++f) idx.columns[f * idx.rows + r] = ds.rows[r].features[f];
  idx.order.resize(idx.rows * idx.features);
  idx.sorted_values.resize(idx.rows * idx.features);
  std::vector<std::uint32_t> perm(idx.rows);
  for (std::size_t f = 0; f < idx.features; ++f) {
    std::iota(perm.begin(), perm.end(), 0U);
    const double* col = idx.columns.data() + f * idx.rows;
    std::sort(perm.begin(), perm.end(), [col](std::uint32_t a, std::uint32_t b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
    for (std::size_t k = 0; k < idx.rows; ++k) {
      idx.order[f * idx.rows + k] = perm[k];
      idx.sorted_values[f * idx.rows + k] = col[perm[k]];
    }
  }
  return idx;
}

double leaf_weight(double g, double h) { return -g / (h + kHessianRegularizer); }

double split_score(double g, double h) { return g * g / (h + kHessianRegularizer); }

// Level-wise exact greedy tree growth on fixed gradients and hessians.
class TreeBuilder {
 public:
  TreeBuilder(const ColumnIndex& idx, const TrainingConfig& cfg)
      : idx_(idx), cfg_(cfg), node_of_row_(idx.rows), rows_(idx.rows) {}

  // Returns the tree and leaves node_of_row() pointing at each row's leaf.
  RegressionTree build(std::span<const double> g, std::span<const double> h) {
    struct Stats {
      double g = 0.0;
      double h = 0.0;
      std::size_t count = 0;
    };
    RegressionTree tree;
    std::vector<Stats> stats(1);
    tree.nodes.emplace_back();
    for (std::size_t r = 0; r < idx_.rows; ++r) {
      node_of_row_[r] = 0;
      stats[0].g += g[r];
      stats[0].h += h[r];
    }
    stats[0].count = idx_.rows;

    std::vector<int> frontier{0};
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf);
    for (int depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
      std::vector<int> slot_of_node(tree.nodes.size(), -1);
      std::vector<int> active;
      for (int node : frontier) {
        if (stats[node].count >= 2 * min_leaf) {
          slot_of_node[node] = static_cast<int>(active.size());
          active.push_back(node);
        }
      }
      if (active.empty()) break;

      for (std::size_t r = 0; r < idx_.rows; ++r) rows_[r] = {slot_of_node[node_of_row_[r]], g[r], h[r]};

      struct Scan {
        double gl = 0.0;
        double hl = 0.0;
        std::size_t nl = 0;
        double last = 0.0;
        double best_gain = kMinSplitGain;
        int best_feature = -1;
        double best_threshold = 0.0;
      };
      std::vector<Scan> scans(active.size());
      std::vector<double> parent_score(active.size());
      for (std::size_t s = 0; s < active.size(); ++s) {
        parent_score[s] = split_score(stats[active[s]].g, stats[active[s]].h);
      }

      for (std::size_t f = 0; f < idx_.features; ++f) {
        for (auto& sc : scans) {
          sc.gl = 0.0;
          sc.hl = 0.0;
          sc.nl = 0;
        }
        const std::uint32_t* order = idx_.order.data() + f * idx_.rows;
        const double* values = idx_.sorted_values.data() + f * idx_.rows;
        for (std::size_t k = 0; k < idx_.rows; ++k) {
          const RowState& rs = rows_[order[k]];
          if (rs.slot < 0) continue;
          Scan& sc = scans[rs.slot];
          const double v = values[k];
          if (sc.nl >= min_leaf && v > sc.last) {
            const Stats& total = stats[active[rs.slot]];
            if (total.count - sc.nl >= min_leaf) {
              const double gain = split_score(sc.gl, sc.hl) +
                                  split_score(total.g - sc.gl, total.h - sc.hl) - parent_score[rs.slot];
              if (gain > sc.best_gain) {
                sc.best_gain = gain;
                sc.best_feature = static_cast<int>(f);
                double threshold = 0.5 * (sc.last + v);
                if (!(threshold > sc.last)) threshold = v;
                sc.best_threshold = threshold;
              }
            }
          }
          sc.gl += rs.g;
          sc.hl += rs.h;
          ++sc.nl;
          sc.last = v;
        }
      }

      std::vector<int> next_frontier;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (scans[s].best_feature < 0) continue;
        const int node = active[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats.emplace_back();
        stats.emplace_back();
        TreeNode& parent = tree.nodes[node];
        parent.feature = scans[s].best_feature;
        parent.threshold = scans[s].best_threshold;
        parent.left = left;
        parent.right = left + 1;
        next_frontier.push_back(left);
        next_frontier.push_back(left + 1);
      }
      if (next_frontier.empty()) break;

      for (std::size_t r = 0; r < idx_.rows; ++r) {
        const TreeNode& node = tree.nodes[node_of_row_[r]];
        if (node.is_leaf()) continue;
        const int child =
            idx_.value(static_cast<std::size_t>(node.feature), r) < node.threshold ? node.left : node.right;
        node_of_row_[r] = child;
        stats[child].g += g[r];
        stats[child].h += h[r];
        ++stats[child].count;
      }
      frontier = std::move(next_frontier);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].is_leaf()) tree.nodes[i].value = cfg_.learning_rate * leaf_weight(stats[i].g, stats[i].h);
    }
    return tree;
  }

  std::span<const int> node_of_row() const { return node_of_row_; }

 private:
  struct RowState {
    int slot = -1;
    double g = 0.0;
    double h = 0.0;
  };
  const ColumnIndex& idx_;
  const TrainingConfig& cfg_;
  std::vector<int> node_of_row_;
  std::vector<RowState> rows_;
};

AntennaClassifier train_antenna(const ColumnIndex& idx, std::span<const std::uint8_t> labels,
                                const TrainingConfig& cfg) {
  const std::size_t n = idx.rows;
  const bool constant = std::all_of(labels.begin(), labels.end(), [&](auto l) { return l == labels[0]; });
  std::vector<double> scores(n * kNumClasses, 0.0);
  std::vector<double> prob(n * kNumClasses);
  std::vector<double> g(n);
  std::vector<double> h(n);
  TreeBuilder builder(idx, cfg);
  AntennaClassifier model;
  model.rounds.reserve(static_cast<std::size_t>(cfg.rounds));

  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      const double* s = &scores[r * kNumClasses];
      const double m = *std::max_element(s, s + kNumClasses);
      double z = 0.0;
      for (int c = 0; c < kNumClasses; ++c) z += std::exp(s[c] - m);
      for (int c = 0; c < kNumClasses; ++c) prob[r * kNumClasses + c] = std::exp(s[c] - m) / z;
    }
    std::array<RegressionTree, kNumClasses> trees;
    for (int c = 0; c < kNumClasses; ++c) {
      double gsum = 0.0;
      double hsum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double p = prob[r * kNumClasses + c];
        g[r] = p - (labels[r] == c ? 1.0 : 0.0);
        h[r] = std::max(p * (1.0 - p), kMinHessian);
        gsum += g[r];
        hsum += h[r];
      }
      if (constant) {
        // Identical rows: every candidate split has negative gain, so the tree is a single leaf.
        TreeNode leaf;
        leaf.value = cfg.learning_rate * leaf_weight(gsum, hsum);
        trees[c].nodes = {leaf};
        for (std::size_t r = 0; r < n; ++r) scores[r * kNumClasses + c] += leaf.value;
      } else {
        trees[c] = builder.build(g, h);
        const auto leaves = builder.node_of_row();
        for (std::size_t r = 0; r < n; ++r) scores[r * kNumClasses + c] += trees[c].nodes[leaves[r]].value;
      }
    }
    model.rounds.push_back(std::move(trees));
  }
  return model;
}

nlohmann::json tree_to_json(const RegressionTree& t) {
  nlohmann::json feature = nlohmann::json::array();
  nlohmann::json threshold = nlohmann::json::array();
  nlohmann::json left = nlohmann::json::array();
  nlohmann::json right = nlohmann::json::array();
  nlohmann::json value = nlohmann::json::array();
  for (const auto& nd : t.nodes) {
    feature.push_back(nd.feature);
    threshold.push_back(nd.threshold);
    left.push_back(nd.left);
    right.push_back(nd.right);
    value.push_back(nd.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

RegressionTree tree_from_json(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0) {
    throw FormatError("model: tree arrays have inconsistent lengths");
  }
  RegressionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
  return t;
}

}  // namespace

void TrainingDataset::validate() const {
  if (n_antennas < 2) throw FormatError("dataset: n_antennas must be >= 2");
  if (rows.empty()) throw FormatError("dataset: no rows");
  const std::size_t flen = feature_length(static_cast<std::size_t>(n_antennas));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.features.size() != flen) {
      throw FormatError("dataset row " + std::to_string(i) + ": expected " + std::to_string(flen) +
                        " features, got " + std::to_string(row.features.size()));
    }
    for (double v : row.features) {
      if (!std::isfinite(v)) throw FormatError("dataset row " + std::to_string(i) + ": non-finite feature");
    }
    if (row.labels.size() != static_cast<std::size_t>(n_antennas)) {
      throw FormatError("dataset row " + std::to_string(i) + ": label count does not match n_antennas");
    }
    for (auto l : row.labels) {
      if (l > 3) throw FormatError("dataset row " + std::to_string(i) + ": label outside {0..3}");
    }
    if (row.labels[0] != 0) throw FormatError("dataset row " + std::to_string(i) + ": labels not canonical");
  }
}

std::string TrainingDataset::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001b3ULL;
    }
  };
  mix(&n_antennas, sizeof n_antennas);
  for (const auto& row : rows) {
    mix(row.features.data(), row.features.size() * sizeof(double));
    mix(row.labels.data(), row.labels.size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void TrainingConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("TrainingConfig: rounds must be >= 1");
  if (max_depth < 1) throw InvalidArgument("TrainingConfig: max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("TrainingConfig: learning_rate must lie in (0, 1]");
  }
  if (min_leaf < 1) throw InvalidArgument("TrainingConfig: min_leaf must be >= 1");
}

double RegressionTree::evaluate(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& nd = nodes[i];
    i = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [node, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[node].is_leaf()) {
      stack.emplace_back(nodes[node].left, d + 1);
      stack.emplace_back(nodes[node].right, d + 1);
    }
  }
  return deepest;
}

std::array<double, kNumClasses> AntennaClassifier::scores(std::span<const double> x) const {
  std::array<double, kNumClasses> s{};
  for (const auto& round : rounds)
    for (int c = 0; c < kNumClasses; ++c) s[c] += round[c].evaluate(x);
  return s;
}

std::uint8_t AntennaClassifier::predict(std::span<const double> x) const {
  const auto s = scores(x);
  std::uint8_t best = 0;
  for (std::uint8_t c = 1; c < kNumClasses; ++c)
    if (s[c] > s[best]) best = c;
  return best;
}

GbdtModel::GbdtModel(int n_antennas, std::size_t feature_length, double learning_rate,
                     std::vector<AntennaClassifier> classifiers, TrainingMetadata metadata)
    : n_antennas_(n_antennas),
      feature_length_(feature_length),
      learning_rate_(learning_rate),
      classifiers_(std::move(classifiers)),
      metadata_(std::move(metadata)) {
  validate();
}

std::size_t GbdtModel::tree_count() const {
  std::size_t count = 0;
  for (const auto& c : classifiers_) count += c.rounds.size() * kNumClasses;
  return count;
}

void GbdtModel::validate() const {
  if (n_antennas_ < 2) throw FormatError("model: n_antennas must be >= 2");
  if (feature_length_ != qpskbf::feature_length(static_cast<std::size_t>(n_antennas_))) {
    throw FormatError("model: feature_length " + std::to_string(feature_length_) +
                      " inconsistent with n_antennas " + std::to_string(n_antennas_));
  }
  if (classifiers_.size() != static_cast<std::size_t>(n_antennas_)) {
    throw FormatError("model: expected one classifier per antenna");
  }
  for (const auto& clf : classifiers_) {
    for (const auto& round : clf.rounds) {
      for (const auto& tree : round) {
        if (tree.nodes.empty()) throw FormatError("model: empty tree");
        const int count = static_cast<int>(tree.nodes.size());
        for (const auto& nd : tree.nodes) {
          if (nd.is_leaf()) continue;
          if (nd.feature >= static_cast<int>(feature_length_)) throw FormatError("model: feature index out of range");
          if (nd.left <= 0 || nd.left >= count || nd.right <= 0 || nd.right >= count) {
            throw FormatError("model: child index out of range");
          }
        }
        if (tree.depth() > metadata_.config.max_depth) throw FormatError("model: tree deeper than max_depth");
      }
    }
  }
}

GbdtModel train_gbdt(const TrainingDataset& ds, const TrainingConfig& cfg, unsigned threads) {
  cfg.validate();
  if (ds.rows.empty()) throw InvalidArgument("train_gbdt: dataset is empty");
  ds.validate();

  const ColumnIndex idx = build_index(ds);
  const auto n = static_cast<std::size_t>(ds.n_antennas);
  std::vector<AntennaClassifier> classifiers(n);
  parallel_for(n, threads, [&](std::size_t antenna) {
    std::vector<std::uint8_t> labels(ds.rows.size());
    for (std::size_t r = 0; r < ds.rows.size(); ++r) labels[r] = ds.rows[r].labels[antenna];
    classifiers[antenna] = train_antenna(idx, labels, cfg);
  });

  TrainingMetadata meta;
  meta.config = cfg;
  meta.dataset_fingerprint = ds.fingerprint();
  meta.training_rows = ds.rows.size();
  if (ds.rows.size() == 1) meta.warnings.emplace_back("degenerate dataset: a single training row");
  return GbdtModel(ds.n_antennas, idx.features, cfg.learning_rate, std::move(classifiers), std::move(meta));
}

QpskWeights predict_weights(const GbdtModel& m, std::span<const double> features) {
  if (features.size() != m.feature_length()) {
    throw DimensionError("predict_weights: model expects " + std::to_string(m.feature_length()) +
                         " features (N = " + std::to_string(m.n_antennas()) + "), got " +
                         std::to_string(features.size()));
  }
  std::vector<std::uint8_t> symbols(static_cast<std::size_t>(m.n_antennas()));
  for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = m.classifiers()[i].predict(features);
  return QpskWeights(std::move(symbols));
}

std::vector<double> per_antenna_accuracy(const GbdtModel& m, std::span<const DatasetRow> rows) {
  const auto n = static_cast<std::size_t>(m.n_antennas());
  std::vector<double> hits(n, 0.0);
  if (rows.empty()) return hits;
  for (const auto& row : rows) {
    const QpskWeights pred = predict_weights(m, row.features);
    for (std::size_t i = 0; i < n; ++i)
      if (pred[i] == row.labels.at(i)) hits[i] += 1.0;
  }
  for (auto& h : hits) h /= static_cast<double>(rows.size());
  return hits;
}

void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = {{"rounds", c.rounds},
       {"max_depth", c.max_depth},
       {"learning_rate", c.learning_rate},
       {"min_leaf", c.min_leaf},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainingConfig& c) {
  if (j.contains("rounds")) c.rounds = j.at("rounds").get<int>();
  if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<int>();
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("min_leaf")) c.min_leaf = j.at("min_leaf").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
}

nlohmann::json model_to_json(const GbdtModel& m) {
  nlohmann::json classifiers = nlohmann::json::array();
  for (const auto& clf : m.classifiers()) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : clf.rounds) {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& tree : round) trees.push_back(tree_to_json(tree));
      rounds.push_back(std::move(trees));
    }
    classifiers.push_back({{"rounds", std::move(rounds)}});
  }
  const auto& meta = m.metadata();
  return {{"format", "qpskbf-gbdt"},
          {"version", GbdtModel::kFormatVersion},
          {"tool_version", kVersion},
          {"n_antennas", m.n_antennas()},
          {"feature_length", m.feature_length()},
          {"learning_rate", m.learning_rate()},
          {"hessian_regularizer", kHessianRegularizer},
          {"metadata",
           {{"seed", meta.config.seed},
            {"config", meta.config},
            {"dataset_fingerprint", meta.dataset_fingerprint},
            {"training_rows", meta.training_rows},
            {"warnings", meta.warnings}}},
          {"classifiers", std::move(classifiers)}};
}

GbdtModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "qpskbf-gbdt") throw FormatError("model: not a qpskbf-gbdt document");
    const int version = j.at("version").get<int>();
    if (version != GbdtModel::kFormatVersion) {
      throw FormatError("model: unsupported version " + std::to_string(version) + " (expected " +
                        std::to_string(GbdtModel::kFormatVersion) + ")");
    }
    const int n = j.at("n_antennas").get<int>();
    const auto flen = j.at("feature_length").get<std::size_t>();
    if (n < 2 || flen != feature_length(static_cast<std::size_t>(n))) {
      throw FormatError("model: feature_length " + std::to_string(flen) + " does not match N = " +
                        std::to_string(n));
    }
    TrainingMetadata meta;
    const auto& jm = j.at("metadata");
    meta.config = jm.at("config").get<TrainingConfig>();
    meta.dataset_fingerprint = jm.at("dataset_fingerprint").get<std::string>();
    meta.training_rows = jm.at("training_rows").get<std::size_t>();
    meta.warnings = jm.at("warnings").get<std::vector<std::string>>();

    std::vector<AntennaClassifier> classifiers;
    for (const auto& jc : j.at("classifiers")) {
      AntennaClassifier clf;
      for (const auto& jr : jc.at("rounds")) {
        if (!jr.is_array() || jr.size() != kNumClasses) throw FormatError("model: a round must hold 4 trees");
        std::array<RegressionTree, kNumClasses> round;
        for (int c = 0; c < kNumClasses; ++c) round[c] = tree_from_json(jr[c]);
        clf.rounds.push_back(std::move(round));
      }
      classifiers.push_back(std::move(clf));
    }
    return GbdtModel(n, flen, j.at("learning_rate").get<double>(), std::move(classifiers), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: malformed document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

void save_model(const GbdtModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_model: cannot open " + path.string());
  out << model_to_json(m).dump() << '\n';
  if (!out) throw Error("save_model: write failed for " + path.string());
}

GbdtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_model: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("load_model: parse error in " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace qpskbf
