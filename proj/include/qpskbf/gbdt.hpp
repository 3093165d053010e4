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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/features.hpp"

namespace qpskbf {

inline constexpr int kNumClasses = 4;

/// One labeled row: features of (R, a_g) and the canonical oracle symbols.
struct DatasetRow {
  FeatureVector features;
  std::vector<std::uint8_t> labels;
  std::uint64_t scenario_id = 0;

  bool operator==(const DatasetRow&) const = default;
};

struct TrainingDataset {
  int n_antennas = 0;
  std::vector<DatasetRow> rows;

  /// Throws FormatError unless every row has N^2 + 5N finite features and N
  /// labels in {0..3} with labels[0] == 0.
  void validate() const;
  /// FNV-1a over feature bit patterns and labels, 16 hex digits.
  std::string fingerprint() const;
};

struct TrainingConfig {
  int rounds = 150;
  int max_depth = 5;
  double learning_rate = 0.1;
  int min_leaf = 5;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

/// Leaf L2 regularizer added to the hessian sum.
inline constexpr double kHessianRegularizer = 1.0;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x[feature] < threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf score, learning rate already applied

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> x) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

/// Four-class softmax booster for one antenna: rounds x (one tree per class).
struct AntennaClassifier {
  std::vector<std::array<RegressionTree, kNumClasses>> rounds;

  std::array<double, kNumClasses> scores(std::span<const double> x) const;
  /// argmax of scores; ties go to the lowest class.
  std::uint8_t predict(std::span<const double> x) const;
  bool operator==(const AntennaClassifier&) const = default;
};

struct TrainingMetadata {
  TrainingConfig config;
  std::string dataset_fingerprint;
  std::size_t training_rows = 0;
  std::vector<std::string> warnings;

  bool operator==(const TrainingMetadata&) const = default;
};

class GbdtModel {
 public:
  static constexpr int kFormatVersion = 1;

  GbdtModel() = default;
  GbdtModel(int n_antennas, std::size_t feature_length, double learning_rate,
            std::vector<AntennaClassifier> classifiers, TrainingMetadata metadata);

  int n_antennas() const { return n_antennas_; }
  std::size_t feature_length() const { return feature_length_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<AntennaClassifier>& classifiers() const { return classifiers_; }
  const TrainingMetadata& metadata() const { return metadata_; }
  /// Total number of regression trees across all antennas.
  std::size_t tree_count() const;

  /// Throws FormatError on any structural inconsistency.
  void validate() const;

  bool operator==(const GbdtModel&) const = default;

 private:
  int n_antennas_ = 0;
  std::size_t feature_length_ = 0;
  double learning_rate_ = 0.1;
  std::vector<AntennaClassifier> classifiers_;
  TrainingMetadata metadata_;
};

/// N independent softmax boosters with exact greedy splits over sorted unique
/// feature values and Newton leaves -G / (H + 1), scaled by the learning rate.
/// Antennas train in parallel on up to `threads` workers (0 = all cores); the
/// result does not depend on the worker count.
GbdtModel train_gbdt(const TrainingDataset& ds, const TrainingConfig& cfg, unsigned threads = 0);

/// Per-antenna argmax. Throws DimensionError on a feature-length mismatch.
QpskWeights predict_weights(const GbdtModel& m, std::span<const double> features);

/// Fraction of rows whose label for each antenna is predicted exactly.
std::vector<double> per_antenna_accuracy(const GbdtModel& m, std::span<const DatasetRow> rows);

nlohmann::json model_to_json(const GbdtModel& m);
GbdtModel model_from_json(const nlohmann::json& j);
void save_model(const GbdtModel& m, const std::filesystem::path& path);
/// Throws FormatError on a malformed file, a version mismatch or an
/// inconsistent feature length.
GbdtModel load_model(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const TrainingConfig& c);
// Keys absent from `j` keep their current values.
void from_json(const nlohmann::json& j, TrainingConfig& c);

}  // namespace qpskbf
