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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qpskbf/array_model.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/gbdt.hpp"

namespace qpskbf {

enum class MethodId { capon, naive, oracle, greedy, coord_descent, gbdt_refine };

inline constexpr std::array<MethodId, 6> kAllMethods{MethodId::capon,  MethodId::naive,
                                                     MethodId::oracle, MethodId::greedy,
                                                     MethodId::coord_descent, MethodId::gbdt_refine};

std::string_view method_name(MethodId m);
/// Row label used in the printed table.
std::string_view method_label(MethodId m);
/// Throws InvalidArgument on an unknown name.
MethodId parse_method(std::string_view name);

/// Azimuth 0..360-step, elevation 0..90 inclusive, both in `step_deg` steps.
struct GridSpec {
  double step_deg = 2.0;

  void validate() const;
  int azimuth_count() const;
  int elevation_count() const;
};

/// Steering vectors for every grid direction, precomputed once per geometry.
class PatternGrid {
 public:
  PatternGrid(const ArrayGeometry& geom, const GridSpec& spec);

  std::size_t size() const { return directions_.size(); }
  const std::vector<Direction>& directions() const { return directions_; }
  const ArrayGeometry& geometry() const { return geom_; }

  /// |w^H a(point)|^2 for every grid point, el-major then az.
  std::vector<double> powers(std::span<const cdouble> w) const;
  double peak_power(std::span<const cdouble> w) const;

  /// 10 log10(|w^H a(dir)|^2 / peak), peak taken over the grid and `dir`
  /// itself, so the result is always <= 0. Floored at -400 dB.
  double gain_db(std::span<const cdouble> w, const Direction& dir) const;

 private:
  ArrayGeometry geom_;
  std::vector<Direction> directions_;
  std::vector<cdouble> steering_;  // point-major, N per point
};

double beampattern_gain_db(std::span<const cdouble> w, const ArrayGeometry& geom, const Direction& dir,
                           const GridSpec& grid = {});

/// CSV with header az_deg,el_deg,gain_db, one row per grid point (el-major).
/// Returns the number of data rows.
std::size_t export_beampattern_grid(std::span<const cdouble> w, const ArrayGeometry& geom, const GridSpec& grid,
                                    const std::filesystem::path& path);

struct SolverSettings {
  ObjectiveParams params;
  int greedy_samples = kDefaultGreedySamples;
  int cd_max_sweeps = 100;
  int refine_sweeps = 3;

  void validate() const;
};

struct MethodRecord {
  MethodId method = MethodId::capon;
  double sat_gain_db = 0.0;
  double intf_gain_db = 0.0;  // worst (largest) over jammers
  double objective = 0.0;     // Capon: objective of w / |w|
  std::int64_t latency_ns = 1;
  std::optional<QpskWeights> symbols;  // empty for Capon
  std::vector<cdouble> weights;
  double constraint_error = 0.0;  // |w^H a_g - 1|, Capon only
};

struct TrialResult {
  std::uint64_t scenario_id = 0;
  Scenario scenario;
  std::vector<MethodRecord> records;
  std::optional<QpskWeights> gbdt_raw;
  std::optional<double> gbdt_raw_objective;

  const MethodRecord* find(MethodId m) const;
};

/// Solve-side weights for one method plus its wall-clock solve time.
struct MethodSolution {
  std::vector<cdouble> weights;
  std::optional<QpskWeights> symbols;
  std::optional<QpskWeights> gbdt_raw;
  std::int64_t latency_ns = 1;
};

/// Runs one method on (R, a_g). Naive and coordinate descent include the
/// Capon solve they start from; gbdt_refine includes feature extraction.
MethodSolution solve_method(MethodId method, const HermitianMatrix& r, const ComplexVector& a_g,
                            const SolverSettings& settings, const GbdtModel* model, std::uint64_t greedy_seed);

/// One snapshot synthesis and covariance shared by all methods; only the solve is timed.
/// Throws before any timing when gbdt_refine is requested without a matching model.
TrialResult run_trial(const PatternGrid& grid, const Scenario& sc, std::span<const MethodId> methods,
                      const SolverSettings& settings, const GbdtModel* model, std::uint64_t greedy_seed,
                      std::uint64_t scenario_id = 0);

struct BenchConfig {
  int n_elements = 8;
  int trials = 100;
  ScenarioDistribution distribution;
  std::vector<MethodId> methods{MethodId::capon, MethodId::naive, MethodId::oracle, MethodId::greedy,
                                MethodId::coord_descent};
  SolverSettings solver;
  GridSpec grid;
  std::string model_path;
  std::uint64_t master_seed = 1;
  // Placement knobs, left out of the echoed config so summaries compare across runs.
  unsigned threads = 0;  // 0 = all cores
  std::string out_dir;

  void validate() const;
};

struct Quantiles {
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

struct MethodSummary {
  MethodId method = MethodId::capon;
  double mean_sat_gain_db = 0.0;
  double mean_intf_gain_db = 0.0;
  double mean_objective = 0.0;
  double mean_latency_ms = 0.0;
  Quantiles sat_gain_db;
  Quantiles intf_gain_db;
  Quantiles latency_ms;
};

struct BenchmarkSummary {
  BenchConfig config;
  std::size_t trial_count = 0;
  std::vector<MethodSummary> methods;

  const MethodSummary* find(MethodId m) const;
};

/// Per-trial seed: derive_seed(master_seed, trial index). Results do not
/// depend on thread count or execution order.
BenchmarkSummary summarize(const BenchConfig& cfg, std::span<const TrialResult> trials);
BenchmarkSummary run_benchmark(const BenchConfig& cfg, std::vector<TrialResult>* trials_out = nullptr,
                               const GbdtModel* model = nullptr);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

nlohmann::json summary_to_json(const BenchmarkSummary& s);
std::string format_table(const BenchmarkSummary& s);
void write_trials_csv(std::span<const TrialResult> trials, const std::filesystem::path& path);

void to_json(nlohmann::json& j, const BenchConfig& c);
// Keys absent from `j` keep their current values.
void from_json(const nlohmann::json& j, BenchConfig& c);
void to_json(nlohmann::json& j, const SolverSettings& s);
void from_json(const nlohmann::json& j, SolverSettings& s);

}  // namespace qpskbf
