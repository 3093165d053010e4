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

#include <cstdint>
#include <filesystem>
#include <span>

#include "qpskbf/array_model.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/gbdt.hpp"

namespace qpskbf {

/// Oracle-labeled training data. Row i uses scenario seed derive_seed(seed, i)
/// and scenario_id i, so the dataset is independent of `threads`.
TrainingDataset generate_dataset(const ScenarioDistribution& dist, int count, const ArrayGeometry& geom,
                                 const ObjectiveParams& p, std::uint64_t seed, unsigned threads = 0);

/// One dataset row for a single problem instance.
DatasetRow label_instance(const HermitianMatrix& r, const ComplexVector& a_g, const ObjectiveParams& p,
                          std::uint64_t scenario_id);

inline constexpr int kDefaultRefineSweeps = 3;

struct RefineResult {
  QpskWeights raw;
  QpskWeights refined;
  DescentStats descent;
};

/// extract_features -> predict_weights -> coordinate_descent(max_sweeps).
RefineResult gbdt_refine_detailed(const GbdtModel& m, const HermitianMatrix& r, const ComplexVector& a_g,
                                  const ObjectiveParams& p, int max_sweeps = kDefaultRefineSweeps);

inline QpskWeights gbdt_refine(const GbdtModel& m, const HermitianMatrix& r, const ComplexVector& a_g,
                               const ObjectiveParams& p, int max_sweeps = kDefaultRefineSweeps) {
  return gbdt_refine_detailed(m, r, a_g, p, max_sweeps).refined;
}

/// JSON-lines: {"features": [...], "labels": [...], "scenario_id": ...} per line.
void write_dataset(const TrainingDataset& ds, const std::filesystem::path& path);
/// Infers N from the first row's label count. Throws FormatError on bad lines.
TrainingDataset read_dataset(const std::filesystem::path& path);

/// Per antenna, label counts over all rows: counts[i][class].
std::vector<std::array<std::size_t, 4>> label_histogram(const TrainingDataset& ds);

/// P[X >= successes] for X ~ Binomial(trials, p).
double binomial_upper_tail(std::size_t successes, std::size_t trials, double p);

}  // namespace qpskbf
