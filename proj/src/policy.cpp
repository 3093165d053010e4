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

#include "qpskbf/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "qpskbf/errors.hpp"
#include "qpskbf/features.hpp"
#include "qpskbf/parallel.hpp"
#include "qpskbf/rng.hpp"

namespace qpskbf {

DatasetRow label_instance(const HermitianMatrix& r, const ComplexVector& a_g, const ObjectiveParams& p,
                          std::uint64_t scenario_id) {
  const QpskWeights best = oracle_search(r, a_g, p).canonical();
  DatasetRow row;
  row.features = extract_features(r, a_g);
  row.labels.assign(best.symbols().begin(), best.symbols().end());
  row.scenario_id = scenario_id;
  return row;
}

TrainingDataset generate_dataset(const ScenarioDistribution& dist, int count, const ArrayGeometry& geom,
                                 const ObjectiveParams& p, std::uint64_t seed, unsigned threads) {
  if (count < 1) throw InvalidArgument("generate_dataset: count must be >= 1");
  const int n = static_cast<int>(geom.size());
  if (n > kOracleMaxElements) {
    throw OracleTooLargeError("generate_dataset: oracle labels infeasible for N = " + std::to_string(n) +
                              " (4^(N-1) = " + std::to_string(qpsk_space_size(n - 1)) +
                              " candidates per row; limit N <= " + std::to_string(kOracleMaxElements) + ")");
  }
  dist.validate();
  p.validate();

  TrainingDataset ds;
  ds.n_antennas = n;
  ds.rows.resize(static_cast<std::size_t>(count));
  parallel_for(ds.rows.size(), threads, [&](std::size_t i) {
    const Scenario sc = random_scenario(dist, derive_seed(seed, i));
    const HermitianMatrix r = sample_covariance(synthesize_snapshots(geom, sc));
    const ComplexVector a_g = steering_vector(geom, sc.sat_dir);
    ds.rows[i] = label_instance(r, a_g, p, i);
  });
  return ds;
}

RefineResult gbdt_refine_detailed(const GbdtModel& m, const HermitianMatrix& r, const ComplexVector& a_g,
                                  const ObjectiveParams& p, int max_sweeps) {
  if (static_cast<std::size_t>(m.n_antennas()) != a_g.size()) {
    throw DimensionError("gbdt_refine: model trained for N = " + std::to_string(m.n_antennas()) +
                         ", instance has N = " + std::to_string(a_g.size()));
  }
  const FeatureVector f = extract_features(r, a_g);
  QpskWeights raw = predict_weights(m, f);
  DescentStats stats;
  QpskWeights refined = coordinate_descent(raw, r, a_g, p, max_sweeps, &stats);
  return {std::move(raw), std::move(refined), std::move(stats)};
}

void write_dataset(const TrainingDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_dataset: cannot open " + path.string());
  for (const auto& row : ds.rows) {
    nlohmann::json labels = nlohmann::json::array();
    for (auto l : row.labels) labels.push_back(static_cast<int>(l));
    const nlohmann::json j = {{"features", row.features}, {"labels", labels}, {"scenario_id", row.scenario_id}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write_dataset: write failed for " + path.string());
}

TrainingDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_dataset: cannot open " + path.string());
  TrainingDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DatasetRow row;
      row.features = j.at("features").get<std::vector<double>>();
      for (const auto& l : j.at("labels")) {
        const auto v = l.get<int>();
        if (v < 0 || v > 3) throw FormatError("label outside {0..3}");
        row.labels.push_back(static_cast<std::uint8_t>(v));
      }
      row.scenario_id = j.at("scenario_id").get<std::uint64_t>();
      ds.rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("read_dataset: " + path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("read_dataset: " + path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (ds.rows.empty()) throw FormatError("read_dataset: no rows in " + path.string());
  ds.n_antennas = static_cast<int>(ds.rows.front().labels.size());
  ds.validate();
  return ds;
}

std::vector<std::array<std::size_t, 4>> label_histogram(const TrainingDataset& ds) {
  std::vector<std::array<std::size_t, 4>> counts(static_cast<std::size_t>(ds.n_antennas), {0, 0, 0, 0});
  for (const auto& row : ds.rows)
    for (std::size_t i = 0; i < counts.size(); ++i) ++counts[i][row.labels[i]];
  return counts;
}

double binomial_upper_tail(std::size_t successes, std::size_t trials, double p) {
  if (successes == 0) return 1.0;
  if (successes > trials) return 0.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double nn = static_cast<double>(trials);
  double tail = 0.0;
  for (std::size_t k = successes; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    const double log_term =
        std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) + kk * log_p + (nn - kk) * log_q;
    tail += std::exp(log_term);
  }
  return std::min(tail, 1.0);
}

}  // namespace qpskbf
