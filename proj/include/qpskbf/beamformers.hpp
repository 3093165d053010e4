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
#include <span>
#include <vector>

#include "json.hpp"
#include "qpskbf/linalg.hpp"

namespace qpskbf {

/// QPSK dictionary indexed by symbol: 0 -> 1+j, 1 -> 1-j, 2 -> -1+j, 3 -> -1-j.
inline constexpr std::array<cdouble, 4> kQpskDictionary{
    cdouble(1.0, 1.0), cdouble(1.0, -1.0), cdouble(-1.0, 1.0), cdouble(-1.0, -1.0)};

/// Symbol reached by multiplying a symbol's dictionary value by j^k.
std::uint8_t rotate_symbol(std::uint8_t symbol, int quarter_turns);

/// Length-N list of QPSK symbol indices, N >= 2.
class QpskWeights {
 public:
  explicit QpskWeights(std::vector<std::uint8_t> symbols);

  std::size_t size() const { return symbols_.size(); }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const std::uint8_t> symbols() const { return symbols_; }

  bool is_canonical() const { return symbols_[0] == 0; }
  /// Same weights multiplied by j^k.
  QpskWeights rotated(int quarter_turns) const;
  /// Rotation with symbols[0] = 0; the objective is unchanged.
  QpskWeights canonical() const;

  bool operator==(const QpskWeights&) const = default;
  /// Lexicographic order equals base-4 integer order with symbols[0] most significant.
  auto operator<=>(const QpskWeights&) const = default;

 private:
  std::vector<std::uint8_t> symbols_;
};

struct ObjectiveParams {
  double alpha = 0.01;
  /// Diagonal loading for the Capon solve: eps = loading_scale * trace(R) / N.
  double loading_scale = 1e-6;

  void validate() const;
};

/// w = dict(s) / sqrt(2N), unit norm.
ComplexVector to_complex(const QpskWeights& s);

/// alpha |w^H a_g|^2 - (1 - alpha) w^H R w for w = to_complex(s); larger is better.
double objective(const QpskWeights& s, const HermitianMatrix& r, const ComplexVector& a_g,
                 const ObjectiveParams& p);
/// Same trade-off for an arbitrary complex weight vector.
double objective(std::span<const cdouble> w, const HermitianMatrix& r, const ComplexVector& a_g,
                 const ObjectiveParams& p);

/// Capon / MVDR weights (R + eps I)^-1 a_g / (a_g^H (R + eps I)^-1 a_g).
ComplexVector capon_weights(const HermitianMatrix& r, const ComplexVector& a_g,
                            const ObjectiveParams& p);

/// Per-entry sign quantization; zero real or imaginary parts map to +1.
QpskWeights naive_quantize(std::span<const cdouble> w);
inline QpskWeights naive_quantize(const ComplexVector& w) { return naive_quantize(w.entries()); }

inline constexpr int kOracleMaxElements = 14;

/// Exhaustive canonical search (symbols[0] = 0, 4^(N-1) candidates) walked in
/// base-4 reflected Gray order with O(N) incremental updates. Candidates that
/// land within round-off of the running best are re-scored exactly at the end,
/// and exact ties go to the smallest base-4 encoding.
///
/// Throws OracleTooLargeError for N > kOracleMaxElements.
QpskWeights oracle_search(const HermitianMatrix& r, const ComplexVector& a_g,
                          const ObjectiveParams& p);

/// Best of n_samples i.i.d. uniform draws from {0..3}^N (first drawn wins ties).
QpskWeights greedy_sample(const HermitianMatrix& r, const ComplexVector& a_g,
                          const ObjectiveParams& p, int n_samples, std::uint64_t seed);

inline constexpr int kDefaultGreedySamples = 100;
/// Minimum objective gain for a coordinate update to replace the incumbent.
inline constexpr double kStrictImprovement = 1e-12;

struct DescentStats {
  int sweeps = 0;
  bool converged = false;
  long evaluations = 0;
  // Objective of the start point, then after every accepted update.
  std::vector<double> trajectory;
};

/// Gauss-Seidel coordinate descent over the QPSK alphabet, index order 0..N-1.
/// Stops after a sweep with no change or after max_sweeps sweeps.
QpskWeights coordinate_descent(const QpskWeights& init, const HermitianMatrix& r,
                               const ComplexVector& a_g, const ObjectiveParams& p,
                               int max_sweeps, DescentStats* stats = nullptr);

/// Number of candidates in the full QPSK space, 4^N.
std::uint64_t qpsk_space_size(int n_elements);

void to_json(nlohmann::json& j, const ObjectiveParams& p);
// Keys absent from `j` keep their current values.
void from_json(const nlohmann::json& j, ObjectiveParams& p);

}  // namespace qpskbf

// QpskWeights has no default state, so it gets a full serializer: a JSON array of integers.
template <>
struct nlohmann::adl_serializer<qpskbf::QpskWeights> {
  static qpskbf::QpskWeights from_json(const json& j);
  static void to_json(json& j, const qpskbf::QpskWeights& s);
};
