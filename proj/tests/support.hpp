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

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "qpskbf/array_model.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/linalg.hpp"
#include "qpskbf/rng.hpp"

namespace qpskbf::testing {

inline cdouble complex_normal(Rng& rng) {
  double re = 0.0;
  double im = 0.0;
  rng.normal_pair(re, im);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

inline std::vector<cdouble> random_entries(std::size_t n, Rng& rng) {
  std::vector<cdouble> v(n);
  for (auto& x : v) x = complex_normal(rng);
  return v;
}

inline ComplexVector random_vector(std::size_t n, Rng& rng) { return ComplexVector(random_entries(n, rng)); }

inline ComplexVector random_unit_modulus(std::size_t n, Rng& rng) {
  std::vector<cdouble> v(n);
  for (auto& x : v) x = std::polar(1.0, rng.uniform(-M_PI, M_PI));
  return ComplexVector(std::move(v));
}

// (1/k) sum x x^H over k Gaussian draws plus a random diagonal spread, so the
// spectrum covers several decades.
inline HermitianMatrix random_psd(std::size_t n, Rng& rng, std::size_t k = 0) {
  if (k == 0) k = n + 2;
  std::vector<cdouble> m(n * n);
  for (std::size_t s = 0; s < k; ++s) {
    const double scale = std::pow(10.0, rng.uniform(-1.0, 3.0));
    const auto x = random_entries(n, rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] += scale * x[i] * std::conj(x[j]) / static_cast<double>(k);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) m[i * n + j] = std::conj(m[j * n + i]);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = m[i * n + i].real();
  return HermitianMatrix(n, std::move(m));
}

// Independent re-implementation of the objective by explicit double loops.
inline double naive_objective(std::span<const std::uint8_t> symbols, const HermitianMatrix& r,
                              const ComplexVector& a_g, double alpha) {
  const std::size_t n = symbols.size();
  const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  std::vector<cdouble> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t s = symbols[i];
    w[i] = cdouble((s & 2U) ? -1.0 : 1.0, (s & 1U) ? -1.0 : 1.0) * c;
  }
  cdouble gain = 0.0;
  for (std::size_t i = 0; i < n; ++i) gain += std::conj(w[i]) * a_g[i];
  cdouble power = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) power += std::conj(w[i]) * r(i, j) * w[j];
  return alpha * std::norm(gain) - (1.0 - alpha) * power.real();
}

struct BruteForce {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> symbols;
};

// Full 4^N enumeration, every candidate re-evaluated from scratch.
inline BruteForce brute_force(const HermitianMatrix& r, const ComplexVector& a_g, double alpha) {
  const std::size_t n = a_g.size();
  BruteForce out;
  std::vector<std::uint8_t> s(n);
  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      s[i] = static_cast<std::uint8_t>(c & 3U);
      c >>= 2;
    }
    const double v = naive_objective(s, r, a_g, alpha);
    if (v > out.best) {
      out.best = v;
      out.symbols = s;
    }
  }
  return out;
}

// One simulated instance: covariance from synthetic snapshots plus a_g.
struct Instance {
  Scenario scenario;
  HermitianMatrix r;
  ComplexVector a_g;
};

inline Instance simulated_instance(int n, std::uint64_t seed, const ScenarioDistribution& dist = {}) {
  const ArrayGeometry geom = uca_geometry(n);
  Scenario sc = random_scenario(dist, seed);
  HermitianMatrix r = sample_covariance(synthesize_snapshots(geom, sc));
  ComplexVector a_g = steering_vector(geom, sc.sat_dir);
  return {std::move(sc), std::move(r), std::move(a_g)};
}

inline QpskWeights random_symbols(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> s(n);
  for (auto& x : s) x = static_cast<std::uint8_t>(rng.quaternary());
  return QpskWeights(std::move(s));
}

// Round-off allowance for comparing two objective values of unit-norm weights.
inline double objective_slack(double value) { return 1e-12 * (1.0 + std::abs(value)); }

}  // namespace qpskbf::testing
