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

#include "qpskbf/features.hpp"

#include <cmath>
#include <numbers>

#include "qpskbf/errors.hpp"

namespace qpskbf {

FeatureVector extract_features(const HermitianMatrix& r, const ComplexVector& a_g) {
  const std::size_t n = r.order();
  if (a_g.size() != n) throw DimensionError("extract_features: steering length does not match R");

  FeatureVector f;
  f.reserve(feature_length(n));
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      f.push_back(r(i, j).real());
      f.push_back(r(i, j).imag());
    }
  }
  for (std::size_t i = 0; i < n; ++i) f.push_back(r(i, i).real());
  for (double ev : hermitian_eigenvalues(r)) f.push_back(ev);
  for (const auto& a : a_g) {
    double phase = std::arg(a);
    // std::arg returns [-pi, pi]; fold -pi onto +pi.
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    f.push_back(a.real());
    f.push_back(a.imag());
    f.push_back(std::abs(a));
    f.push_back(phase);
  }
  return f;
}

}  // namespace qpskbf
