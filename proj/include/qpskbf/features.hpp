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

#include <cstddef>
#include <vector>

#include "qpskbf/linalg.hpp"

namespace qpskbf {

/// Fixed-layout real feature vector for an N-element array, length N^2 + 5N:
///   [0, N(N-1))        strictly-lower-triangular R(i,j), i > j, row-major; re then im
///   [N(N-1), N^2)      diag(R)
///   [N^2, N^2 + N)     eigenvalues of R, descending
///   [N^2 + N, +4N)     per element of a_g: re, im, |a|, arg(a) in (-pi, pi]
using FeatureVector = std::vector<double>;

constexpr std::size_t feature_length(std::size_t n) { return n * n + 5 * n; }

FeatureVector extract_features(const HermitianMatrix& r, const ComplexVector& a_g);

}  // namespace qpskbf
