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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qpskbf {

using cdouble = std::complex<double>;

/// Immutable, non-empty vector of finite complex numbers.
class ComplexVector {
 public:
  explicit ComplexVector(std::vector<cdouble> entries);

  std::size_t size() const { return entries_.size(); }
  const cdouble& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const cdouble> entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  double norm() const;

 private:
  std::vector<cdouble> entries_;
};

/// Immutable N x N Hermitian matrix stored row-major.
///
/// Construction rejects inputs whose asymmetry |M(i,j) - conj(M(j,i))| exceeds
/// 1e-12, then stores (M + M^H) / 2 so the stored matrix is exactly Hermitian
/// with a purely real diagonal.
class HermitianMatrix {
 public:
  HermitianMatrix(std::size_t order, std::vector<cdouble> row_major);

  static HermitianMatrix identity(std::size_t order);
  static HermitianMatrix zeros(std::size_t order);
  static HermitianMatrix diagonal(std::span<const double> diag);

  std::size_t order() const { return order_; }
  const cdouble& operator()(std::size_t i, std::size_t j) const {
    return entries_[i * order_ + j];
  }
  std::span<const cdouble> row_major() const { return entries_; }
  double trace() const;

 private:
  struct Trusted {};
  HermitianMatrix(Trusted, std::size_t order, std::vector<cdouble> row_major);
  friend HermitianMatrix hermitian_from_trusted(std::size_t, std::vector<cdouble>);

  std::size_t order_;
  std::vector<cdouble> entries_;
};

// Wraps storage that is Hermitian by construction (mirrored upper triangle).
HermitianMatrix hermitian_from_trusted(std::size_t order, std::vector<cdouble> row_major);

/// a^H b
cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b);

/// A x
std::vector<cdouble> multiply(const HermitianMatrix& a, std::span<const cdouble> x);

/// Re(w^H A w). Throws DimensionError on size mismatch and InvalidArgument
/// when the discarded imaginary residue is not round-off.
double quadratic_form(const HermitianMatrix& a, const ComplexVector& w);
double quadratic_form(const HermitianMatrix& a, std::span<const cdouble> w);

/// Solves (A + epsilon I) x = b by Cholesky factorization.
///
/// Throws SingularMatrixError when A + epsilon I is not numerically positive
/// definite; never returns a garbage vector.
ComplexVector loaded_solve(const HermitianMatrix& a, const ComplexVector& b, double epsilon);

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// Cyclic Jacobi on the real 2N x 2N embedding [[Re, -Im], [Im, Re]], whose
/// spectrum is that of A with every eigenvalue doubled. At most 100 sweeps;
/// throws ConvergenceError naming the residual off-diagonal norm otherwise.
std::vector<double> hermitian_eigenvalues(const HermitianMatrix& a);

inline constexpr int kJacobiSweepBudget = 100;

}  // namespace qpskbf
