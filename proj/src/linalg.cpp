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

#include "qpskbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "qpskbf/errors.hpp"

namespace qpskbf {
namespace {

constexpr double kHermitianTolerance = 1e-12;

bool is_finite(const cdouble& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_finite(std::span<const cdouble> values, const char* what) {
  for (const auto& z : values) {
    if (!is_finite(z)) throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

ComplexVector::ComplexVector(std::vector<cdouble> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidArgument("ComplexVector: length must be >= 1");
  require_finite(entries_, "ComplexVector");
}

double ComplexVector::norm() const {
  double s = 0.0;
  for (const auto& z : entries_) s += std::norm(z);
  return std::sqrt(s);
}

HermitianMatrix::HermitianMatrix(std::size_t order, std::vector<cdouble> m)
    : order_(order), entries_(std::move(m)) {
  if (order_ == 0) throw InvalidArgument("HermitianMatrix: order must be >= 1");
  if (entries_.size() != order_ * order_) {
    throw DimensionError("HermitianMatrix: expected " + std::to_string(order_ * order_) +
                         " entries, got " + std::to_string(entries_.size()));
  }
  require_finite(entries_, "HermitianMatrix");
  for (std::size_t i = 0; i < order_; ++i) {
    for (std::size_t j = i; j < order_; ++j) {
      const cdouble a = entries_[i * order_ + j];
      const cdouble b = std::conj(entries_[j * order_ + i]);
      if (std::abs(a - b) > kHermitianTolerance) {
        std::ostringstream msg;
        msg << "HermitianMatrix: entry (" << i << "," << j << ") differs from conj(("
            << j << "," << i << ")) by " << std::abs(a - b);
        throw InvalidArgument(msg.str());
      }
      const cdouble avg = 0.5 * (a + b);
      entries_[i * order_ + j] = avg;
      entries_[j * order_ + i] = std::conj(avg);
    }
    entries_[i * order_ + i] = cdouble(entries_[i * order_ + i].real(), 0.0);
  }
}

HermitianMatrix::HermitianMatrix(Trusted, std::size_t order, std::vector<cdouble> m)
    : order_(order), entries_(std::move(m)) {}

HermitianMatrix hermitian_from_trusted(std::size_t order, std::vector<cdouble> row_major) {
  return HermitianMatrix(HermitianMatrix::Trusted{}, order, std::move(row_major));
}

HermitianMatrix HermitianMatrix::identity(std::size_t order) {
  std::vector<cdouble> m(order * order);
  for (std::size_t i = 0; i < order; ++i) m[i * order + i] = 1.0;
  return HermitianMatrix(order, std::move(m));
}

HermitianMatrix HermitianMatrix::zeros(std::size_t order) {
  return HermitianMatrix(order, std::vector<cdouble>(order * order));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<cdouble> m(n * n);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = diag[i];
  return HermitianMatrix(n, std::move(m));
}

double HermitianMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < order_; ++i) t += entries_[i * order_ + i].real();
  return t;
}

cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.size() != b.size()) throw DimensionError("inner: length mismatch");
  cdouble s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

std::vector<cdouble> multiply(const HermitianMatrix& a, std::span<const cdouble> x) {
  const std::size_t n = a.order();
  if (x.size() != n) throw DimensionError("multiply: vector length does not match matrix order");
  std::vector<cdouble> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cdouble s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double quadratic_form(const HermitianMatrix& a, std::span<const cdouble> w) {
  if (w.size() != a.order()) {
    throw DimensionError("quadratic_form: vector length " + std::to_string(w.size()) +
                         " does not match matrix order " + std::to_string(a.order()));
  }
  require_finite(w, "quadratic_form");
  const cdouble q = inner(w, multiply(a, w));
  if (std::abs(q.imag()) > 1e-6 * (1.0 + std::abs(q.real()))) {
    throw InvalidArgument("quadratic_form: imaginary residue too large for a Hermitian form");
  }
  return q.real();
}

double quadratic_form(const HermitianMatrix& a, const ComplexVector& w) {
  return quadratic_form(a, w.entries());
}

ComplexVector loaded_solve(const HermitianMatrix& a, const ComplexVector& b, double epsilon) {
  const std::size_t n = a.order();
  if (b.size() != n) throw DimensionError("loaded_solve: rhs length does not match matrix order");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("loaded_solve: epsilon must be finite and >= 0");
  }

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i).real() + epsilon));
  const double pivot_floor = 1e-14 * max_diag;

  // Lower-triangular L with (A + eps I) = L L^H.
  std::vector<cdouble> l(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real() + epsilon;
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l[j * n + k]);
    if (!(d > pivot_floor)) {
      std::ostringstream msg;
      msg << "loaded_solve: matrix is numerically singular (pivot " << d << " at index " << j
          << ", epsilon " << epsilon << ")";
      throw SingularMatrixError(msg.str());
    }
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cdouble s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * std::conj(l[j * n + k]);
      l[i * n + j] = s / ljj;
    }
  }

  auto solve_factored = [&](std::span<const cdouble> rhs) {
    std::vector<cdouble> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      cdouble s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
      y[i] = s / l[i * n + i];
    }
    std::vector<cdouble> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
      cdouble s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l[k * n + ii]) * x[k];
      x[ii] = s / l[ii * n + ii];
    }
    return x;
  };

  auto residual = [&](std::span<const cdouble> x) {
    std::vector<cdouble> r = multiply(a, x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - (r[i] + epsilon * x[i]);
    return r;
  };
  auto norm2 = [](std::span<const cdouble> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
  };

  std::vector<cdouble> x = solve_factored(b.entries());
  // One step of iterative refinement.
  const std::vector<cdouble> r = residual(x);
  const std::vector<cdouble> dx = solve_factored(r);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];

  const double bnorm = b.norm();
  const double rnorm = norm2(residual(x));
  if (rnorm > 1e-8 * bnorm) {
    std::ostringstream msg;
    msg << "loaded_solve: residual " << rnorm << " exceeds 1e-8 * |b| (" << bnorm
        << "); matrix too ill-conditioned";
    throw SingularMatrixError(msg.str());
  }
  return ComplexVector(std::move(x));
}

std::vector<double> hermitian_eigenvalues(const HermitianMatrix& a) {
  const std::size_t n = a.order();
  const std::size_t m = 2 * n;
  std::vector<double> s(m * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cdouble z = a(i, j);
      s[i * m + j] = z.real();
      s[(i + n) * m + (j + n)] = z.real();
      s[i * m + (j + n)] = -z.imag();
      s[(i + n) * m + j] = z.imag();
    }
  }

  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) off += s[i * m + j] * s[i * m + j];
    return std::sqrt(off);
  };
  double total = 0.0;
  for (double v : s) total += v * v;
  const double scale = std::sqrt(total);

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiSweepBudget; ++sweep) {
    if (off_norm() <= 1e-14 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = s[p * m + q];
        if (apq == 0.0) continue;
        const double app = s[p * m + p];
        const double aqq = s[q * m + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = s[k * m + p];
          const double akq = s[k * m + q];
          s[k * m + p] = c * akp - sn * akq;
          s[k * m + q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = s[p * m + k];
          const double aqk = s[q * m + k];
          s[p * m + k] = c * apk - sn * aqk;
          s[q * m + k] = sn * apk + c * aqk;
        }
        s[p * m + q] = 0.0;
        s[q * m + p] = 0.0;
      }
    }
  }
  if (!converged && off_norm() > 1e-14 * scale) {
    std::ostringstream msg;
    msg << "hermitian_eigenvalues: no convergence after " << kJacobiSweepBudget
        << " sweeps, residual off-diagonal norm " << off_norm();
    throw ConvergenceError(msg.str());
  }

  std::vector<double> doubled(m);
  for (std::size_t i = 0; i < m; ++i) doubled[i] = s[i * m + i];
  std::sort(doubled.begin(), doubled.end(), std::greater<>());
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
  return eig;
}

}  // namespace qpskbf
