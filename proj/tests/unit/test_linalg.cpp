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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "qpskbf/errors.hpp"
#include "qpskbf/linalg.hpp"
#include "support.hpp"

using namespace qpskbf;
using qpskbf::testing::random_psd;
using qpskbf::testing::random_vector;

namespace {

constexpr cdouble J{0.0, 1.0};

HermitianMatrix rank_one(const std::vector<cdouble>& x) {
  const std::size_t n = x.size();
  std::vector<cdouble> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = x[i] * std::conj(x[j]);
  return HermitianMatrix(n, std::move(m));
}

}  // namespace

TEST_SUITE("core-linalg") {
  TEST_CASE("ComplexVector rejects empty and non-finite input") {
    CHECK_THROWS_AS(ComplexVector({}), InvalidArgument);
    CHECK_THROWS_AS(ComplexVector({cdouble(std::nan(""), 0.0)}), InvalidArgument);
    CHECK_THROWS_AS(ComplexVector({cdouble(0.0, std::numeric_limits<double>::infinity())}), InvalidArgument);
    const ComplexVector v({3.0, 4.0 * J});
    CHECK(v.size() == 2);
    CHECK(v.norm() == doctest::Approx(5.0));
  }

  TEST_CASE("HermitianMatrix construction") {
    SUBCASE("shape errors") {
      CHECK_THROWS_AS(HermitianMatrix(0, {}), InvalidArgument);
      CHECK_THROWS_AS(HermitianMatrix(2, {1.0, 0.0, 0.0}), DimensionError);
    }
    SUBCASE("asymmetry beyond 1e-12 is refused") {
      CHECK_THROWS_AS(HermitianMatrix(2, {1.0, 1.0, 1.0 + 1e-9, 1.0}), InvalidArgument);
      CHECK_THROWS_AS(HermitianMatrix(2, {1.0, J, J, 1.0}), InvalidArgument);
    }
    SUBCASE("small asymmetry is symmetrized") {
      const HermitianMatrix m(2, {1.0, 2.0 + J, 2.0 - J + 4e-13, 3.0});
      CHECK(m(0, 1) == std::conj(m(1, 0)));
      CHECK(m(0, 1).real() == doctest::Approx(2.0 + 2e-13).epsilon(1e-15));
    }
    SUBCASE("diagonal imaginary part is forced to zero") {
      const HermitianMatrix m(2, {cdouble(1.0, 5e-13), 0.0, 0.0, cdouble(2.0, -5e-13)});
      CHECK(m(0, 0).imag() == 0.0);
      CHECK(m(1, 1).imag() == 0.0);
      CHECK_THROWS_AS(HermitianMatrix(1, {cdouble(1.0, 1e-9)}), InvalidArgument);
    }
    SUBCASE("non-finite entries") {
      CHECK_THROWS_AS(HermitianMatrix(1, {cdouble(std::nan(""), 0.0)}), InvalidArgument);
    }
    SUBCASE("factories") {
      CHECK(HermitianMatrix::identity(3).trace() == 3.0);
      CHECK(HermitianMatrix::zeros(2).trace() == 0.0);
      const std::vector<double> d{1.0, 3.0};
      const auto m = HermitianMatrix::diagonal(d);
      CHECK(m(1, 1) == cdouble(3.0));
      CHECK(m(0, 1) == cdouble(0.0));
    }
  }

  TEST_CASE("quadratic_form examples") {
    const auto i2 = HermitianMatrix::identity(2);
    CHECK(quadratic_form(i2, ComplexVector({1.0, 0.0})) == doctest::Approx(1.0));
    CHECK(quadratic_form(i2, ComplexVector({(1.0 + J) / 2.0, (1.0 - J) / 2.0})) == doctest::Approx(1.0));
    CHECK(quadratic_form(rank_one({1.0, J}), ComplexVector({1.0, 0.0})) == doctest::Approx(1.0));
  }

  TEST_CASE("quadratic_form errors") {
    CHECK_THROWS_AS(quadratic_form(HermitianMatrix::identity(2), ComplexVector({1.0, 0.0, 0.0})), DimensionError);
    const std::vector<cdouble> bad{std::nan(""), 0.0};
    CHECK_THROWS_AS(quadratic_form(HermitianMatrix::identity(2), bad), InvalidArgument);
  }

  TEST_CASE("quadratic_form of PSD input is bounded below") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const auto r = random_psd(6, rng);
      CHECK(quadratic_form(r, random_vector(6, rng)) >= -1e-9 * r.trace());
    }
  }

  TEST_CASE("loaded_solve examples") {
    const auto x1 = loaded_solve(HermitianMatrix::identity(2), ComplexVector({2.0, 0.0}), 0.0);
    CHECK(std::abs(x1[0] - 2.0) < 1e-15);
    CHECK(std::abs(x1[1]) < 1e-15);
    const auto x2 = loaded_solve(HermitianMatrix::zeros(2), ComplexVector({1.0, 1.0}), 1.0);
    CHECK(std::abs(x2[0] - 1.0) < 1e-15);
    CHECK(std::abs(x2[1] - 1.0) < 1e-15);
    const std::vector<double> d{1.0, 3.0};
    const auto x3 = loaded_solve(HermitianMatrix::diagonal(d), ComplexVector({1.0, 3.0}), 1.0);
    CHECK(std::abs(x3[0] - 0.5) < 1e-15);
    CHECK(std::abs(x3[1] - 0.75) < 1e-15);
  }

  TEST_CASE("loaded_solve errors") {
    CHECK_THROWS_AS(loaded_solve(HermitianMatrix::zeros(2), ComplexVector({1.0, 1.0}), 0.0), SingularMatrixError);
    CHECK_THROWS_AS(loaded_solve(rank_one({1.0, J}), ComplexVector({1.0, 0.0}), 0.0), SingularMatrixError);
    CHECK_THROWS_AS(loaded_solve(HermitianMatrix::identity(2), ComplexVector({1.0}), 0.0), DimensionError);
    CHECK_THROWS_AS(loaded_solve(HermitianMatrix::identity(2), ComplexVector({1.0, 0.0}), -1.0), InvalidArgument);
    const std::vector<double> indefinite{1.0, -2.0};
    CHECK_THROWS_AS(loaded_solve(HermitianMatrix::diagonal(indefinite), ComplexVector({1.0, 1.0}), 0.0),
                    SingularMatrixError);
  }

  TEST_CASE("hermitian_eigenvalues examples") {
    const auto e1 = hermitian_eigenvalues(HermitianMatrix::identity(3));
    REQUIRE(e1.size() == 3);
    for (double v : e1) CHECK(v == doctest::Approx(1.0));
    const auto e2 = hermitian_eigenvalues(rank_one({1.0, J}));
    CHECK(e2[0] == doctest::Approx(2.0));
    CHECK(std::abs(e2[1]) < 1e-12);
    const auto e3 = hermitian_eigenvalues(HermitianMatrix(2, {2.0, 1.0, 1.0, 2.0}));
    CHECK(e3[0] == doctest::Approx(3.0));
    CHECK(e3[1] == doctest::Approx(1.0));
  }

  TEST_CASE("hermitian_eigenvalues are descending and sum to the trace") {
    Rng rng(9);
    for (std::size_t n : {1U, 2U, 5U, 16U}) {
      const auto r = random_psd(n, rng);
      const auto ev = hermitian_eigenvalues(r);
      REQUIRE(ev.size() == n);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += ev[i];
        if (i > 0) CHECK(ev[i - 1] >= ev[i]);
        CHECK(ev[i] >= -1e-9 * r.trace());
      }
      CHECK(std::abs(sum - r.trace()) <= 1e-8 * (1.0 + std::abs(r.trace())));
    }
  }

  TEST_CASE("hermitian_eigenvalues of the zero matrix") {
    for (double v : hermitian_eigenvalues(HermitianMatrix::zeros(4))) CHECK(v == 0.0);
  }

  TEST_CASE("inner and multiply") {
    const std::vector<cdouble> a{J, 1.0};
    const std::vector<cdouble> b{1.0, 2.0};
    CHECK(inner(a, b) == cdouble(2.0, -1.0));
    const auto y = multiply(HermitianMatrix(2, {2.0, J, -J, 1.0}), b);
    CHECK(y[0] == cdouble(2.0, 2.0));
    CHECK(y[1] == cdouble(2.0, -1.0));
    CHECK_THROWS_AS(multiply(HermitianMatrix::identity(3), b), DimensionError);
  }
}
