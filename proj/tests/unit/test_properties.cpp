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

#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "qpskbf/bench.hpp"
#include "support.hpp"

using namespace qpskbf;
using namespace qpskbf::testing;

TEST_SUITE("properties") {
  TEST_CASE("quadratic_form matches the explicit double loop") {
    Rng rng(201);
    for (int t = 0; t < 300; ++t) {
      const std::size_t n = 1 + static_cast<std::size_t>(t % 16);
      const auto a = random_psd(n, rng);
      const auto w = random_vector(n, rng);
      cdouble ref = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ref += std::conj(w[i]) * a(i, j) * w[j];
      CHECK(std::abs(quadratic_form(a, w) - ref.real()) <= 1e-10 * std::max(1.0, std::abs(ref.real())));
      CHECK(quadratic_form(a, w) >= -1e-10 * a.trace());
    }
  }

  TEST_CASE("loaded_solve residuals") {
    Rng rng(202);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 1 + static_cast<std::size_t>(t % 12);
      const auto a = random_psd(n, rng, n + 1);
      const auto b = random_vector(n, rng);
      const double eps = 1e-6 * a.trace() / static_cast<double>(n);
      const auto x = loaded_solve(a, b, eps);
      const auto ax = multiply(a, x.entries());
      double res = 0.0;
      double bn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        res += std::norm(ax[i] + eps * x[i] - b[i]);
        bn += std::norm(b[i]);
      }
      double xn = 0.0;
      for (std::size_t i = 0; i < n; ++i) xn += std::norm(x[i]);
      const double scale = a.trace() + eps;
      CHECK(std::sqrt(res) <= 1e-9 * (std::sqrt(bn) + scale * std::sqrt(xn)));
    }
  }

  TEST_CASE("steering vectors have unit-modulus entries") {
    Rng rng(203);
    for (int t = 0; t < 1000; ++t) {
      const int n = 2 + t % 15;
      const Direction d(rng.uniform(0.0, 360.0), rng.uniform(0.0, 90.0));
      const auto a = steering_vector(uca_geometry(n), d);
      for (const auto& v : a) CHECK(std::abs(std::abs(v) - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("sample covariances are positive semidefinite") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      ScenarioDistribution d;
      d.snapshots = 10 + static_cast<int>(seed % 7) * 20;
      d.n_jammers = 1 + static_cast<int>(seed % 3);
      const int n = 2 + static_cast<int>(seed % 9);
      const auto inst = simulated_instance(n, seed, d);
      const auto ev = hermitian_eigenvalues(inst.r);
      CHECK(ev.back() >= -1e-9 * inst.r.trace());
      for (std::size_t i = 0; i + 1 < ev.size(); ++i) CHECK(ev[i] >= ev[i + 1]);
    }
  }

  TEST_CASE("objective is invariant under global quarter-turn rotation") {
    Rng rng(204);
    const ObjectiveParams p;
    for (int t = 0; t < 200; ++t) {
      const int n = 2 + t % 12;
      const auto inst = simulated_instance(n, 300 + static_cast<std::uint64_t>(t));
      const auto s = random_symbols(static_cast<std::size_t>(n), rng);
      const double base = objective(s, inst.r, inst.a_g, p);
      for (int k = 1; k < 4; ++k)
        CHECK(std::abs(objective(s.rotated(k), inst.r, inst.a_g, p) - base) <= 1e-12 * (1.0 + std::abs(base)));
      CHECK(std::abs(objective(s.canonical(), inst.r, inst.a_g, p) - base) <= 1e-12 * (1.0 + std::abs(base)));
    }
  }

  TEST_CASE("oracle dominates every other discrete method") {
    const SolverSettings settings;
    int count = 0;
    for (int n : {2, 3, 4, 8}) {
      const int instances = n == 8 ? 50 : 60;
      for (int t = 0; t < instances; ++t, ++count) {
        const auto seed = static_cast<std::uint64_t>(1000 * n + t);
        const auto inst = simulated_instance(n, seed);
        const auto& p = settings.params;
        const auto best = oracle_search(inst.r, inst.a_g, p);
        CHECK(best.is_canonical());
        const double v = objective(best, inst.r, inst.a_g, p);
        const double slack = objective_slack(v);
        const auto naive = naive_quantize(capon_weights(inst.r, inst.a_g, p));
        const auto greedy = greedy_sample(inst.r, inst.a_g, p, 100, seed);
        const auto cd = coordinate_descent(naive, inst.r, inst.a_g, p, 100);
        for (const auto& s : {naive, greedy, cd}) CHECK(objective(s, inst.r, inst.a_g, p) <= v + slack);
        CHECK(objective(cd, inst.r, inst.a_g, p) >= objective(naive, inst.r, inst.a_g, p));
      }
    }
    CHECK(count >= 200);
  }

  TEST_CASE("canonical search covers the full space for N <= 4") {
    const ObjectiveParams p;
    for (int n : {2, 3, 4}) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto inst = simulated_instance(n, 500 + seed);
        const auto bf = brute_force(inst.r, inst.a_g, p.alpha);
        const auto s = oracle_search(inst.r, inst.a_g, p);
        CHECK(objective(s, inst.r, inst.a_g, p) >= bf.best - objective_slack(bf.best));
        CHECK(QpskWeights(bf.symbols).canonical().is_canonical());
      }
    }
  }

  TEST_CASE("coordinate descent converges in a few sweeps at N = 8") {
    const ObjectiveParams p;
    std::map<int, int> histogram;
    Rng rng(205);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto inst = simulated_instance(8, 2000 + seed);
      DescentStats st;
      const auto start = random_symbols(8, rng);
      const auto out = coordinate_descent(start, inst.r, inst.a_g, p, 100, &st);
      CHECK(st.converged);
      CHECK(st.sweeps <= 20);
      ++histogram[st.sweeps];
      for (std::size_t i = 1; i < st.trajectory.size(); ++i) CHECK(st.trajectory[i] > st.trajectory[i - 1]);
      CHECK(coordinate_descent(out, inst.r, inst.a_g, p, 100) == out);
    }
    std::string line;
    for (const auto& [sweeps, c] : histogram) line += std::to_string(sweeps) + ":" + std::to_string(c) + " ";
    MESSAGE("sweeps histogram " << line);
  }

  TEST_CASE("Capon weights are distortionless") {
    const ObjectiveParams p;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const int n = 2 + static_cast<int>(seed % 15);
      const auto inst = simulated_instance(n, 3000 + seed);
      const auto w = capon_weights(inst.r, inst.a_g, p);
      CHECK(std::abs(inner(w.entries(), inst.a_g.entries()) - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("normalized gains never exceed 0 dB") {
    const PatternGrid grid(uca_geometry(6), {});
    Rng rng(206);
    for (int t = 0; t < 50; ++t) {
      const auto w = random_vector(6, rng);
      const Direction d(rng.uniform(0.0, 360.0), rng.uniform(0.0, 90.0));
      const double g = grid.gain_db(w.entries(), d);
      CHECK(g <= 0.0);
      CHECK(g >= -400.0);
    }
  }
}
