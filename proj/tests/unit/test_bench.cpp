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
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "qpskbf/bench.hpp"
#include "qpskbf/errors.hpp"
#include "qpskbf/policy.hpp"
#include "support.hpp"

using namespace qpskbf;
using namespace qpskbf::testing;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

double csv_gain(const std::string& line) { return std::stod(line.substr(line.rfind(',') + 1)); }

nlohmann::json strip_latency(nlohmann::json j) {
  for (auto& m : j["methods"]) {
    m.erase("mean_latency_ms");
    m.erase("latency_ms");
  }
  return j;
}

}  // namespace

TEST_SUITE("bench-harness") {
  TEST_CASE("method names") {
    for (MethodId m : kAllMethods) CHECK(parse_method(method_name(m)) == m);
    CHECK(method_label(MethodId::gbdt_refine) == "GBDT+Refine");
    CHECK_THROWS_AS(parse_method("simplex"), InvalidArgument);
  }

  TEST_CASE("grid arithmetic") {
    const GridSpec g{};
    CHECK(g.azimuth_count() == 180);
    CHECK(g.elevation_count() == 46);
    CHECK(GridSpec{1.0}.azimuth_count() == 360);
    CHECK(GridSpec{1.0}.elevation_count() == 91);
    CHECK_THROWS_AS(GridSpec{0.5}.validate(), InvalidArgument);
    CHECK_THROWS_AS(GridSpec{0.0}.validate(), InvalidArgument);
    CHECK(PatternGrid(uca_geometry(4), g).size() == 8280);
  }

  TEST_CASE("beampattern gain normalization") {
    const auto geom = uca_geometry(8);
    const PatternGrid grid(geom, {});
    Rng rng(3);
    const auto w = random_vector(8, rng);
    const auto powers = grid.powers(w.entries());
    const auto peak_at = std::max_element(powers.begin(), powers.end()) - powers.begin();
    CHECK(grid.gain_db(w.entries(), grid.directions()[peak_at]) == 0.0);
    for (const auto& d : {Direction(13.0, 7.0), Direction(271.0, 55.0)}) CHECK(grid.gain_db(w.entries(), d) <= 0.0);

    SUBCASE("matched filter peaks at its own on-grid direction") {
      const Direction sat(40.0, 50.0);
      const auto a = steering_vector(geom, sat);
      std::vector<cdouble> mf(a.begin(), a.end());
      for (auto& v : mf) v /= a.norm();
      CHECK(beampattern_gain_db(mf, geom, sat) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("a single active element has a flat pattern") {
      const std::vector<cdouble> single{cdouble(0.6, 0.8), 0.0};
      const auto p = PatternGrid(uca_geometry(2), {}).powers(single);
      for (double v : p) CHECK(v == doctest::Approx(1.0));
      CHECK(beampattern_gain_db(single, uca_geometry(2), Direction(77.0, 3.0)) == doctest::Approx(0.0));
    }
    SUBCASE("zero response is floored") {
      const std::vector<cdouble> zero(8, 0.0);
      CHECK(grid.gain_db(zero, Direction(0.0, 0.0)) == -400.0);
    }
  }

  TEST_CASE("export_beampattern_grid") {
    const auto path = std::filesystem::temp_directory_path() / "qpskbf_pattern.csv";
    const auto geom = uca_geometry(6);
    Rng rng(4);
    const auto w = random_vector(6, rng);
    CHECK(export_beampattern_grid(w.entries(), geom, {}, path) == 8280);
    const auto lines = read_lines(path);
    REQUIRE(lines.size() == 8281);
    CHECK(lines[0] == "az_deg,el_deg,gain_db");
    CHECK(lines[1].rfind("0,0,", 0) == 0);
    CHECK(lines[2].rfind("2,0,", 0) == 0);
    CHECK(lines[181].rfind("0,2,", 0) == 0);
    double mx = -1e9;
    for (std::size_t i = 1; i < lines.size(); ++i) mx = std::max(mx, csv_gain(lines[i]));
    CHECK(mx == 0.0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(export_beampattern_grid(w.entries(), geom, {}, "/nonexistent-dir/x.csv"), Error);
  }

  TEST_CASE("run_trial") {
    const auto geom = uca_geometry(8);
    const PatternGrid grid(geom, {});
    const Scenario sc = random_scenario({}, 31);
    const MethodId methods[] = {MethodId::capon, MethodId::naive, MethodId::oracle, MethodId::greedy,
                                MethodId::coord_descent};
    const auto t = run_trial(grid, sc, methods, {}, nullptr, 5, 7);
    CHECK(t.scenario_id == 7);
    REQUIRE(t.records.size() == 5);
    for (const auto& r : t.records) {
      CHECK(r.latency_ns > 0);
      CHECK(r.sat_gain_db <= 0.0);
      CHECK(r.intf_gain_db <= 0.0);
    }
    CHECK(t.find(MethodId::greedy)->objective <= t.find(MethodId::oracle)->objective);
    CHECK(t.find(MethodId::coord_descent)->objective >= t.find(MethodId::naive)->objective);
    CHECK(t.find(MethodId::capon)->constraint_error <= 1e-9);
    CHECK_FALSE(t.find(MethodId::capon)->symbols.has_value());
    CHECK(t.find(MethodId::gbdt_refine) == nullptr);

    SUBCASE("deterministic apart from latency") {
      const auto u = run_trial(grid, sc, methods, {}, nullptr, 5, 7);
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(u.records[i].objective == t.records[i].objective);
        CHECK(u.records[i].sat_gain_db == t.records[i].sat_gain_db);
        CHECK(u.records[i].symbols == t.records[i].symbols);
        CHECK(u.records[i].weights == t.records[i].weights);
      }
    }
    SUBCASE("gbdt_refine needs a model") {
      const MethodId ml[] = {MethodId::gbdt_refine};
      CHECK_THROWS_AS(run_trial(grid, sc, ml, {}, nullptr, 5), InvalidArgument);
    }
  }

  TEST_CASE("Capon keeps near-peak gain toward an on-grid satellite") {
    const auto geom = uca_geometry(8);
    const PatternGrid grid(geom, {});
    ScenarioDistribution d;
    d.snapshots = 4096;
    const MethodId capon[] = {MethodId::capon};
    int kept = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      Scenario sc = random_scenario(d, s);
      sc.sat_dir = Direction(2.0 * std::round(sc.sat_dir.azimuth_deg() / 2.0),
                             2.0 * std::round(sc.sat_dir.elevation_deg() / 2.0));
      const auto t = run_trial(grid, sc, capon, {}, nullptr, 0);
      const double sat = t.records[0].sat_gain_db;
      if (sat > -6.0) ++kept;
      if (angular_separation_deg(sc.sat_dir, sc.jammer_dirs.front()) >= 30.0) CHECK(sat > -6.0);
    }
    CHECK(kept >= 95);
  }

  TEST_CASE("quantile is type 7") {
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.1) == doctest::Approx(1.3));
    CHECK(quantile({5.0}, 0.9) == 5.0);
    CHECK(quantile({3.0, 1.0, 2.0}, 0.9) == doctest::Approx(2.8));
  }

  TEST_CASE("run_benchmark") {
    BenchConfig cfg;
    cfg.n_elements = 4;
    cfg.trials = 1;
    cfg.master_seed = 3;

    SUBCASE("one trial summarizes to itself") {
      std::vector<TrialResult> trials;
      const auto s = run_benchmark(cfg, &trials);
      REQUIRE(trials.size() == 1);
      CHECK(s.trial_count == 1);
      for (const auto& m : s.methods) {
        const auto* rec = trials[0].find(m.method);
        CHECK(m.mean_sat_gain_db == rec->sat_gain_db);
        CHECK(m.mean_intf_gain_db == rec->intf_gain_db);
        CHECK(m.sat_gain_db.p10 == rec->sat_gain_db);
        CHECK(m.intf_gain_db.p90 == rec->intf_gain_db);
      }
    }
    SUBCASE("thread count does not change the summary") {
      cfg.trials = 12;
      cfg.threads = 1;
      const auto a = summary_to_json(run_benchmark(cfg));
      cfg.threads = 4;
      const auto b = summary_to_json(run_benchmark(cfg));
      CHECK(strip_latency(a) == strip_latency(b));
      CHECK_FALSE(a["config"].contains("threads"));
    }
    SUBCASE("restricted methods") {
      cfg.trials = 3;
      cfg.methods = {MethodId::capon, MethodId::naive};
      const auto s = run_benchmark(cfg);
      REQUIRE(s.methods.size() == 2);
      const auto table = format_table(s);
      CHECK(table.find("Capon (continuous)") != std::string::npos);
      CHECK(table.find("QPSK-Quantized") != std::string::npos);
      CHECK(table.find("Oracle") == std::string::npos);
    }
    SUBCASE("gbdt_refine without a model fails before any trial") {
      cfg.methods = {MethodId::gbdt_refine};
      CHECK_THROWS_AS(run_benchmark(cfg), InvalidArgument);
    }
    SUBCASE("model for another N") {
      TrainingDataset ds = generate_dataset({}, 20, uca_geometry(3), {}, 1);
      const auto model = train_gbdt(ds, TrainingConfig{2, 2, 0.1, 1, 0});
      cfg.methods = {MethodId::gbdt_refine};
      CHECK_THROWS_AS(run_benchmark(cfg, nullptr, &model), DimensionError);
    }
    SUBCASE("trial failures name the trial and scenario") {
      cfg.distribution.sat_azimuth_deg = {0.0, 0.0};
      cfg.distribution.sat_elevation_deg = {20.0, 20.0};
      cfg.distribution.jammer_azimuth_deg = {0.0, 0.0};
      cfg.distribution.jammer_elevation_deg = {20.0, 20.0};
      try {
        (void)run_benchmark(cfg);
        FAIL("expected failure");
      } catch (const Error& e) {
        CHECK(std::string(e.what()).find("trial 0") != std::string::npos);
        CHECK(std::string(e.what()).find("scenario") != std::string::npos);
      }
    }
    SUBCASE("output files") {
      const auto dir = std::filesystem::temp_directory_path() / "qpskbf_bench_out";
      std::filesystem::remove_all(dir);
      cfg.trials = 4;
      cfg.out_dir = dir.string();
      (void)run_benchmark(cfg);
      CHECK(std::filesystem::exists(dir / "summary.json"));
      CHECK(std::filesystem::exists(dir / "trials.csv.meta.json"));
      const auto lines = read_lines(dir / "trials.csv");
      CHECK(lines.size() == 1 + 4 * cfg.methods.size());
      std::ifstream in(dir / "summary.json");
      const auto j = nlohmann::json::parse(in);
      CHECK(j.at("tool_version") == "0.1.0");
      CHECK(j.at("config").at("n_elements") == 4);
      std::filesystem::remove_all(dir);
    }
    SUBCASE("invalid configs") {
      cfg.trials = 0;
      CHECK_THROWS_AS(run_benchmark(cfg), InvalidArgument);
      cfg.trials = 1;
      cfg.n_elements = 15;
      CHECK_THROWS_AS(run_benchmark(cfg), OracleTooLargeError);
    }
  }

  TEST_CASE("BenchConfig JSON") {
    BenchConfig c;
    c.methods = {MethodId::oracle, MethodId::gbdt_refine};
    c.solver.greedy_samples = 7;
    c.master_seed = 99;
    BenchConfig back;
    from_json(nlohmann::json(c), back);
    CHECK(nlohmann::json(back) == nlohmann::json(c));
    BenchConfig partial;
    from_json(nlohmann::json{{"trials", 5}}, partial);
    CHECK(partial.trials == 5);
    CHECK(partial.n_elements == 8);
    CHECK_THROWS_AS(from_json(nlohmann::json{{"methods", {"nope"}}}, partial), InvalidArgument);
  }
}
