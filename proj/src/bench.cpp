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

#include "qpskbf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qpskbf/errors.hpp"
#include "qpskbf/parallel.hpp"
#include "qpskbf/policy.hpp"
#include "qpskbf/rng.hpp"
#include "qpskbf/version.hpp"

namespace qpskbf {
namespace {

constexpr double kGainFloorDb = -400.0;

struct MethodInfo {
  MethodId id;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<MethodInfo, 6> kMethodInfo{{
    {MethodId::capon, "capon", "Capon (continuous)"},
    {MethodId::naive, "naive", "QPSK-Quantized"},
    {MethodId::oracle, "oracle", "Oracle"},
    {MethodId::greedy, "greedy", "Greedy"},
    {MethodId::coord_descent, "coord_descent", "Coord. descent"},
    {MethodId::gbdt_refine, "gbdt_refine", "GBDT+Refine"},
}};

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  return std::max<std::int64_t>(ns, 1);
}

std::vector<cdouble> as_vector(const ComplexVector& v) { return {v.begin(), v.end()}; }

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kGainFloorDb;
  return std::max(10.0 * std::log10(ratio), kGainFloorDb);
}

}  // namespace

std::string_view method_name(MethodId m) {
  for (const auto& info : kMethodInfo)
    if (info.id == m) return info.name;
  return "unknown";
}

std::string_view method_label(MethodId m) {
  for (const auto& info : kMethodInfo)
    if (info.id == m) return info.label;
  return "unknown";
}

MethodId parse_method(std::string_view name) {
  for (const auto& info : kMethodInfo)
    if (info.name == name) return info.id;
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (expected capon, naive, oracle, greedy, coord_descent or gbdt_refine)");
}

void GridSpec::validate() const {
  if (!(step_deg >= 1.0 && step_deg <= 90.0)) throw InvalidArgument("GridSpec: step_deg must lie in [1, 90]");
}

int GridSpec::azimuth_count() const { return static_cast<int>(std::ceil(360.0 / step_deg - 1e-9)); }

int GridSpec::elevation_count() const { return static_cast<int>(std::floor(90.0 / step_deg + 1e-9)) + 1; }

PatternGrid::PatternGrid(const ArrayGeometry& geom, const GridSpec& spec) : geom_(geom) {
  spec.validate();
  const int n_az = spec.azimuth_count();
  const int n_el = spec.elevation_count();
  directions_.reserve(static_cast<std::size_t>(n_az) * n_el);
  steering_.reserve(directions_.capacity() * geom.size());
  for (int e = 0; e < n_el; ++e) {
    for (int a = 0; a < n_az; ++a) {
      const Direction dir(a * spec.step_deg, std::min(e * spec.step_deg, 90.0));
      directions_.push_back(dir);
      const ComplexVector sv = steering_vector(geom, dir);
      steering_.insert(steering_.end(), sv.begin(), sv.end());
    }
  }
}

std::vector<double> PatternGrid::powers(std::span<const cdouble> w) const {
  const std::size_t n = geom_.size();
  if (w.size() != n) throw DimensionError("PatternGrid: weight length does not match the array");
  std::vector<double> out(directions_.size());
  for (std::size_t p = 0; p < directions_.size(); ++p) {
    out[p] = std::norm(inner(w, std::span<const cdouble>(steering_.data() + p * n, n)));
  }
  return out;
}

double PatternGrid::peak_power(std::span<const cdouble> w) const {
  const auto p = powers(w);
  return *std::max_element(p.begin(), p.end());
}

double PatternGrid::gain_db(std::span<const cdouble> w, const Direction& dir) const {
  const ComplexVector a = steering_vector(geom_, dir);
  const double at_dir = std::norm(inner(w, a.entries()));
  const double peak = std::max(peak_power(w), at_dir);
  if (!(peak > 0.0)) return kGainFloorDb;
  return std::min(0.0, to_db(at_dir / peak));
}

double beampattern_gain_db(std::span<const cdouble> w, const ArrayGeometry& geom, const Direction& dir,
                           const GridSpec& grid) {
  return PatternGrid(geom, grid).gain_db(w, dir);
}

std::size_t export_beampattern_grid(std::span<const cdouble> w, const ArrayGeometry& geom, const GridSpec& grid,
                                    const std::filesystem::path& path) {
  const PatternGrid pg(geom, grid);
  const auto p = pg.powers(w);
  const double peak = *std::max_element(p.begin(), p.end());
  std::ofstream out(path);
  if (!out) throw Error("export_beampattern_grid: cannot open " + path.string());
  out << "az_deg,el_deg,gain_db\n" << std::setprecision(10);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = peak > 0.0 ? std::min(0.0, to_db(p[i] / peak)) : 0.0;
    out << pg.directions()[i].azimuth_deg() << ',' << pg.directions()[i].elevation_deg() << ',' << g << '\n';
  }
  if (!out) throw Error("export_beampattern_grid: write failed for " + path.string());
  return p.size();
}

void SolverSettings::validate() const {
  params.validate();
  if (greedy_samples < 1) throw InvalidArgument("greedy_samples must be >= 1");
  if (cd_max_sweeps < 1) throw InvalidArgument("cd_max_sweeps must be >= 1");
  if (refine_sweeps < 1) throw InvalidArgument("refine_sweeps must be >= 1");
}

const MethodRecord* TrialResult::find(MethodId m) const {
  for (const auto& r : records)
    if (r.method == m) return &r;
  return nullptr;
}

MethodSolution solve_method(MethodId method, const HermitianMatrix& r, const ComplexVector& a_g,
                            const SolverSettings& settings, const GbdtModel* model, std::uint64_t greedy_seed) {
  const ObjectiveParams& p = settings.params;
  MethodSolution out;
  const auto start = Clock::now();
  switch (method) {
    case MethodId::capon:
      out.weights = as_vector(capon_weights(r, a_g, p));
      break;
    case MethodId::naive:
      out.symbols = naive_quantize(capon_weights(r, a_g, p));
      break;
    case MethodId::oracle:
      out.symbols = oracle_search(r, a_g, p);
      break;
    case MethodId::greedy:
      out.symbols = greedy_sample(r, a_g, p, settings.greedy_samples, greedy_seed);
      break;
    case MethodId::coord_descent:
      out.symbols = coordinate_descent(naive_quantize(capon_weights(r, a_g, p)), r, a_g, p, settings.cd_max_sweeps);
      break;
    case MethodId::gbdt_refine: {
      if (model == nullptr) throw InvalidArgument("gbdt_refine requires a trained model");
      RefineResult res = gbdt_refine_detailed(*model, r, a_g, p, settings.refine_sweeps);
      out.symbols = std::move(res.refined);
      out.gbdt_raw = std::move(res.raw);
      break;
    }
  }
  out.latency_ns = elapsed_ns(start);
  if (out.symbols) out.weights = as_vector(to_complex(*out.symbols));
  return out;
}

TrialResult run_trial(const PatternGrid& grid, const Scenario& sc, std::span<const MethodId> methods,
                      const SolverSettings& settings, const GbdtModel* model, std::uint64_t greedy_seed,
                      std::uint64_t scenario_id) {
  const ArrayGeometry& geom = grid.geometry();
  const bool wants_model = std::find(methods.begin(), methods.end(), MethodId::gbdt_refine) != methods.end();
  if (wants_model) {
    if (model == nullptr) throw InvalidArgument("run_trial: gbdt_refine requested but no model supplied");
    if (static_cast<std::size_t>(model->n_antennas()) != geom.size()) {
      throw DimensionError("run_trial: model is for N = " + std::to_string(model->n_antennas()) +
                           ", array has N = " + std::to_string(geom.size()));
    }
  }
  settings.validate();

  TrialResult result;
  result.scenario_id = scenario_id;
  result.scenario = sc;
  const HermitianMatrix r = sample_covariance(synthesize_snapshots(geom, sc));
  const ComplexVector a_g = steering_vector(geom, sc.sat_dir);

  for (MethodId m : methods) {
    MethodSolution sol = solve_method(m, r, a_g, settings, model, greedy_seed);
    MethodRecord rec;
    rec.method = m;
    rec.latency_ns = sol.latency_ns;
    rec.symbols = std::move(sol.symbols);
    rec.weights = std::move(sol.weights);
    rec.sat_gain_db = grid.gain_db(rec.weights, sc.sat_dir);
    rec.intf_gain_db = kGainFloorDb;
    for (const auto& jd : sc.jammer_dirs) rec.intf_gain_db = std::max(rec.intf_gain_db, grid.gain_db(rec.weights, jd));
    if (rec.symbols) {
      rec.objective = objective(*rec.symbols, r, a_g, settings.params);
    } else {
      double norm = 0.0;
      for (const auto& v : rec.weights) norm += std::norm(v);
      norm = std::sqrt(norm);
      std::vector<cdouble> unit(rec.weights);
      for (auto& v : unit) v /= norm;
      rec.objective = objective(unit, r, a_g, settings.params);
      rec.constraint_error = std::abs(inner(rec.weights, a_g.entries()) - 1.0);
    }
    if (sol.gbdt_raw) {
      result.gbdt_raw_objective = objective(*sol.gbdt_raw, r, a_g, settings.params);
      result.gbdt_raw = std::move(sol.gbdt_raw);
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

void BenchConfig::validate() const {
  if (n_elements < 2) throw InvalidArgument("bench: n_elements must be >= 2");
  if (trials < 1) throw InvalidArgument("bench: trials must be >= 1");
  if (methods.empty()) throw InvalidArgument("bench: at least one method required");
  distribution.validate();
  solver.validate();
  grid.validate();
  if (distribution.snapshots < n_elements) throw InvalidArgument("bench: snapshots must be >= n_elements");
  const bool needs_oracle = std::find(methods.begin(), methods.end(), MethodId::oracle) != methods.end();
  if (needs_oracle && n_elements > kOracleMaxElements) {
    throw OracleTooLargeError("bench: oracle requested for N = " + std::to_string(n_elements) + " (4^(N-1) = " +
                              std::to_string(qpsk_space_size(n_elements - 1)) + " candidates)");
  }
}

const MethodSummary* BenchmarkSummary::find(MethodId m) const {
  for (const auto& s : methods)
    if (s.method == m) return &s;
  return nullptr;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BenchmarkSummary summarize(const BenchConfig& cfg, std::span<const TrialResult> trials) {
  BenchmarkSummary summary;
  summary.config = cfg;
  summary.trial_count = trials.size();
  for (MethodId m : cfg.methods) {
    std::vector<double> sat, intf, lat, obj;
    for (const auto& t : trials) {
      if (const MethodRecord* rec = t.find(m)) {
        sat.push_back(rec->sat_gain_db);
        intf.push_back(rec->intf_gain_db);
        lat.push_back(static_cast<double>(rec->latency_ns) * 1e-6);
        obj.push_back(rec->objective);
      }
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto quantiles = [](const std::vector<double>& v) {
      return Quantiles{quantile(v, 0.1), quantile(v, 0.5), quantile(v, 0.9)};
    };
    MethodSummary ms;
    ms.method = m;
    ms.mean_sat_gain_db = mean(sat);
    ms.mean_intf_gain_db = mean(intf);
    ms.mean_objective = mean(obj);
    ms.mean_latency_ms = mean(lat);
    ms.sat_gain_db = quantiles(sat);
    ms.intf_gain_db = quantiles(intf);
    ms.latency_ms = quantiles(lat);
    summary.methods.push_back(ms);
  }
  return summary;
}

BenchmarkSummary run_benchmark(const BenchConfig& cfg, std::vector<TrialResult>* trials_out,
                               const GbdtModel* model) {
  cfg.validate();
  const bool wants_model =
      std::find(cfg.methods.begin(), cfg.methods.end(), MethodId::gbdt_refine) != cfg.methods.end();
  std::optional<GbdtModel> loaded;
  if (wants_model && model == nullptr) {
    if (cfg.model_path.empty()) throw InvalidArgument("bench: gbdt_refine requested but no model path given");
    loaded = load_model(cfg.model_path);
    model = &*loaded;
  }
  if (wants_model && model->n_antennas() != cfg.n_elements) {
    throw DimensionError("bench: model is for N = " + std::to_string(model->n_antennas()) +
                         ", benchmark uses N = " + std::to_string(cfg.n_elements));
  }

  const ArrayGeometry geom = uca_geometry(cfg.n_elements);
  const PatternGrid grid(geom, cfg.grid);
  std::vector<TrialResult> trials(static_cast<std::size_t>(cfg.trials));
  parallel_for(trials.size(), cfg.threads, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_seed(cfg.master_seed, i);
    Scenario sc;
    try {
      sc = random_scenario(cfg.distribution, trial_seed);
      trials[i] = run_trial(grid, sc, cfg.methods, cfg.solver, model, derive_seed(trial_seed, 1), i);
    } catch (const std::exception& e) {
      throw Error("bench: trial " + std::to_string(i) + " failed (scenario " + nlohmann::json(sc).dump() +
                  "): " + e.what());
    }
  });

  BenchmarkSummary summary = summarize(cfg, trials);
  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream out(dir / "summary.json");
      out << summary_to_json(summary).dump(2) << '\n';
      if (!out) throw Error("bench: cannot write summary.json");
    }
    write_trials_csv(trials, dir / "trials.csv");
    std::ofstream meta(dir / "trials.csv.meta.json");
    nlohmann::json m = {{"tool_version", kVersion}, {"config", cfg}, {"threads", cfg.threads}, {"out_dir", cfg.out_dir}};
    meta << m.dump(2) << '\n';
  }
  if (trials_out != nullptr) *trials_out = std::move(trials);
  return summary;
}

nlohmann::json summary_to_json(const BenchmarkSummary& s) {
  auto q = [](const Quantiles& v) { return nlohmann::json{{"p10", v.p10}, {"p50", v.p50}, {"p90", v.p90}}; };
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : s.methods) {
    methods.push_back({{"method", method_name(m.method)},
                       {"mean_sat_gain_db", m.mean_sat_gain_db},
                       {"mean_intf_gain_db", m.mean_intf_gain_db},
                       {"mean_objective", m.mean_objective},
                       {"mean_latency_ms", m.mean_latency_ms},
                       {"sat_gain_db", q(m.sat_gain_db)},
                       {"intf_gain_db", q(m.intf_gain_db)},
                       {"latency_ms", q(m.latency_ms)}});
  }
  return {{"tool_version", kVersion}, {"config", s.config}, {"trial_count", s.trial_count}, {"methods", methods}};
}

std::string format_table(const BenchmarkSummary& s) {
  std::ostringstream out;
  out << "N = " << s.config.n_elements << ", " << s.trial_count << " trials\n";
  out << std::left << std::setw(22) << "Method" << std::right << std::setw(10) << "Sat (dB)" << std::setw(12)
      << "Intf (dB)" << std::setw(14) << "Infer. (ms)" << '\n';
  out << std::string(58, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& m : s.methods) {
    out << std::left << std::setw(22) << method_label(m.method) << std::right << std::setw(10) << m.mean_sat_gain_db
        << std::setw(12) << m.mean_intf_gain_db << std::setw(14) << std::setprecision(3) << m.mean_latency_ms
        << std::setprecision(2) << '\n';
  }
  return out.str();
}

void write_trials_csv(std::span<const TrialResult> trials, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_trials_csv: cannot open " + path.string());
  out << "trial,method,sat_gain_db,intf_gain_db,objective,latency_ns,symbols,sat_az_deg,sat_el_deg,"
         "jammer_az_deg,jammer_el_deg,js_db,snr_db\n";
  out << std::setprecision(12);
  for (const auto& t : trials) {
    for (const auto& rec : t.records) {
      std::string symbols;
      if (rec.symbols) {
        for (auto v : rec.symbols->symbols()) symbols += static_cast<char>('0' + v);
      }
      out << t.scenario_id << ',' << method_name(rec.method) << ',' << rec.sat_gain_db << ',' << rec.intf_gain_db
          << ',' << rec.objective << ',' << rec.latency_ns << ',' << symbols << ','
          << t.scenario.sat_dir.azimuth_deg() << ',' << t.scenario.sat_dir.elevation_deg() << ','
          << t.scenario.jammer_dirs.front().azimuth_deg() << ',' << t.scenario.jammer_dirs.front().elevation_deg()
          << ',' << t.scenario.js_db_per_jammer.front() << ',' << t.scenario.snr_db << '\n';
    }
  }
  if (!out) throw Error("write_trials_csv: write failed for " + path.string());
}

void to_json(nlohmann::json& j, const SolverSettings& s) {
  j = {{"alpha", s.params.alpha},
       {"loading_scale", s.params.loading_scale},
       {"greedy_samples", s.greedy_samples},
       {"cd_max_sweeps", s.cd_max_sweeps},
       {"refine_sweeps", s.refine_sweeps}};
}

void from_json(const nlohmann::json& j, SolverSettings& s) {
  from_json(j, s.params);
  if (j.contains("greedy_samples")) s.greedy_samples = j.at("greedy_samples").get<int>();
  if (j.contains("cd_max_sweeps")) s.cd_max_sweeps = j.at("cd_max_sweeps").get<int>();
  if (j.contains("refine_sweeps")) s.refine_sweeps = j.at("refine_sweeps").get<int>();
  s.validate();
}

void to_json(nlohmann::json& j, const BenchConfig& c) {
  std::vector<std::string> methods;
  for (MethodId m : c.methods) methods.emplace_back(method_name(m));
  j = {{"n_elements", c.n_elements}, {"trials", c.trials},         {"distribution", c.distribution},
       {"methods", methods},         {"solver", c.solver},         {"grid_step_deg", c.grid.step_deg},
       {"model_path", c.model_path}, {"master_seed", c.master_seed}};
}

void from_json(const nlohmann::json& j, BenchConfig& c) {
  if (j.contains("n_elements")) c.n_elements = j.at("n_elements").get<int>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("distribution")) from_json(j.at("distribution"), c.distribution);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("solver")) from_json(j.at("solver"), c.solver);
  if (j.contains("grid_step_deg")) c.grid.step_deg = j.at("grid_step_deg").get<double>();
  if (j.contains("model_path")) c.model_path = j.at("model_path").get<std::string>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
}

}  // namespace qpskbf
