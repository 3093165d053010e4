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
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpskbf/array_model.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/bench.hpp"
#include "qpskbf/errors.hpp"
#include "qpskbf/gbdt.hpp"
#include "qpskbf/policy.hpp"
#include "qpskbf/rng.hpp"
#include "qpskbf/version.hpp"

namespace {

using nlohmann::json;
using namespace qpskbf;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Bad flags, bad config files and infeasible requests detected before any work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string("cannot open ") + what + " " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed ") + what + " " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path);
}

template <typename T>
void take_flag(const CLI::Option* opt, const T& value, T& dst) {
  if (opt->count() > 0) dst = value;
}

// Runs `fn` and turns library argument errors into usage errors.
template <typename Fn>
void as_usage(Fn&& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const OracleTooLargeError& e) {
    throw UsageError(e.what());
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

void check_oracle_feasible(int n, const char* context) {
  if (n > kOracleMaxElements) {
    throw UsageError(std::string(context) + ": oracle enumeration at N = " + std::to_string(n) + " needs 4^(N-1) = " +
                     std::to_string(qpsk_space_size(n - 1)) + " objective evaluations; refusing N > " +
                     std::to_string(kOracleMaxElements));
  }
}

// Knobs shared by every subcommand: the config file plus solver overrides.
struct SharedFlags {
  std::string config_path;
  unsigned threads = 0;
  int n = 8;
  double alpha = 0.01;
  double loading_scale = 1e-6;
  int greedy_samples = kDefaultGreedySamples;
  int cd_sweeps = 100;
  int refine_sweeps = kDefaultRefineSweeps;
  double grid_step = 2.0;
  std::string model_path;

  CLI::Option* n_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* loading_opt = nullptr;
  CLI::Option* greedy_opt = nullptr;
  CLI::Option* cd_opt = nullptr;
  CLI::Option* refine_opt = nullptr;
  CLI::Option* grid_opt = nullptr;
  CLI::Option* model_opt = nullptr;

  void add_config(CLI::App* app) { app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile); }
  void add_threads(CLI::App* app) {
    threads_opt = app->add_option("--threads", threads, "Worker cap (0 = all cores)")->check(CLI::NonNegativeNumber);
  }
  void add_n(CLI::App* app) { n_opt = app->add_option("--n", n, "Number of array elements")->check(CLI::Range(2, 64)); }
  void add_solver(CLI::App* app) {
    alpha_opt = app->add_option("--alpha", alpha, "Satellite-gain weight in [0, 1]");
    loading_opt = app->add_option("--loading-scale", loading_scale, "Capon diagonal loading scale");
    greedy_opt = app->add_option("--greedy-samples", greedy_samples, "Greedy sample count");
    cd_opt = app->add_option("--cd-sweeps", cd_sweeps, "Coordinate-descent sweep cap");
    refine_opt = app->add_option("--refine-sweeps", refine_sweeps, "Sweeps after the GBDT prediction");
  }
  void add_grid(CLI::App* app) { grid_opt = app->add_option("--grid-step", grid_step, "Pattern grid step, degrees"); }
  void add_model(CLI::App* app) {
    model_opt = app->add_option("--model", model_path, "Trained GBDT model")->check(CLI::ExistingFile);
  }

  // defaults <- config file <- flags
  BenchConfig resolve(json* raw_config = nullptr) const {
    BenchConfig cfg;
    json j = json::object();
    if (!config_path.empty()) {
      j = read_json_file(config_path, "config");
      if (!j.is_object()) throw UsageError("config " + config_path + " must hold a JSON object");
      as_usage([&] { from_json(j, cfg); });
    }
    auto apply = [](const CLI::Option* o, const auto& v, auto& dst) {
      if (o != nullptr && o->count() > 0) dst = v;
    };
    apply(n_opt, n, cfg.n_elements);
    apply(threads_opt, threads, cfg.threads);
    apply(alpha_opt, alpha, cfg.solver.params.alpha);
    apply(loading_opt, loading_scale, cfg.solver.params.loading_scale);
    apply(greedy_opt, greedy_samples, cfg.solver.greedy_samples);
    apply(cd_opt, cd_sweeps, cfg.solver.cd_max_sweeps);
    apply(refine_opt, refine_sweeps, cfg.solver.refine_sweeps);
    apply(grid_opt, grid_step, cfg.grid.step_deg);
    apply(model_opt, model_path, cfg.model_path);
    as_usage([&] {
      if (cfg.n_elements < 2) throw InvalidArgument("n_elements must be >= 2");
      cfg.distribution.validate();
      cfg.solver.validate();
      cfg.grid.validate();
    });
    if (raw_config != nullptr) *raw_config = std::move(j);
    return cfg;
  }
};

json weights_json(std::span<const cdouble> w) {
  json out = json::array();
  for (const auto& v : w) out.push_back({v.real(), v.imag()});
  return out;
}

json solver_json(const BenchConfig& cfg) {
  return {{"n_elements", cfg.n_elements},
          {"solver", cfg.solver},
          {"grid_step_deg", cfg.grid.step_deg},
          {"model_path", cfg.model_path},
          {"distribution", cfg.distribution}};
}

// ---------------------------------------------------------------- dataset

struct DatasetCmd {
  SharedFlags shared;
  int count = 20000;
  std::uint64_t seed = 1;
  std::string out;
  CLI::Option* count_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    shared.add_n(app);
    count_opt = app->add_option("--count", count, "Number of rows")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "Output JSON-lines file")->required();
    seed_opt = app->add_option("--seed", seed, "Master seed");
    shared.add_config(app);
    shared.add_threads(app);
    shared.alpha_opt = app->add_option("--alpha", shared.alpha, "Satellite-gain weight in [0, 1]");
  }

  int run() {
    json raw;
    BenchConfig cfg = shared.resolve(&raw);
    int rows = 20000;
    std::uint64_t ds_seed = 1;
    if (raw.contains("dataset")) {
      as_usage([&] {
        const json& d = raw.at("dataset");
        if (d.contains("count")) rows = d.at("count").get<int>();
        if (d.contains("seed")) ds_seed = d.at("seed").get<std::uint64_t>();
      });
    }
    take_flag(count_opt, count, rows);
    take_flag(seed_opt, seed, ds_seed);
    if (rows < 1) throw UsageError("dataset: count must be >= 1");
    check_oracle_feasible(cfg.n_elements, "dataset");

    const TrainingDataset ds = generate_dataset(cfg.distribution, rows, uca_geometry(cfg.n_elements),
                                                cfg.solver.params, ds_seed, cfg.threads);
    write_dataset(ds, out);
    const json meta = {{"tool_version", kVersion},
                       {"command", "dataset"},
                       {"config",
                        {{"n_elements", cfg.n_elements},
                         {"count", rows},
                         {"seed", ds_seed},
                         {"alpha", cfg.solver.params.alpha},
                         {"distribution", cfg.distribution}}},
                       {"rows", ds.rows.size()},
                       {"fingerprint", ds.fingerprint()}};
    write_json_file(out + ".meta.json", meta);

    std::cout << "wrote " << ds.rows.size() << " rows (N = " << ds.n_antennas << ") to " << out << '\n';
    std::cout << "label distribution (fraction per class)\n";
    std::cout << "antenna       0       1       2       3\n";
    const auto hist = label_histogram(ds);
    std::cout << std::fixed << std::setprecision(3);
    for (std::size_t i = 0; i < hist.size(); ++i) {
      std::cout << std::setw(7) << i;
      for (auto c : hist[i]) std::cout << std::setw(8) << static_cast<double>(c) / static_cast<double>(ds.rows.size());
      std::cout << '\n';
    }
    return 0;
  }
};

// ---------------------------------------------------------------- train

struct TrainCmd {
  SharedFlags shared;
  std::string dataset;
  std::string out;
  TrainingConfig flags;
  double holdout = 0.2;
  CLI::Option* rounds_opt = nullptr;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* leaf_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--dataset", dataset, "JSON-lines dataset")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output model JSON")->required();
    rounds_opt = app->add_option("--rounds", flags.rounds, "Boosting rounds");
    depth_opt = app->add_option("--depth", flags.max_depth, "Maximum tree depth");
    lr_opt = app->add_option("--lr", flags.learning_rate, "Learning rate in (0, 1]");
    leaf_opt = app->add_option("--min-leaf", flags.min_leaf, "Minimum rows per leaf");
    seed_opt = app->add_option("--seed", flags.seed, "Training seed (recorded in the model)");
    app->add_option("--holdout", holdout, "Fraction of trailing rows held out")->check(CLI::Range(0.0, 0.9));
    shared.add_config(app);
    shared.add_threads(app);
  }

  int run() {
    json raw;
    const BenchConfig base = shared.resolve(&raw);
    TrainingConfig cfg;
    as_usage([&] {
      if (raw.contains("training")) from_json(raw.at("training"), cfg);
    });
    take_flag(rounds_opt, flags.rounds, cfg.rounds);
    take_flag(depth_opt, flags.max_depth, cfg.max_depth);
    take_flag(lr_opt, flags.learning_rate, cfg.learning_rate);
    take_flag(leaf_opt, flags.min_leaf, cfg.min_leaf);
    take_flag(seed_opt, flags.seed, cfg.seed);
    as_usage([&] { cfg.validate(); });

    TrainingDataset all = read_dataset(dataset);
    const auto n_rows = all.rows.size();
    const auto held = static_cast<std::size_t>(std::floor(holdout * static_cast<double>(n_rows)));
    if (held >= n_rows) throw Error("train: holdout leaves no training rows");
    TrainingDataset train_part{all.n_antennas, {all.rows.begin(), all.rows.end() - static_cast<long>(held)}};
    std::span<const DatasetRow> test_rows(all.rows.data() + (n_rows - held), held);

    const GbdtModel model = train_gbdt(train_part, cfg, base.threads);
    save_model(model, out);

    std::cout << "trained N = " << model.n_antennas() << " on " << train_part.rows.size() << " rows, "
              << model.tree_count() << " trees -> " << out << '\n';
    for (const auto& w : model.metadata().warnings) std::cout << "warning: " << w << '\n';
    if (held == 0) return 0;
    std::cout << "held-out accuracy on the last " << held << " rows\n";
    std::cout << "antenna  accuracy  p(chance 25%)\n";
    const auto acc = per_antenna_accuracy(model, test_rows);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const auto hits = static_cast<std::size_t>(std::llround(acc[i] * static_cast<double>(held)));
      std::cout << std::setw(7) << i << std::setw(9) << std::fixed << std::setprecision(1) << 100.0 * acc[i] << "%"
                << std::setw(15) << std::scientific << std::setprecision(2) << binomial_upper_tail(hits, held, 0.25)
                << std::defaultfloat << '\n';
    }
    return 0;
  }
};

// ---------------------------------------------------------------- solve / pattern

struct Instance {
  BenchConfig cfg;
  MethodId method = MethodId::capon;
  Scenario scenario;
  bool random_scenario_drawn = false;
  std::uint64_t seed = 1;
  std::optional<GbdtModel> model;
};

struct InstanceFlags {
  SharedFlags shared;
  std::string method;
  std::string scenario_json;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    shared.add_n(app);
    app->add_option("--method", method, "capon|naive|oracle|greedy|coord_descent|gbdt_refine")->required();
    app->add_option("--scenario-json", scenario_json, "Scenario JSON file (default: random draw from --seed)")
        ->check(CLI::ExistingFile);
    shared.add_model(app);
    app->add_option("--seed", seed, "Scenario and greedy seed");
    shared.add_config(app);
    shared.add_solver(app);
  }

  Instance resolve() const {
    Instance inst;
    inst.cfg = shared.resolve();
    inst.seed = seed;
    as_usage([&] { inst.method = parse_method(method); });
    if (inst.method == MethodId::oracle) check_oracle_feasible(inst.cfg.n_elements, "solve");
    if (inst.method == MethodId::gbdt_refine && inst.cfg.model_path.empty()) {
      throw UsageError("gbdt_refine needs --model");
    }
    if (!scenario_json.empty()) {
      const json j = read_json_file(scenario_json, "scenario");
      as_usage([&] { inst.scenario = j.get<Scenario>(); });
    } else {
      as_usage([&] { inst.scenario = random_scenario(inst.cfg.distribution, seed); });
      inst.random_scenario_drawn = true;
    }
    as_usage([&] { inst.scenario.validate(inst.cfg.n_elements); });
    if (inst.method == MethodId::gbdt_refine) {
      inst.model = load_model(inst.cfg.model_path);
      if (inst.model->n_antennas() != inst.cfg.n_elements) {
        throw UsageError("model is for N = " + std::to_string(inst.model->n_antennas()) + ", --n is " +
                         std::to_string(inst.cfg.n_elements));
      }
    }
    return inst;
  }
};

json instance_config(const Instance& inst) {
  json c = solver_json(inst.cfg);
  c["method"] = method_name(inst.method);
  c["seed"] = inst.seed;
  c["scenario_source"] = inst.random_scenario_drawn ? "random" : "file";
  return c;
}

struct SolveCmd {
  InstanceFlags flags;

  void attach(CLI::App* app) {
    flags.attach(app);
    flags.shared.add_grid(app);
  }

  int run() {
    const Instance inst = flags.resolve();
    const ArrayGeometry geom = uca_geometry(inst.cfg.n_elements);
    const PatternGrid grid(geom, inst.cfg.grid);
    const MethodId methods[] = {inst.method};
    const TrialResult tr = run_trial(grid, inst.scenario, methods, inst.cfg.solver,
                                     inst.model ? &*inst.model : nullptr, derive_seed(inst.seed, 1));
    const MethodRecord& rec = tr.records.front();

    json out = {{"tool_version", kVersion},
                {"command", "solve"},
                {"config", instance_config(inst)},
                {"scenario", inst.scenario},
                {"method", method_name(inst.method)},
                {"symbols", rec.symbols ? json(*rec.symbols) : json(nullptr)},
                {"weights", weights_json(rec.weights)},
                {"objective", rec.objective},
                {"sat_gain_db", rec.sat_gain_db},
                {"intf_gain_db", rec.intf_gain_db},
                {"latency_ns", rec.latency_ns}};
    if (tr.gbdt_raw) {
      out["raw_symbols"] = *tr.gbdt_raw;
      out["raw_objective"] = *tr.gbdt_raw_objective;
    }
    if (inst.method == MethodId::capon) {
      const ComplexVector a_g = steering_vector(geom, inst.scenario.sat_dir);
      const cdouble response = inner(rec.weights, a_g.entries());
      out["distortionless"] = {{"w_h_a_g", {response.real(), response.imag()}},
                               {"error", rec.constraint_error},
                               {"tolerance", 1e-9},
                               {"ok", rec.constraint_error <= 1e-9}};
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  }
};

struct PatternCmd {
  InstanceFlags flags;
  std::string out;

  void attach(CLI::App* app) {
    flags.attach(app);
    flags.shared.add_grid(app);
    app->add_option("--out", out, "Output CSV")->required();
  }

  int run() {
    const Instance inst = flags.resolve();
    const ArrayGeometry geom = uca_geometry(inst.cfg.n_elements);
    const HermitianMatrix r = sample_covariance(synthesize_snapshots(geom, inst.scenario));
    const ComplexVector a_g = steering_vector(geom, inst.scenario.sat_dir);
    const MethodSolution sol = solve_method(inst.method, r, a_g, inst.cfg.solver,
                                            inst.model ? &*inst.model : nullptr, derive_seed(inst.seed, 1));
    const std::size_t rows = export_beampattern_grid(sol.weights, geom, inst.cfg.grid, out);

    const PatternGrid grid(geom, inst.cfg.grid);
    json jammer_gains = json::array();
    for (const auto& d : inst.scenario.jammer_dirs) jammer_gains.push_back(grid.gain_db(sol.weights, d));
    const json meta = {{"tool_version", kVersion},
                       {"command", "pattern"},
                       {"config", instance_config(inst)},
                       {"scenario", inst.scenario},
                       {"symbols", sol.symbols ? json(*sol.symbols) : json(nullptr)},
                       {"weights", weights_json(sol.weights)},
                       {"rows", rows},
                       {"sat_gain_db", grid.gain_db(sol.weights, inst.scenario.sat_dir)},
                       {"jammer_gain_db", jammer_gains}};
    write_json_file(out + ".meta.json", meta);
    std::cout << "wrote " << rows << " grid points to " << out << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------- bench

struct BenchCmd {
  SharedFlags shared;
  std::string out_dir = "bench_out";
  std::vector<std::string> methods;
  int trials = 100;
  std::uint64_t seed = 1;
  CLI::Option* out_opt = nullptr;
  CLI::Option* methods_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    shared.add_config(app);
    out_opt = app->add_option("--out-dir", out_dir, "Directory for summary.json and trials.csv");
    methods_opt = app->add_option("--methods", methods, "Comma-separated method list")->delimiter(',');
    trials_opt = app->add_option("--trials", trials, "Number of Monte-Carlo trials");
    seed_opt = app->add_option("--seed", seed, "Master seed");
    shared.add_n(app);
    shared.add_model(app);
    shared.add_threads(app);
    shared.add_solver(app);
    shared.add_grid(app);
  }

  int run() {
    json raw;
    BenchConfig cfg = shared.resolve(&raw);
    cfg.out_dir = raw.contains("out_dir") ? raw.at("out_dir").get<std::string>() : out_dir;
    take_flag(out_opt, out_dir, cfg.out_dir);
    take_flag(trials_opt, trials, cfg.trials);
    take_flag(seed_opt, seed, cfg.master_seed);
    if (methods_opt->count() > 0) {
      cfg.methods.clear();
      as_usage([&] {
        for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
      });
    }
    as_usage([&] { cfg.validate(); });
    const bool wants_model =
        std::find(cfg.methods.begin(), cfg.methods.end(), MethodId::gbdt_refine) != cfg.methods.end();
    if (wants_model && cfg.model_path.empty()) throw UsageError("bench: gbdt_refine requested without --model");

    const BenchmarkSummary summary = run_benchmark(cfg);
    std::cout << format_table(summary);
    std::cout << "results in " << cfg.out_dir << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QPSK anti-jamming beamforming: datasets, training, solves and benchmarks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DatasetCmd dataset;
  TrainCmd train;
  SolveCmd solve;
  BenchCmd bench;
  PatternCmd pattern;
  CLI::App* dataset_app = app.add_subcommand("dataset", "Generate an oracle-labeled training set");
  CLI::App* train_app = app.add_subcommand("train", "Train per-antenna GBDT classifiers");
  CLI::App* solve_app = app.add_subcommand("solve", "Solve one scenario and print the weights as JSON");
  CLI::App* bench_app = app.add_subcommand("bench", "Monte-Carlo benchmark over random scenarios");
  CLI::App* pattern_app = app.add_subcommand("pattern", "Export a beampattern grid as CSV");
  dataset.attach(dataset_app);
  train.attach(train_app);
  solve.attach(solve_app);
  bench.attach(bench_app);
  pattern.attach(pattern_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (dataset_app->parsed()) return dataset.run();
    if (train_app->parsed()) return train.run();
    if (solve_app->parsed()) return solve.run();
    if (bench_app->parsed()) return bench.run();
    if (pattern_app->parsed()) return pattern.run();
  } catch (const UsageError& e) {
    std::cerr << "qpskbf: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "qpskbf: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
