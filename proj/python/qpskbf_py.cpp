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

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "qpskbf/array_model.hpp"
#include "qpskbf/beamformers.hpp"
#include "qpskbf/bench.hpp"
#include "qpskbf/errors.hpp"
#include "qpskbf/features.hpp"
#include "qpskbf/gbdt.hpp"
#include "qpskbf/linalg.hpp"
#include "qpskbf/policy.hpp"
#include "qpskbf/version.hpp"

namespace py = pybind11;
using namespace qpskbf;

namespace {

using ComplexArray = py::array_t<cdouble, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

nlohmann::json to_json(const py::object& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
  const auto loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

ComplexVector vector_arg(const ComplexArray& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D complex array");
  return ComplexVector(std::vector<cdouble>(a.data(), a.data() + a.size()));
}

HermitianMatrix matrix_arg(const ComplexArray& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw DimensionError("expected a square complex matrix");
  return HermitianMatrix(static_cast<std::size_t>(a.shape(0)), std::vector<cdouble>(a.data(), a.data() + a.size()));
}

QpskWeights symbols_arg(const std::vector<int>& s) {
  std::vector<std::uint8_t> v;
  v.reserve(s.size());
  for (int x : s) {
    if (x < 0 || x > 3) throw InvalidArgument("symbols must lie in {0, 1, 2, 3}");
    v.push_back(static_cast<std::uint8_t>(x));
  }
  return QpskWeights(std::move(v));
}

std::vector<int> symbols_out(const QpskWeights& s) { return {s.symbols().begin(), s.symbols().end()}; }

ComplexArray vector_out(std::span<const cdouble> v) {
  ComplexArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ComplexArray matrix_out(const HermitianMatrix& m) {
  const auto n = static_cast<py::ssize_t>(m.order());
  ComplexArray out({n, n});
  std::copy(m.row_major().begin(), m.row_major().end(), out.mutable_data());
  return out;
}

ObjectiveParams params(double alpha, double loading_scale) {
  ObjectiveParams p{alpha, loading_scale};
  p.validate();
  return p;
}

ScenarioDistribution distribution_arg(const py::object& d) {
  ScenarioDistribution dist;
  if (!d.is_none()) from_json(to_json(d), dist);
  dist.validate();
  return dist;
}

TrainingDataset dataset_arg(const RealArray& features, const py::array_t<int, py::array::c_style | py::array::forcecast>& labels) {
  if (features.ndim() != 2 || labels.ndim() != 2 || features.shape(0) != labels.shape(0)) {
    throw DimensionError("features must be (rows, F) and labels (rows, N)");
  }
  TrainingDataset ds;
  ds.n_antennas = static_cast<int>(labels.shape(1));
  const auto rows = static_cast<std::size_t>(features.shape(0));
  const auto f = static_cast<std::size_t>(features.shape(1));
  const auto n = static_cast<std::size_t>(labels.shape(1));
  ds.rows.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    ds.rows[r].features.assign(features.data() + r * f, features.data() + (r + 1) * f);
    for (std::size_t i = 0; i < n; ++i) ds.rows[r].labels.push_back(static_cast<std::uint8_t>(labels.data()[r * n + i]));
    ds.rows[r].scenario_id = r;
  }
  ds.validate();
  return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "QPSK phase-quantized anti-jamming beamforming";
  m.attr("__version__") = std::string(kVersion);
  m.attr("ORACLE_MAX_ELEMENTS") = kOracleMaxElements;

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<OracleTooLargeError>(m, "OracleTooLargeError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  // array model
  m.def(
      "uca_positions",
      [](int n) {
        const ArrayGeometry g = uca_geometry(n);
        py::array_t<double> out({static_cast<py::ssize_t>(n), py::ssize_t{3}});
        for (std::size_t i = 0; i < g.size(); ++i)
          for (std::size_t k = 0; k < 3; ++k) out.mutable_at(i, k) = g.positions[i][k];
        return out;
      },
      py::arg("n"), "Element positions of the uniform circular array, in wavelengths.");
  m.def(
      "steering_vector",
      [](int n, double az, double el) { return vector_out(steering_vector(uca_geometry(n), Direction(az, el)).entries()); },
      py::arg("n"), py::arg("azimuth_deg"), py::arg("elevation_deg"));
  m.def(
      "random_scenario",
      [](std::uint64_t seed, const py::object& distribution) {
        return from_json(nlohmann::json(random_scenario(distribution_arg(distribution), seed)));
      },
      py::arg("seed"), py::arg("distribution") = py::none(),
      "Draw a scenario dict; `distribution` overrides the default ranges key by key.");
  m.def(
      "sample_covariance",
      [](int n, const py::object& scenario) {
        const Scenario sc = to_json(scenario).get<Scenario>();
        sc.validate(n);
        return matrix_out(sample_covariance(synthesize_snapshots(uca_geometry(n), sc)));
      },
      py::arg("n"), py::arg("scenario"), "Synthesize the scenario's snapshots and return R.");

  // linear algebra
  m.def("hermitian_eigenvalues", [](const ComplexArray& r) { return hermitian_eigenvalues(matrix_arg(r)); },
        py::arg("r"), "Eigenvalues, descending.");
  m.def(
      "quadratic_form", [](const ComplexArray& r, const ComplexArray& w) { return quadratic_form(matrix_arg(r), vector_arg(w)); },
      py::arg("r"), py::arg("w"));

  // beamformers
  m.def("to_complex", [](const std::vector<int>& s) { return vector_out(to_complex(symbols_arg(s)).entries()); },
        py::arg("symbols"));
  m.def(
      "objective",
      [](const std::vector<int>& s, const ComplexArray& r, const ComplexArray& a_g, double alpha) {
        return objective(symbols_arg(s), matrix_arg(r), vector_arg(a_g), params(alpha, 1e-6));
      },
      py::arg("symbols"), py::arg("r"), py::arg("a_g"), py::arg("alpha") = 0.01);
  m.def(
      "capon_weights",
      [](const ComplexArray& r, const ComplexArray& a_g, double loading_scale) {
        return vector_out(capon_weights(matrix_arg(r), vector_arg(a_g), params(0.01, loading_scale)).entries());
      },
      py::arg("r"), py::arg("a_g"), py::arg("loading_scale") = 1e-6);
  m.def("naive_quantize", [](const ComplexArray& w) { return symbols_out(naive_quantize(vector_arg(w))); },
        py::arg("w"));
  m.def(
      "oracle_search",
      [](const ComplexArray& r, const ComplexArray& a_g, double alpha) {
        const HermitianMatrix rm = matrix_arg(r);
        const ComplexVector av = vector_arg(a_g);
        const ObjectiveParams p = params(alpha, 1e-6);
        py::gil_scoped_release release;
        return symbols_out(oracle_search(rm, av, p));
      },
      py::arg("r"), py::arg("a_g"), py::arg("alpha") = 0.01);
  m.def(
      "greedy_sample",
      [](const ComplexArray& r, const ComplexArray& a_g, int n_samples, std::uint64_t seed, double alpha) {
        return symbols_out(greedy_sample(matrix_arg(r), vector_arg(a_g), params(alpha, 1e-6), n_samples, seed));
      },
      py::arg("r"), py::arg("a_g"), py::arg("n_samples") = kDefaultGreedySamples, py::arg("seed") = 0,
      py::arg("alpha") = 0.01);
  m.def(
      "coordinate_descent",
      [](const std::vector<int>& init, const ComplexArray& r, const ComplexArray& a_g, int max_sweeps, double alpha) {
        return symbols_out(
            coordinate_descent(symbols_arg(init), matrix_arg(r), vector_arg(a_g), params(alpha, 1e-6), max_sweeps));
      },
      py::arg("init"), py::arg("r"), py::arg("a_g"), py::arg("max_sweeps") = 100, py::arg("alpha") = 0.01);

  // ml policy
  m.def(
      "extract_features",
      [](const ComplexArray& r, const ComplexArray& a_g) { return extract_features(matrix_arg(r), vector_arg(a_g)); },
      py::arg("r"), py::arg("a_g"));
  m.def(
      "generate_dataset",
      [](int n, int count, std::uint64_t seed, const py::object& distribution, double alpha, unsigned threads) {
        const ScenarioDistribution dist = distribution_arg(distribution);
        TrainingDataset ds;
        {
          py::gil_scoped_release release;
          ds = generate_dataset(dist, count, uca_geometry(n), params(alpha, 1e-6), seed, threads);
        }
        const auto f = static_cast<py::ssize_t>(feature_length(static_cast<std::size_t>(n)));
        py::array_t<double> features({static_cast<py::ssize_t>(count), f});
        py::array_t<int> labels({static_cast<py::ssize_t>(count), static_cast<py::ssize_t>(n)});
        for (std::size_t r = 0; r < ds.rows.size(); ++r) {
          std::copy(ds.rows[r].features.begin(), ds.rows[r].features.end(), features.mutable_data() + r * f);
          for (std::size_t i = 0; i < ds.rows[r].labels.size(); ++i) labels.mutable_data()[r * n + i] = ds.rows[r].labels[i];
        }
        return py::make_tuple(features, labels);
      },
      py::arg("n"), py::arg("count"), py::arg("seed") = 1, py::arg("distribution") = py::none(),
      py::arg("alpha") = 0.01, py::arg("threads") = 0, "Oracle-labeled (features, labels) arrays.");

  py::class_<GbdtModel>(m, "GbdtModel")
      .def_static(
          "train",
          [](const RealArray& features, const py::array_t<int, py::array::c_style | py::array::forcecast>& labels,
             int rounds, int max_depth, double learning_rate, int min_leaf, std::uint64_t seed, unsigned threads) {
            const TrainingDataset ds = dataset_arg(features, labels);
            const TrainingConfig cfg{rounds, max_depth, learning_rate, min_leaf, seed};
            py::gil_scoped_release release;
            return train_gbdt(ds, cfg, threads);
          },
          py::arg("features"), py::arg("labels"), py::arg("rounds") = 150, py::arg("max_depth") = 5,
          py::arg("learning_rate") = 0.1, py::arg("min_leaf") = 5, py::arg("seed") = 0, py::arg("threads") = 0)
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def("save", [](const GbdtModel& self, const std::string& path) { save_model(self, path); }, py::arg("path"))
      .def_property_readonly("n_antennas", &GbdtModel::n_antennas)
      .def_property_readonly("feature_length", &GbdtModel::feature_length)
      .def_property_readonly("tree_count", &GbdtModel::tree_count)
      .def(
          "predict",
          [](const GbdtModel& self, const std::vector<double>& f) { return symbols_out(predict_weights(self, f)); },
          py::arg("features"))
      .def(
          "refine",
          [](const GbdtModel& self, const ComplexArray& r, const ComplexArray& a_g, int max_sweeps, double alpha) {
            return symbols_out(gbdt_refine(self, matrix_arg(r), vector_arg(a_g), params(alpha, 1e-6), max_sweeps));
          },
          py::arg("r"), py::arg("a_g"), py::arg("max_sweeps") = kDefaultRefineSweeps, py::arg("alpha") = 0.01)
      .def("to_dict", [](const GbdtModel& self) { return from_json(model_to_json(self)); });

  // bench harness
  m.def(
      "beampattern_gain_db",
      [](const ComplexArray& w, double az, double el, double grid_step) {
        const ComplexVector wv = vector_arg(w);
        return beampattern_gain_db(wv.entries(), uca_geometry(static_cast<int>(wv.size())), Direction(az, el),
                                   GridSpec{grid_step});
      },
      py::arg("w"), py::arg("azimuth_deg"), py::arg("elevation_deg"), py::arg("grid_step") = 2.0);
  m.def(
      "run_benchmark",
      [](const py::object& config) {
        BenchConfig cfg;
        if (!config.is_none()) from_json(to_json(config), cfg);
        BenchmarkSummary s;
        {
          py::gil_scoped_release release;
          s = run_benchmark(cfg);
        }
        return from_json(summary_to_json(s));
      },
      py::arg("config") = py::none(), "Run a benchmark from a config dict; returns the summary dict.");
}
