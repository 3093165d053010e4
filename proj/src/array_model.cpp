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

#include "qpskbf/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpskbf/errors.hpp"
#include "qpskbf/rng.hpp"

namespace qpskbf {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

void check_interval(const Interval& v, const char* name) {
  if (!std::isfinite(v.lo) || !std::isfinite(v.hi) || v.lo > v.hi) {
    throw InvalidArgument(std::string("ScenarioDistribution: bad interval ") + name);
  }
}

}  // namespace

Direction::Direction(double azimuth_deg, double elevation_deg) {
  if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
    throw InvalidArgument("Direction: non-finite angle");
  }
  if (elevation_deg < 0.0 || elevation_deg > 90.0) {
    throw InvalidArgument("Direction: elevation " + std::to_string(elevation_deg) +
                          " outside [0, 90]");
  }
  double az = std::fmod(azimuth_deg, 360.0);
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az = 0.0;
  azimuth_deg_ = az;
  elevation_deg_ = elevation_deg;
}

std::array<double, 3> Direction::unit_vector() const {
  const double az = azimuth_deg_ * kDeg;
  const double el = elevation_deg_ * kDeg;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

double angular_separation_deg(const Direction& a, const Direction& b) {
  const auto u = a.unit_vector();
  const auto v = b.unit_vector();
  const double dot = std::clamp(u[0] * v[0] + u[1] * v[1] + u[2] * v[2], -1.0, 1.0);
  return std::acos(dot) / kDeg;
}

ArrayGeometry uca_geometry(int n_elements) {
  if (n_elements < 2) {
    throw InvalidArgument("uca_geometry: need at least 2 elements, got " + std::to_string(n_elements));
  }
  const double radius = 0.25 / std::sin(std::numbers::pi / n_elements);
  ArrayGeometry geom{"uniform-circular", {}};
  geom.positions.reserve(n_elements);
  for (int i = 0; i < n_elements; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n_elements;
    geom.positions.push_back({radius * std::cos(angle), radius * std::sin(angle), 0.0});
  }
  return geom;
}

ComplexVector steering_vector(const ArrayGeometry& geom, const Direction& dir) {
  const auto u = dir.unit_vector();
  std::vector<cdouble> a(geom.size());
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& p = geom.positions[i];
    const double phase = 2.0 * std::numbers::pi * (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]);
    a[i] = std::polar(1.0, phase);
  }
  return ComplexVector(std::move(a));
}

void Scenario::validate(int n_elements) const {
  if (jammer_dirs.empty()) throw InvalidArgument("Scenario: at least one jammer direction required");
  if (jammer_dirs.size() != js_db_per_jammer.size()) {
    throw InvalidArgument("Scenario: jammer_dirs and js_db_per_jammer lengths differ");
  }
  if (snapshots < 1) throw InvalidArgument("Scenario: snapshots must be positive");
  if (n_elements > 0 && snapshots < n_elements) {
    throw InvalidArgument("Scenario: snapshots (" + std::to_string(snapshots) +
                          ") must be >= array size (" + std::to_string(n_elements) + ")");
  }
  if (!std::isfinite(snr_db)) throw InvalidArgument("Scenario: snr_db must be finite");
  for (double js : js_db_per_jammer) {
    if (!std::isfinite(js)) throw InvalidArgument("Scenario: js_db must be finite");
  }
}

void ScenarioDistribution::validate() const {
  check_interval(sat_azimuth_deg, "sat_azimuth_deg");
  check_interval(sat_elevation_deg, "sat_elevation_deg");
  check_interval(jammer_azimuth_deg, "jammer_azimuth_deg");
  check_interval(jammer_elevation_deg, "jammer_elevation_deg");
  check_interval(js_db, "js_db");
  check_interval(snr_db, "snr_db");
  if (sat_elevation_deg.lo < 0.0 || sat_elevation_deg.hi > 90.0 ||
      jammer_elevation_deg.lo < 0.0 || jammer_elevation_deg.hi > 90.0) {
    throw InvalidArgument("ScenarioDistribution: elevations must lie in [0, 90]");
  }
  if (n_jammers < 1) throw InvalidArgument("ScenarioDistribution: n_jammers must be >= 1");
  if (snapshots < 1) throw InvalidArgument("ScenarioDistribution: snapshots must be >= 1");
  if (!(min_separation_deg >= 0.0)) {
    throw InvalidArgument("ScenarioDistribution: min_separation_deg must be >= 0");
  }
}

SnapshotBatch synthesize_snapshots(const ArrayGeometry& geom, const Scenario& sc) {
  const int n = static_cast<int>(geom.size());
  sc.validate(n);

  const ComplexVector a_g = steering_vector(geom, sc.sat_dir);
  const bool with_signal = sc.snr_db > kOmitPowerDb;
  const double signal_amp = with_signal ? std::sqrt(db_to_power(sc.snr_db)) : 0.0;

  struct JammerTerm {
    std::vector<cdouble> steering;
    double sigma;  // per real/imag component
  };
  std::vector<JammerTerm> jammers;
  for (std::size_t m = 0; m < sc.jammer_dirs.size(); ++m) {
    if (sc.js_db_per_jammer[m] <= kOmitPowerDb) continue;
    const ComplexVector a = steering_vector(geom, sc.jammer_dirs[m]);
    const double power = db_to_power(sc.snr_db + sc.js_db_per_jammer[m]);
    jammers.push_back({std::vector<cdouble>(a.begin(), a.end()), std::sqrt(power / 2.0)});
  }
  const double noise_sigma = std::sqrt(0.5);

  Rng rng(sc.seed);
  SnapshotBatch batch{n, sc.snapshots, std::vector<cdouble>(static_cast<std::size_t>(n) * sc.snapshots)};
  double g0 = 0.0;
  double g1 = 0.0;
  for (int k = 0; k < sc.snapshots; ++k) {
    cdouble* x = batch.samples.data() + static_cast<std::size_t>(k) * n;
    const double chip = rng.coin() ? signal_amp : -signal_amp;
    for (int i = 0; i < n; ++i) x[i] = a_g[i] * chip;
    for (const auto& jam : jammers) {
      rng.normal_pair(g0, g1);
      const cdouble u(jam.sigma * g0, jam.sigma * g1);
      for (int i = 0; i < n; ++i) x[i] += jam.steering[i] * u;
    }
    for (int i = 0; i < n; ++i) {
      rng.normal_pair(g0, g1);
      x[i] += cdouble(noise_sigma * g0, noise_sigma * g1);
    }
  }
  return batch;
}

HermitianMatrix sample_covariance(const SnapshotBatch& batch) {
  const auto n = static_cast<std::size_t>(batch.n);
  if (batch.k < 1) throw InvalidArgument("sample_covariance: need at least one snapshot");
  if (batch.samples.size() != n * static_cast<std::size_t>(batch.k)) {
    throw DimensionError("sample_covariance: sample buffer does not match N x K");
  }
  std::vector<cdouble> acc(n * n);
  for (int k = 0; k < batch.k; ++k) {
    const cdouble* x = batch.samples.data() + static_cast<std::size_t>(k) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const cdouble xi = x[i];
      for (std::size_t j = i; j < n; ++j) acc[i * n + j] += xi * std::conj(x[j]);
    }
  }
  const double inv_k = 1.0 / batch.k;
  for (std::size_t i = 0; i < n; ++i) {
    acc[i * n + i] = cdouble(acc[i * n + i].real() * inv_k, 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      acc[i * n + j] *= inv_k;
      acc[j * n + i] = std::conj(acc[i * n + j]);
    }
  }
  return hermitian_from_trusted(n, std::move(acc));
}

Scenario random_scenario(const ScenarioDistribution& dist, std::uint64_t seed) {
  dist.validate();
  Rng rng(seed);
  Scenario sc;
  sc.sat_dir = Direction(rng.uniform(dist.sat_azimuth_deg.lo, dist.sat_azimuth_deg.hi),
                         rng.uniform(dist.sat_elevation_deg.lo, dist.sat_elevation_deg.hi));
  sc.snr_db = rng.uniform(dist.snr_db.lo, dist.snr_db.hi);
  sc.snapshots = dist.snapshots;
  for (int m = 0; m < dist.n_jammers; ++m) {
    const double el = rng.uniform(dist.jammer_elevation_deg.lo, dist.jammer_elevation_deg.hi);
    Direction dir;
    bool placed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      dir = Direction(rng.uniform(dist.jammer_azimuth_deg.lo, dist.jammer_azimuth_deg.hi), el);
      if (angular_separation_deg(dir, sc.sat_dir) >= dist.min_separation_deg) {
        placed = true;
        break;
      }
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "random_scenario: could not place jammer " << m << " at least "
          << dist.min_separation_deg << " deg from the satellite after 100 azimuth redraws";
      throw InvalidArgument(msg.str());
    }
    sc.jammer_dirs.push_back(dir);
    sc.js_db_per_jammer.push_back(rng.uniform(dist.js_db.lo, dist.js_db.hi));
  }
  sc.seed = rng();
  return sc;
}

void to_json(nlohmann::json& j, const Direction& d) {
  j = {{"azimuth_deg", d.azimuth_deg()}, {"elevation_deg", d.elevation_deg()}};
}

void from_json(const nlohmann::json& j, Direction& d) {
  d = Direction(j.at("azimuth_deg").get<double>(), j.at("elevation_deg").get<double>());
}

void to_json(nlohmann::json& j, const Interval& v) { j = nlohmann::json::array({v.lo, v.hi}); }

void from_json(const nlohmann::json& j, Interval& v) {
  if (!j.is_array() || j.size() != 2) throw FormatError("interval must be a [lo, hi] array");
  v = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(nlohmann::json& j, const Scenario& sc) {
  j = {{"sat_dir", sc.sat_dir},   {"jammer_dirs", sc.jammer_dirs},
       {"snr_db", sc.snr_db},     {"js_db_per_jammer", sc.js_db_per_jammer},
       {"snapshots", sc.snapshots}, {"seed", sc.seed}};
}

void from_json(const nlohmann::json& j, Scenario& sc) {
  sc.sat_dir = j.at("sat_dir").get<Direction>();
  sc.jammer_dirs = j.at("jammer_dirs").get<std::vector<Direction>>();
  sc.snr_db = j.at("snr_db").get<double>();
  sc.js_db_per_jammer = j.at("js_db_per_jammer").get<std::vector<double>>();
  sc.snapshots = j.at("snapshots").get<int>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.validate();
}

void to_json(nlohmann::json& j, const ScenarioDistribution& d) {
  j = {{"sat_azimuth_deg", d.sat_azimuth_deg},
       {"sat_elevation_deg", d.sat_elevation_deg},
       {"jammer_azimuth_deg", d.jammer_azimuth_deg},
       {"jammer_elevation_deg", d.jammer_elevation_deg},
       {"js_db", d.js_db},
       {"snr_db", d.snr_db},
       {"n_jammers", d.n_jammers},
       {"snapshots", d.snapshots},
       {"min_separation_deg", d.min_separation_deg}};
}

void from_json(const nlohmann::json& j, ScenarioDistribution& d) {
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("sat_azimuth_deg", d.sat_azimuth_deg);
  take("sat_elevation_deg", d.sat_elevation_deg);
  take("jammer_azimuth_deg", d.jammer_azimuth_deg);
  take("jammer_elevation_deg", d.jammer_elevation_deg);
  take("js_db", d.js_db);
  take("snr_db", d.snr_db);
  take("n_jammers", d.n_jammers);
  take("snapshots", d.snapshots);
  take("min_separation_deg", d.min_separation_deg);
  d.validate();
}

}  // namespace qpskbf
