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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpskbf/linalg.hpp"

namespace qpskbf {

/// Arrival direction. Azimuth is wrapped into [0, 360); elevation must lie in [0, 90].
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth_deg, double elevation_deg);

  double azimuth_deg() const { return azimuth_deg_; }
  double elevation_deg() const { return elevation_deg_; }

  /// Unit propagation-direction vector (cos el cos az, cos el sin az, sin el).
  std::array<double, 3> unit_vector() const;

  bool operator==(const Direction&) const = default;

 private:
  double azimuth_deg_ = 0.0;
  double elevation_deg_ = 90.0;
};

/// Great-circle angle between two directions, degrees.
double angular_separation_deg(const Direction& a, const Direction& b);

/// Element positions in wavelengths.
struct ArrayGeometry {
  std::string kind;
  std::vector<std::array<double, 3>> positions;

  std::size_t size() const { return positions.size(); }
};

/// N elements on a circle in the z = 0 plane with adjacent chord of half a
/// wavelength; element i sits at angle 2*pi*i/N.
ArrayGeometry uca_geometry(int n_elements);

/// Entry i = exp(+j 2 pi <p_i, u(dir)>).
ComplexVector steering_vector(const ArrayGeometry& geom, const Direction& dir);

struct Scenario {
  Direction sat_dir;
  std::vector<Direction> jammer_dirs;
  double snr_db = -30.0;
  std::vector<double> js_db_per_jammer;
  int snapshots = 4096;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on broken invariants; `n_elements` > 0 also checks K >= N.
  void validate(int n_elements = 0) const;
  bool operator==(const Scenario&) const = default;
};

/// Closed interval [lo, hi]; serialized as a two-element JSON array.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Ranges for Monte-Carlo scenario draws.
struct ScenarioDistribution {
  Interval sat_azimuth_deg{0.0, 360.0};
  Interval sat_elevation_deg{15.0, 90.0};
  Interval jammer_azimuth_deg{0.0, 360.0};
  Interval jammer_elevation_deg{0.0, 30.0};
  Interval js_db{30.0, 70.0};
  Interval snr_db{-30.0, -25.0};
  int n_jammers = 1;
  int snapshots = 4096;
  double min_separation_deg = 10.0;

  void validate() const;
  bool operator==(const ScenarioDistribution&) const = default;
};

/// K snapshots of N channels, stored snapshot-major.
struct SnapshotBatch {
  int n = 0;
  int k = 0;
  std::vector<cdouble> samples;

  std::span<const cdouble> snapshot(int index) const {
    return {samples.data() + static_cast<std::size_t>(index) * n, static_cast<std::size_t>(n)};
  }
};

/// Jammer (or desired) terms with power at or below this many dB are omitted.
inline constexpr double kOmitPowerDb = -300.0;

/// x[k] = a_g s[k] + sum_m a_m u_m[k] + n[k] with unit noise power per element,
/// BPSK chips of power 10^(snr/10) and complex Gaussian jammers of power
/// 10^((snr + js_m)/10). Draw order per snapshot: chip, jammers, noise.
SnapshotBatch synthesize_snapshots(const ArrayGeometry& geom, const Scenario& sc);

/// (1/K) sum_k x[k] x[k]^H
HermitianMatrix sample_covariance(const SnapshotBatch& batch);

/// Uniform independent draws per field. Jammer azimuths are redrawn up to 100
/// times to keep every jammer at least min_separation_deg from the satellite.
Scenario random_scenario(const ScenarioDistribution& dist, std::uint64_t seed);

void to_json(nlohmann::json& j, const Direction& d);
void from_json(const nlohmann::json& j, Direction& d);
void to_json(nlohmann::json& j, const Interval& v);
void from_json(const nlohmann::json& j, Interval& v);
void to_json(nlohmann::json& j, const Scenario& sc);
void from_json(const nlohmann::json& j, Scenario& sc);
void to_json(nlohmann::json& j, const ScenarioDistribution& d);
// Keys absent from `j` keep their current values.
void from_json(const nlohmann::json& j, ScenarioDistribution& d);

}  // namespace qpskbf
