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

#include "qpskbf/beamformers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpskbf/errors.hpp"
#include "qpskbf/rng.hpp"

namespace qpskbf {
namespace {

// Symbol index of j * dict(s).
constexpr std::array<std::uint8_t, 4> kQuarterTurn{2, 0, 3, 1};

void check_dims(const HermitianMatrix& r, const ComplexVector& a_g, std::size_t n, const char* what) {
  if (r.order() != a_g.size() || r.order() != n) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (R order " << r.order() << ", steering length "
        << a_g.size() << ", weights " << n << ")";
    throw DimensionError(msg.str());
  }
}

// Objective of a symbol list, using `w` as scratch. Every exact objective in
// this file is computed here.
double score(std::span<const std::uint8_t> symbols, const HermitianMatrix& r,
             const ComplexVector& a_g, const ObjectiveParams& p, std::vector<cdouble>& w) {
  const std::size_t n = symbols.size();
  const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  w.resize(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = kQpskDictionary[symbols[i]] * c;
  return objective(w, r, a_g, p);
}

std::uint64_t encode(std::span<const std::uint8_t> symbols) {
  std::uint64_t code = 0;
  for (auto s : symbols) code = code * 4 + s;
  return code;
}

std::vector<std::uint8_t> decode(std::uint64_t code, std::size_t n) {
  std::vector<std::uint8_t> symbols(n);
  for (std::size_t i = n; i-- > 0;) {
    symbols[i] = static_cast<std::uint8_t>(code & 3U);
    code >>= 2;
  }
  return symbols;
}

// Running state of the unnormalized weights d (w = d / sqrt(2N)):
// z = d^H a_g, y = R d, q = d^H R d.
class IncrementalState {
 public:
  IncrementalState(const HermitianMatrix& r, const ComplexVector& a_g, const ObjectiveParams& p,
                   std::vector<std::uint8_t> symbols)
      : r_(r), a_(a_g), alpha_(p.alpha), symbols_(std::move(symbols)), y_(symbols_.size()) {
    refresh();
  }

  void refresh() {
    const std::size_t n = symbols_.size();
    z_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) z_ += std::conj(kQpskDictionary[symbols_[i]]) * a_[i];
    q_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cdouble s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += r_(i, j) * kQpskDictionary[symbols_[j]];
      y_[i] = s;
      q_ += (std::conj(kQpskDictionary[symbols_[i]]) * s).real();
    }
  }

  // Unnormalized objective alpha |z|^2 - (1 - alpha) q.
  double value() const { return alpha_ * std::norm(z_) - (1.0 - alpha_) * q_; }

  void set(std::size_t i, std::uint8_t symbol) {
    const cdouble delta = kQpskDictionary[symbol] - kQpskDictionary[symbols_[i]];
    z_ += std::conj(delta) * a_[i];
    q_ += 2.0 * (std::conj(delta) * y_[i]).real() + std::norm(delta) * r_(i, i).real();
    for (std::size_t k = 0; k < y_.size(); ++k) y_[k] += r_(k, i) * delta;
    symbols_[i] = symbol;
  }

  std::span<const std::uint8_t> symbols() const { return symbols_; }

 private:
  const HermitianMatrix& r_;
  const ComplexVector& a_;
  double alpha_;
  std::vector<std::uint8_t> symbols_;
  std::vector<cdouble> y_;
  cdouble z_;
  double q_ = 0.0;
};

}  // namespace

std::uint8_t rotate_symbol(std::uint8_t symbol, int quarter_turns) {
  if (symbol > 3) throw InvalidArgument("rotate_symbol: symbol out of range");
  int k = ((quarter_turns % 4) + 4) % 4;
  while (k-- > 0) symbol = kQuarterTurn[symbol];
  return symbol;
}

QpskWeights::QpskWeights(std::vector<std::uint8_t> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2) throw InvalidArgument("QpskWeights: need at least 2 symbols");
  for (auto s : symbols_) {
    if (s > 3) throw InvalidArgument("QpskWeights: symbol " + std::to_string(s) + " outside {0,1,2,3}");
  }
}

QpskWeights QpskWeights::rotated(int quarter_turns) const {
  std::vector<std::uint8_t> out(symbols_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rotate_symbol(symbols_[i], quarter_turns);
  return QpskWeights(std::move(out));
}

QpskWeights QpskWeights::canonical() const {
  for (int k = 0; k < 4; ++k) {
    if (rotate_symbol(symbols_[0], k) == 0) return rotated(k);
  }
  return *this;  // unreachable: the rotation group acts transitively
}

void ObjectiveParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("ObjectiveParams: alpha must lie in [0, 1]");
  if (!(loading_scale >= 0.0) || !std::isfinite(loading_scale)) {
    throw InvalidArgument("ObjectiveParams: loading_scale must be finite and >= 0");
  }
}

ComplexVector to_complex(const QpskWeights& s) {
  const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(s.size()));
  std::vector<cdouble> w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w[i] = kQpskDictionary[s[i]] * c;
  return ComplexVector(std::move(w));
}

double objective(std::span<const cdouble> w, const HermitianMatrix& r, const ComplexVector& a_g,
                 const ObjectiveParams& p) {
  if (w.size() != a_g.size()) throw DimensionError("objective: weight and steering lengths differ");
  const double gain = std::norm(inner(w, a_g.entries()));
  return p.alpha * gain - (1.0 - p.alpha) * quadratic_form(r, w);
}

double objective(const QpskWeights& s, const HermitianMatrix& r, const ComplexVector& a_g,
                 const ObjectiveParams& p) {
  check_dims(r, a_g, s.size(), "objective");
  std::vector<cdouble> scratch;
  return score(s.symbols(), r, a_g, p, scratch);
}

ComplexVector capon_weights(const HermitianMatrix& r, const ComplexVector& a_g,
                            const ObjectiveParams& p) {
  check_dims(r, a_g, a_g.size(), "capon_weights");
  p.validate();
  const double epsilon = p.loading_scale * r.trace() / static_cast<double>(r.order());
  const ComplexVector x = loaded_solve(r, a_g, epsilon);
  const cdouble denom = inner(a_g.entries(), x.entries());
  if (std::abs(denom) == 0.0) throw SingularMatrixError("capon_weights: a_g^H R^-1 a_g vanished");
  std::vector<cdouble> w(x.begin(), x.end());
  for (auto& v : w) v /= denom;
  return ComplexVector(std::move(w));
}

QpskWeights naive_quantize(std::span<const cdouble> w) {
  std::vector<std::uint8_t> symbols(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool re_neg = w[i].real() < 0.0;
    const bool im_neg = w[i].imag() < 0.0;
    symbols[i] = static_cast<std::uint8_t>((re_neg ? 2 : 0) + (im_neg ? 1 : 0));
  }
  return QpskWeights(std::move(symbols));
}

std::uint64_t qpsk_space_size(int n_elements) {
  if (n_elements < 0 || n_elements > 31) throw InvalidArgument("qpsk_space_size: N out of range");
  return std::uint64_t{1} << (2 * n_elements);
}

QpskWeights oracle_search(const HermitianMatrix& r, const ComplexVector& a_g,
                          const ObjectiveParams& p) {
  const std::size_t n = a_g.size();
  check_dims(r, a_g, n, "oracle_search");
  if (n > static_cast<std::size_t>(kOracleMaxElements)) {
    std::ostringstream msg;
    msg << "oracle_search: refusing exhaustive search for N = " << n << " (4^(N-1) = "
        << qpsk_space_size(static_cast<int>(n) - 1) << " canonical candidates; limit N <= "
        << kOracleMaxElements << ")";
    throw OracleTooLargeError(msg.str());
  }
  if (n < 2) throw InvalidArgument("oracle_search: need N >= 2");
  p.validate();

  // Magnitude of the unnormalized terms, for the round-off window.
  double r_abs = 0.0;
  for (const auto& v : r.row_major()) r_abs += std::abs(v);
  double a_abs = 0.0;
  for (const auto& v : a_g) a_abs += std::abs(v);
  const double scale = 2.0 * (p.alpha * 2.0 * a_abs * a_abs + (1.0 - p.alpha) * 2.0 * r_abs);
  const double window = 1e-10 * scale;

  IncrementalState state(r, a_g, p, std::vector<std::uint8_t>(n, 0));
  std::vector<std::pair<double, std::uint64_t>> near_best;
  double best = state.value();
  near_best.emplace_back(best, encode(state.symbols()));

  // Base-4 reflected Gray walk over symbols[1..n-1]; digit 0 is the last antenna.
  const std::size_t digits = n - 1;
  std::vector<int> direction(digits, 1);
  const std::uint64_t steps = qpsk_space_size(static_cast<int>(digits)) - 1;
  constexpr std::uint64_t kRefreshPeriod = 256;
  for (std::uint64_t step = 1; step <= steps; ++step) {
    std::size_t d = 0;
    for (;; ++d) {
      const std::size_t idx = n - 1 - d;
      const int next = state.symbols()[idx] + direction[d];
      if (next >= 0 && next <= 3) {
        state.set(idx, static_cast<std::uint8_t>(next));
        break;
      }
      direction[d] = -direction[d];
    }
    if (step % kRefreshPeriod == 0) state.refresh();
    const double v = state.value();
    if (v > best) best = v;
    if (v >= best - window) {
      near_best.emplace_back(v, encode(state.symbols()));
      if (near_best.size() > 256) {
        std::erase_if(near_best, [&](const auto& e) { return e.first < best - window; });
      }
    }
  }
  std::erase_if(near_best, [&](const auto& e) { return e.first < best - window; });

  // Exact re-scoring of the survivors; ascending codes so the first of a tie wins.
  std::sort(near_best.begin(), near_best.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
  std::vector<cdouble> scratch;
  const double tie = 1e-14 * scale;
  double best_exact = -std::numeric_limits<double>::infinity();
  std::uint64_t best_code = 0;
  for (const auto& entry : near_best) {
    const double v = score(decode(entry.second, n), r, a_g, p, scratch);
    if (v > best_exact + tie) {
      best_exact = v;
      best_code = entry.second;
    }
  }
  return QpskWeights(decode(best_code, n));
}

QpskWeights greedy_sample(const HermitianMatrix& r, const ComplexVector& a_g,
                          const ObjectiveParams& p, int n_samples, std::uint64_t seed) {
  const std::size_t n = a_g.size();
  check_dims(r, a_g, n, "greedy_sample");
  if (n_samples < 1) throw InvalidArgument("greedy_sample: n_samples must be >= 1");
  Rng rng(seed);
  std::vector<std::uint8_t> candidate(n);
  std::vector<std::uint8_t> best_symbols;
  double best = 0.0;
  std::vector<cdouble> scratch;
  for (int s = 0; s < n_samples; ++s) {
    for (auto& sym : candidate) sym = static_cast<std::uint8_t>(rng.quaternary());
    const double v = score(candidate, r, a_g, p, scratch);
    if (best_symbols.empty() || v > best) {
      best = v;
      best_symbols = candidate;
    }
  }
  return QpskWeights(std::move(best_symbols));
}

QpskWeights coordinate_descent(const QpskWeights& init, const HermitianMatrix& r,
                               const ComplexVector& a_g, const ObjectiveParams& p,
                               int max_sweeps, DescentStats* stats) {
  const std::size_t n = init.size();
  check_dims(r, a_g, n, "coordinate_descent");
  if (max_sweeps < 1) throw InvalidArgument("coordinate_descent: max_sweeps must be >= 1");

  std::vector<std::uint8_t> symbols(init.symbols().begin(), init.symbols().end());
  std::vector<cdouble> scratch;
  double current = score(symbols, r, a_g, p, scratch);
  DescentStats local;
  local.evaluations = 1;
  if (stats != nullptr) local.trajectory.push_back(current);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    ++local.sweeps;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t incumbent = symbols[i];
      std::uint8_t best_symbol = incumbent;
      double best_value = current;
      for (std::uint8_t q = 0; q < 4; ++q) {
        if (q == incumbent) continue;
        symbols[i] = q;
        const double v = score(symbols, r, a_g, p, scratch);
        ++local.evaluations;
        if (v > best_value + kStrictImprovement) {
          best_value = v;
          best_symbol = q;
        }
      }
      symbols[i] = best_symbol;
      if (best_symbol != incumbent) {
        current = best_value;
        changed = true;
        if (stats != nullptr) local.trajectory.push_back(current);
      }
    }
    if (!changed) {
      local.converged = true;
      break;
    }
  }
  if (stats != nullptr) *stats = std::move(local);
  return QpskWeights(std::move(symbols));
}

void to_json(nlohmann::json& j, const ObjectiveParams& p) {
  j = {{"alpha", p.alpha}, {"loading_scale", p.loading_scale}};
}

void from_json(const nlohmann::json& j, ObjectiveParams& p) {
  if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
  if (j.contains("loading_scale")) p.loading_scale = j.at("loading_scale").get<double>();
  p.validate();
}

}  // namespace qpskbf

qpskbf::QpskWeights nlohmann::adl_serializer<qpskbf::QpskWeights>::from_json(const json& j) {
  if (!j.is_array()) throw qpskbf::FormatError("QpskWeights: expected a JSON array of integers");
  std::vector<std::uint8_t> symbols;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw qpskbf::FormatError("QpskWeights: non-integer symbol");
    const auto s = v.get<long long>();
    if (s < 0 || s > 3) throw qpskbf::FormatError("QpskWeights: symbol outside {0,1,2,3}");
    symbols.push_back(static_cast<std::uint8_t>(s));
  }
  return qpskbf::QpskWeights(std::move(symbols));
}

void nlohmann::adl_serializer<qpskbf::QpskWeights>::to_json(json& j, const qpskbf::QpskWeights& s) {
  j = json::array();
  for (auto v : s.symbols()) j.push_back(static_cast<int>(v));
}
