// Copyright 2026 The annulab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Annulus A = (R/Z) x I, its universal cover R x I, and lifts of annulus
// homeomorphisms homotopic to the identity.
//
// Lift coordinates are measured in turns and are never wrapped, so the net
// horizontal translation of an orbit stays observable.

#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace annulab {

struct LiftPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const LiftPoint&, const LiftPoint&) = default;
};

inline LiftPoint operator+(LiftPoint a, LiftPoint b) { return {a.x + b.x, a.y + b.y}; }
inline LiftPoint operator-(LiftPoint a, LiftPoint b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(LiftPoint d) { return std::hypot(d.x, d.y); }

/// Deck translation T^k (x, y) = (x + k, y).
inline LiftPoint translate(LiftPoint p, double k) { return {p.x + k, p.y}; }

struct AnnulusPoint {
  double theta = 0.0;  // turns, in [0, 1)
  double y = 0.0;

  friend bool operator==(const AnnulusPoint&, const AnnulusPoint&) = default;
};

/// Reduces a lift coordinate into [0, 1).
double wrap_turns(double x);

AnnulusPoint project(const LiftPoint& p);

/// The lift of `a` lying in the fundamental domain [0, 1) x I.
inline LiftPoint lift_of(const AnnulusPoint& a) { return {a.theta, a.y}; }

enum class ChartKind { open, closed };

struct ChartSpec {
  ChartKind kind = ChartKind::open;
  // Numerical slack beyond the fiber [0, 1] tolerated before FiberEscape.
  double margin = 1e-3;

  void validate() const;
  bool admits(double y) const;

  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

/// Serializable description of a map: registry name, real parameters, chart.
struct MapSpec {
  std::string name;
  std::map<std::string, double> params;
  ChartSpec chart;

  double param(const std::string& key) const;
  double param(const std::string& key, double fallback) const;
  bool has(const std::string& key) const { return params.count(key) != 0; }

  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

/// Points serialize as [x, y].
void to_json(nlohmann::json& j, const LiftPoint& p);
void from_json(const nlohmann::json& j, LiftPoint& p);
void to_json(nlohmann::json& j, const ChartSpec& c);
void from_json(const nlohmann::json& j, ChartSpec& c);
void to_json(nlohmann::json& j, const MapSpec& s);
void from_json(const nlohmann::json& j, MapSpec& s);

enum class Exactness { closed_form, integrated };

using PlaneFn = std::function<LiftPoint(const LiftPoint&)>;

/// An annulus homeomorphism given by its lift f~ : R x I -> R x I.
///
/// The forward map must satisfy f~(x + 1, y) = f~(x, y) + (1, 0). The
/// inverse is optional; iterating backwards without one raises
/// MissingInverse.
class LiftMap {
 public:
  LiftMap(MapSpec spec, PlaneFn forward, PlaneFn inverse = {},
          Exactness exactness = Exactness::closed_form, double step = 0.0);

  const MapSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }
  const ChartSpec& chart() const noexcept { return spec_.chart; }
  Exactness exactness() const noexcept { return exactness_; }
  /// Integration step for time-one maps, 0 for closed forms.
  double step() const noexcept { return step_; }
  bool has_inverse() const noexcept { return static_cast<bool>(inverse_); }

  /// Equivariance / round-trip tolerance matching the exactness tag.
  double tolerance() const noexcept {
    return exactness_ == Exactness::closed_form ? 1e-9 : 1e-6;
  }

  LiftPoint operator()(const LiftPoint& p) const { return forward_(p); }
  LiftPoint inverse(const LiftPoint& p) const;

 private:
  MapSpec spec_;
  PlaneFn forward_;
  PlaneFn inverse_;
  Exactness exactness_;
  double step_;
};

/// n-fold composition of the lift (negative n uses the inverse). Raises
/// FiberEscape when the fiber coordinate leaves the chart by more than its
/// margin, MissingInverse for n < 0 without an inverse.
LiftPoint iterate(const LiftMap& m, LiftPoint p, long n);

/// The lift T^k o f~. Its MapSpec carries `deck_shift` so it can be rebuilt.
LiftMap compose_translation(const LiftMap& m, long k);

/// g~ = T^{-p} o f~^q, whose fixed points are the (p, q) periodic points of
/// f~. Its MapSpec carries `return_p` / `return_q`.
LiftMap return_map(const LiftMap& m, long p, long q);

struct EquivarianceReport {
  double max_defect = 0.0;
  int samples_used = 0;
  bool pass = false;
};

/// Max over quasi-random samples of |f~(x + 1, y) - f~(x, y) - (1, 0)|.
/// Samples where the map is undefined (partial maps) are skipped.
EquivarianceReport check_equivariance(const LiftMap& m, int samples, double tol);

/// Writes the orbit as CSV with header `n,x,y`, n = 0..steps.
void write_orbit_csv(std::ostream& out, const LiftMap& m, LiftPoint p, long steps);

}  // namespace annulab
