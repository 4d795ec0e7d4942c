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

// Billiards in strictly convex tables. The boundary is traversed
// counterclockwise by a parameter s in [0, 1); for the ellipse this is the
// angle parameter (a cos 2 pi s, b sin 2 pi s), not arc length. A state is
// (s, theta) with theta in (0, pi) the angle between the outgoing chord and
// the boundary tangent.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/lift.hpp"

namespace annulab {

struct TableSpec {
  enum class Kind { circle, ellipse };
  Kind kind = Kind::circle;
  double a = 1.0;  // radius for circles, semi-major axis for ellipses
  double b = 1.0;

  static TableSpec circle(double radius) { return {Kind::circle, radius, radius}; }
  static TableSpec ellipse(double a, double b) { return {Kind::ellipse, a, b}; }

  void validate() const;
  LiftPoint boundary(double s) const;
  /// d(boundary)/ds.
  LiftPoint tangent(double s) const;
};

struct BilliardState {
  double s = 0.0;
  double theta = 0.0;
};

/// Next collision. Circles use the closed form (s + theta/pi mod 1, theta).
/// Raises DegenerateChord when the chord solver cannot bracket the next hit.
BilliardState billiard_step(const TableSpec& table, const BilliardState& st);

/// Advance of the boundary parameter along the chord, in (0, 1).
double billiard_advance(const TableSpec& table, const BilliardState& st);

/// | |det J| - 1 | for the central-difference Jacobian of the billiard map in
/// the area coordinates (l, -cos theta), l the normalized arc length. The
/// Jacobian is differenced in (s, -cos theta) and converted with the speed
/// ratio |gamma'(s')| / |gamma'(s)|, which is exact for the change s -> l.
double billiard_area_defect(const TableSpec& table, const BilliardState& st, double h);

struct Bumper {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

/// Raises BadParameter unless every bumper lies strictly inside the table.
void validate_bumpers(const TableSpec& table, std::span<const Bumper> bumpers);

struct AvoidanceCertificate {
  BilliardState initial;
  int steps = 0;
  /// Per chord: min over bumpers of (distance from chord to center - radius).
  std::vector<double> min_distance;
  double overall_min = 0.0;
};

/// Scans initial states (s on a uniform grid of `s_samples`, theta from
/// `theta_grid`) and returns the first whose first `steps` chords avoid every
/// bumper. Empty optional means not found at this scale.
std::optional<AvoidanceCertificate> bumper_avoidance_search(const TableSpec& table,
                                                            std::span<const Bumper> bumpers,
                                                            std::span<const double> theta_grid,
                                                            int steps, int s_samples = 16);

/// Recomputes the certificate's chords; true iff all distances are positive
/// and agree with the recorded ones.
bool verify_avoidance(const TableSpec& table, std::span<const Bumper> bumpers,
                      const AvoidanceCertificate& cert);

/// The billiard map in the annulus chart (s, theta/pi) as a lift: x advances
/// by the chord's boundary-parameter advance.
LiftMap billiard_lift_map(const TableSpec& table);

MapSpec billiard_spec(const TableSpec& table);
TableSpec table_from_spec(const MapSpec& spec);

void to_json(nlohmann::json& j, const TableSpec& t);
void from_json(const nlohmann::json& j, TableSpec& t);
void to_json(nlohmann::json& j, const Bumper& b);
void from_json(const nlohmann::json& j, Bumper& b);

}  // namespace annulab
