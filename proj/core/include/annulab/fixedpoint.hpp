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

// Zeros of the displacement field D(z) = f~(z) - z over a fundamental
// domain, their indices, and the drift trichotomy for lifts without
// (or with) fixed points.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/box.hpp"
#include "annulab/boxdyn.hpp"
#include "annulab/lift.hpp"
#include "annulab/rotation.hpp"

namespace annulab {

/// Winding number of D along the boundary of `cell`, counterclockwise.
/// Each boundary side starts with 8 segments; a segment is halved while its
/// angle increment reaches pi/2. Raises BoundaryZero if |D| < 1e-10 at any
/// evaluated boundary point.
int fixed_point_index(const LiftMap& m, const Box& cell);

struct FixedPointRecord {
  LiftPoint point;   // x normalized to [0, 1)
  int index = 0;
  double residual = 0.0;
  Box cell;          // index cell centered on the point

  friend bool operator==(const FixedPointRecord&, const FixedPointRecord&) = default;
};

/// A connected run of fixed cells too large to be an isolated zero, e.g. a
/// circle of fixed points. No index is attached.
struct FixedCurve {
  std::vector<Box> cells;
  std::vector<LiftPoint> points;  // converged representatives, residual < tol
  double max_residual = 0.0;
};

struct FixedPointOptions {
  YBand region{0.05, 0.95};
  double tol = 1e-10;
  int max_depth = 7;
  /// Side of the square index cell; <= 0 means 2^-max_depth.
  double index_cell = 0.0;
};

struct FixedPointSearch {
  std::vector<FixedPointRecord> points;  // sorted by (x, y)
  std::vector<FixedCurve> curves;
  /// Min of |D| over the centers of the finest cells.
  double min_displacement = 0.0;
  std::size_t cells_examined = 0;

  bool empty() const { return points.empty() && curves.empty(); }
};

/// Subdivides [0, 1) x region, discarding a cell when min |D| over its 3x3
/// samples exceeds twice the sampled Lipschitz bound times the covering
/// radius. Surviving finest cells are clustered (8-adjacency, x periodic);
/// each cluster is refined by damped Gauss-Newton from its cells. Clusters
/// spanning >= 1/4 in x or y, or with more than 64 cells, are reported as
/// curves.
FixedPointSearch find_fixed_points(const LiftMap& m, const FixedPointOptions& opts = {});

/// Sum of indices of the records whose point lies in the band. Raises
/// OverlapError when two index cells overlap on the annulus.
int lefschetz_sum(std::span<const FixedPointRecord> records, YBand region);

struct PeriodicOrbitRecord {
  LiftPoint point;
  long p = 0;
  long q = 1;
  int index = 0;
  double residual = 0.0;  // |T^-p f~^q (z) - z|
  Box cell;
  bool on_curve = false;
  /// Rotation estimate of the point under f~, and whether it brackets p/q.
  RotationEstimate rotation;
  bool rotation_consistent = false;
};

struct PeriodicSearch {
  std::vector<PeriodicOrbitRecord> orbits;
  double min_displacement = 0.0;
};

/// Fixed points of g~ = T^-p o f~^q. p/q is used as given (not reduced).
/// Points on fixed curves of g~ are included with on_curve = true.
PeriodicSearch find_periodic_orbit(const LiftMap& m, long p, long q,
                                   const FixedPointOptions& opts = {});

enum class DriftTag { to_plus_infinity, to_minus_infinity, converges_to_fixed, unclassified };

const char* to_string(DriftTag t);

struct DriftSample {
  LiftPoint start;
  DriftTag tag = DriftTag::unclassified;
  LiftPoint end;  // f~^N(start); the limit point for converges_to_fixed
  double tail_advance = 0.0;  // x_N - x_{N/2}
};

enum class DriftVerdict {
  uniform_positive,
  uniform_negative,
  fixed_points_attract,  // some orbit converges to a fixed point
  mixed_signs,           // contradicts same-sign drift if Fix is empty
  inconclusive,          // some sample unclassified
};

const char* to_string(DriftVerdict v);

struct DriftOptions {
  long N = 2000;
  double escape = 3.0;  // X: required tail advance in turns
  double tol = 1e-10;   // convergence threshold is 10 tol
  /// Whether a fixed-point search found Fix(f~) empty, if known.
  std::optional<bool> fix_empty;
};

struct DriftClass {
  std::vector<DriftSample> samples;
  DriftVerdict verdict = DriftVerdict::inconclusive;
  /// Same-sign clause: with Fix empty all tags must agree in sign.
  bool same_sign_clause_holds = true;
};

/// Tags each sample. Raises PreconditionFailed unless `window` verifies.
DriftClass drift_classification(const LiftMap& m, std::span<const LiftPoint> points,
                                 const WindowReport& window, const DriftOptions& opts = {});

void to_json(nlohmann::json& j, const FixedPointRecord& r);
void from_json(const nlohmann::json& j, FixedPointRecord& r);
void to_json(nlohmann::json& j, const FixedCurve& c);
void to_json(nlohmann::json& j, const PeriodicOrbitRecord& r);
void from_json(const nlohmann::json& j, PeriodicOrbitRecord& r);

}  // namespace annulab
