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

#pragma once

#include <iosfwd>
#include <span>

#include "annulab/lift.hpp"

namespace annulab {

/// Finite-horizon rotation number of a lift orbit.
///
/// `mean` is (f~^N(p) - p)_1 / N. The bracket is the min / max of
/// (f~^n(p) - p)_1 / n over the tail window n in [N/2, N], so transients are
/// not counted against convergence.
struct RotationEstimate {
  long horizon = 0;
  double mean = 0.0;
  double liminf_est = 0.0;
  double limsup_est = 0.0;
  bool converged = false;

  bool brackets(double value, double slack) const {
    return liminf_est - slack <= value && value <= limsup_est + slack;
  }
};

/// Requires N >= 10. `tol` is the bracket width below which the estimate is
/// flagged converged. Propagates FiberEscape.
RotationEstimate rotation_estimate(const LiftMap& m, LiftPoint p, long N, double tol = 1e-6);

struct RotationInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Hull [min liminf_est, max limsup_est] over a nonempty sample.
RotationInterval rotation_interval(const LiftMap& m, std::span<const LiftPoint> points, long N);

/// CSV with header `n,rate`, rate = (f~^n(p) - p)_1 / n for n = 1..N.
void write_rotation_csv(std::ostream& out, const LiftMap& m, LiftPoint p, long N);

}  // namespace annulab
