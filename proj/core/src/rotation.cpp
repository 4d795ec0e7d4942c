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

#include "annulab/rotation.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include "annulab/errors.hpp"

namespace annulab {

RotationEstimate rotation_estimate(const LiftMap& m, LiftPoint p, long N, double tol) {
  if (N < 10) throw BadParameter("rotation estimate needs N >= 10");
  RotationEstimate est;
  est.horizon = N;
  est.liminf_est = std::numeric_limits<double>::infinity();
  est.limsup_est = -std::numeric_limits<double>::infinity();
  const long tail_start = N / 2;
  LiftPoint z = p;
  for (long n = 1; n <= N; ++n) {
    z = iterate(m, z, 1);
    if (n >= tail_start) {
      const double rate = (z.x - p.x) / static_cast<double>(n);
      est.liminf_est = std::min(est.liminf_est, rate);
      est.limsup_est = std::max(est.limsup_est, rate);
    }
  }
  est.mean = (z.x - p.x) / static_cast<double>(N);
  est.converged = est.limsup_est - est.liminf_est < tol;
  return est;
}

RotationInterval rotation_interval(const LiftMap& m, std::span<const LiftPoint> points, long N) {
  if (points.empty()) throw BadParameter("rotation interval needs a nonempty sample");
  RotationInterval hull{std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
  for (const LiftPoint& p : points) {
    const RotationEstimate est = rotation_estimate(m, p, N);
    hull.lo = std::min(hull.lo, est.liminf_est);
    hull.hi = std::max(hull.hi, est.limsup_est);
  }
  return hull;
}

void write_rotation_csv(std::ostream& out, const LiftMap& m, LiftPoint p, long N) {
  out << "n,rate\n" << std::setprecision(17);
  LiftPoint z = p;
  for (long n = 1; n <= N; ++n) {
    z = iterate(m, z, 1);
    out << n << ',' << (z.x - p.x) / static_cast<double>(n) << '\n';
  }
}

}  // namespace annulab
