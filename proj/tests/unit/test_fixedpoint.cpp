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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "annulab/errors.hpp"
#include "annulab/fixedpoint.hpp"
#include "annulab/registry.hpp"
#include "annulab/zoo.hpp"

using namespace annulab;

namespace {

// Independent degree oracle: signed crossings of the positive real axis by
// the displacement D(z) = f(z) - z as z runs counterclockwise around the
// cell boundary with `per_side` uniform steps.
int winding_oracle(const LiftMap& m, const Box& c, int per_side) {
  const LiftPoint corners[5] = {{c.x0, c.y0}, {c.x1, c.y0}, {c.x1, c.y1}, {c.x0, c.y1}, {c.x0, c.y0}};
  std::vector<LiftPoint> d;
  for (int side = 0; side < 4; ++side) {
    const LiftPoint a = corners[side];
    const LiftPoint b = corners[side + 1];
    for (int i = 0; i < per_side; ++i) {
      const double t = static_cast<double>(i) / per_side;
      const LiftPoint z{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      d.push_back(m(z) - z);
    }
  }
  int deg = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const LiftPoint p = d[i];
    const LiftPoint q = d[(i + 1) % d.size()];
    if ((p.y < 0.0) == (q.y < 0.0)) continue;
    const double x = p.x + (q.x - p.x) * (-p.y) / (q.y - p.y);
    if (x > 0.0) deg += q.y >= 0.0 ? 1 : -1;
  }
  return deg;
}

Box square(LiftPoint c, double r) { return {c.x - r, c.x + r, c.y - r, c.y + r}; }

WindowReport middle_window(const LiftMap& m, int d = 8) {
  return verify_window(m, band_boxes(BoxGrid(d, {0.0, 1.0}), {0.25, 0.75}));
}

std::vector<LiftPoint> samples(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(0.25, 0.75);
  std::vector<LiftPoint> pts;
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    pts.push_back({x, uy(rng)});
  }
  return pts;
}

}  // namespace

TEST_CASE("PT indices: node +1, saddle -1, confirmed by the winding oracle") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  for (double r : {0.05, 0.01}) {
    const Box node = square({0.5, 0.5}, r);
    const Box saddle = square({0.0, 0.5}, r);
    CHECK(fixed_point_index(m, node) == 1);
    CHECK(fixed_point_index(m, saddle) == -1);
    for (int per_side : {400, 1600}) {
      CHECK(winding_oracle(m, node, per_side) == 1);
      CHECK(winding_oracle(m, saddle, per_side) == -1);
    }
  }
}

TEST_CASE("IZ: the fixed point at (0, 1/2) has index zero") {
  const LiftMap m = build_map(zoo::iz(1.0));
  CHECK(norm(m({0.0, 0.5}) - LiftPoint{0.0, 0.5}) < 1e-9);
  for (double r : {0.05, 0.02}) {
    const Box cell = square({0.0, 0.5}, r);
    CHECK(fixed_point_index(m, cell) == 0);
    CHECK(winding_oracle(m, cell, 400) == 0);
    CHECK(winding_oracle(m, cell, 1600) == 0);
  }
}

TEST_CASE("index vanishes on zero-free cells and rejects boundary zeros") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  CHECK(fixed_point_index(m, {0.2, 0.3, 0.4, 0.6}) == 0);
  CHECK_THROWS_AS(fixed_point_index(m, {0.5, 0.6, 0.5, 0.6}), BoundaryZero);
  CHECK_THROWS_AS(fixed_point_index(m, {0.4, 0.6, 0.5, 0.6}), BoundaryZero);
}

TEST_CASE("index is additive over partitions avoiding zeros") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const Box whole{-0.1, 0.6, 0.4, 0.6};
  CHECK(fixed_point_index(m, whole) == 0);
  CHECK(fixed_point_index(m, {-0.1, 0.25, 0.4, 0.6}) + fixed_point_index(m, {0.25, 0.6, 0.4, 0.6}) ==
        0);
  // Four quadrants around the node, interfaces off the zero.
  const double sx = 0.47;
  const double sy = 0.53;
  const int sum = fixed_point_index(m, {0.4, sx, 0.4, sy}) + fixed_point_index(m, {sx, 0.6, 0.4, sy}) +
                  fixed_point_index(m, {0.4, sx, sy, 0.6}) + fixed_point_index(m, {sx, 0.6, sy, 0.6});
  CHECK(sum == fixed_point_index(m, {0.4, 0.6, 0.4, 0.6}));
  CHECK(sum == 1);
}

TEST_CASE("PT fixed points: exactly the saddle and the node") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const FixedPointSearch s = find_fixed_points(m);
  REQUIRE(s.points.size() == 2);
  CHECK(s.curves.empty());
  CHECK(std::abs(s.points[0].point.x) < 1e-9);
  CHECK(std::abs(s.points[0].point.y - 0.5) < 1e-9);
  CHECK(s.points[0].index == -1);
  CHECK(std::abs(s.points[1].point.x - 0.5) < 1e-9);
  CHECK(std::abs(s.points[1].point.y - 0.5) < 1e-9);
  CHECK(s.points[1].index == 1);
  for (const auto& p : s.points) {
    CHECK(p.residual < 1e-10);
    CHECK(norm(m(p.point) - p.point) < 1e-10);
    CHECK(winding_oracle(m, p.cell, 800) == p.index);
  }
  CHECK(lefschetz_sum(s.points, {0.0, 1.0}) == 0);
}

TEST_CASE("IZ: one fixed cell at 2^-7, index zero") {
  const LiftMap m = build_map(zoo::iz(1.0));
  FixedPointOptions o;
  o.max_depth = 7;
  const FixedPointSearch s = find_fixed_points(m, o);
  REQUIRE(s.points.size() == 1);
  CHECK(s.curves.empty());
  CHECK(s.points[0].index == 0);
  CHECK(std::abs(wrap_turns(s.points[0].point.x + 0.5) - 0.5) < 1e-4);
  CHECK(std::abs(s.points[0].point.y - 0.5) < 1e-4);
  CHECK(lefschetz_sum(s.points, {0.0, 1.0}) == 0);
}

TEST_CASE("RNF has no fixed point and a clear displacement gap") {
  const LiftMap m = build_map(zoo::rnf(0.05, 6.0, 0.9));
  const FixedPointSearch s = find_fixed_points(m);
  CHECK(s.empty());
  CHECK(s.min_displacement > 0.01);
  CHECK(lefschetz_sum(s.points, {0.0, 1.0}) == 0);
}

TEST_CASE("twist: the middle circle is a fixed curve without indices") {
  const LiftMap m = build_map(zoo::twist());
  const FixedPointSearch s = find_fixed_points(m);
  CHECK(s.points.empty());
  REQUIRE(s.curves.size() == 1);
  const FixedCurve& c = s.curves[0];
  CHECK(c.max_residual < 1e-10);
  for (const auto& cell : c.cells) {
    CHECK(cell.y0 <= 0.5 + 1e-12);
    CHECK(cell.y1 >= 0.5 - 1e-12);
  }
  for (const auto& p : c.points) {
    CHECK(std::abs(p.y - 0.5) < 1e-9);
    CHECK(norm(m(p) - p) < 1e-10);
  }
}

TEST_CASE("lefschetz_sum rejects overlapping cells and counts only the band") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const FixedPointSearch s = find_fixed_points(m);
  REQUIRE(s.points.size() == 2);
  std::vector<FixedPointRecord> dup = s.points;
  dup.push_back(s.points[1]);
  CHECK_THROWS_AS(lefschetz_sum(dup, {0.0, 1.0}), OverlapError);
  CHECK(lefschetz_sum(s.points, {0.6, 0.9}) == 0);
}

TEST_CASE("a positive-index fixed point comes with a second fixed point") {
  for (const char* name : {"PT", "IZ", "RNF", "DISS_ROT"}) {
    const FixedPointSearch s = find_fixed_points(build_map(parse_map_arg(name)));
    bool positive = false;
    for (const auto& p : s.points) positive = positive || p.index > 0;
    if (positive) CHECK_MESSAGE(s.points.size() >= 2, name);
  }
}

TEST_CASE("periodic orbits of rotation number 1/3") {
  const LiftMap m = build_map(zoo::diss_rot(1.0 / 3.0, 0.9));
  const PeriodicSearch s = find_periodic_orbit(m, 1, 3);
  REQUIRE_FALSE(s.orbits.empty());
  for (const auto& r : s.orbits) {
    CHECK(r.p == 1);
    CHECK(r.q == 3);
    CHECK(r.residual < 1e-8);
    CHECK(std::abs(r.point.y - 0.5) < 1e-8);
    CHECK(r.rotation_consistent);
    CHECK(r.rotation.liminf_est <= 1.0 / 3.0 + 1e-6);
    CHECK(r.rotation.limsup_est >= 1.0 / 3.0 - 1e-6);
    CHECK(std::abs(r.rotation.mean - 1.0 / 3.0) < 1e-6);
    // Direct recomputation of f~^3(z) - z - (1, 0) and period 3 on the annulus.
    const LiftPoint z3 = iterate(m, r.point, 3);
    CHECK(norm(z3 - LiftPoint{r.point.x + 1.0, r.point.y}) < 1e-8);
    const AnnulusPoint a = project(r.point);
    const AnnulusPoint b = project(z3);
    CHECK(std::abs(std::remainder(a.theta - b.theta, 1.0)) < 1e-8);
  }
}

TEST_CASE("no 1/3 orbit for rotation by 1/2") {
  CHECK(find_periodic_orbit(build_map(zoo::diss_rot(0.5, 0.9)), 1, 3).orbits.empty());
}

TEST_CASE("PT period-one search recovers the fixed points") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const PeriodicSearch s = find_periodic_orbit(m, 0, 1);
  REQUIRE(s.orbits.size() == 2);
  CHECK(std::abs(s.orbits[0].point.x) < 1e-9);
  CHECK(std::abs(s.orbits[1].point.x - 0.5) < 1e-9);
  CHECK(s.orbits[0].index + s.orbits[1].index == 0);
}

TEST_CASE("periodic search takes p/q as given") {
  const LiftMap m = build_map(zoo::diss_rot(1.0 / 3.0, 0.9));
  const PeriodicSearch s = find_periodic_orbit(m, 2, 6);
  REQUIRE_FALSE(s.orbits.empty());
  for (const auto& r : s.orbits) {
    CHECK(r.p == 2);
    CHECK(r.q == 6);
  }
  CHECK_THROWS_AS(find_periodic_orbit(m, 1, 0), BadParameter);
}

TEST_CASE("drift: RNF to +inf, mirrored RNF to -inf") {
  for (double alpha : {0.05, -0.05}) {
    const LiftMap m = build_map(zoo::rnf(alpha, 6.0, 0.9));
    const WindowReport w = middle_window(m);
    REQUIRE(w.verified());
    DriftOptions o;
    o.fix_empty = find_fixed_points(m).empty();
    CHECK(*o.fix_empty);
    const auto pts = samples(50, 1);
    const DriftClass d = drift_classification(m, pts, w, o);
    REQUIRE(d.samples.size() == 50);
    const DriftTag want = alpha > 0 ? DriftTag::to_plus_infinity : DriftTag::to_minus_infinity;
    for (const auto& s : d.samples) CHECK(s.tag == want);
    CHECK(d.verdict ==
          (alpha > 0 ? DriftVerdict::uniform_positive : DriftVerdict::uniform_negative));
    CHECK(d.same_sign_clause_holds);
  }
}

TEST_CASE("drift: PT orbits converge to the node") {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const WindowReport w = middle_window(m);
  REQUIRE(w.verified());
  DriftOptions o;
  o.fix_empty = false;
  const auto pts = samples(50, 1);
  const DriftClass d = drift_classification(m, pts, w, o);
  for (const auto& s : d.samples) {
    CHECK(s.tag == DriftTag::converges_to_fixed);
    CHECK(norm(m(s.end) - s.end) < 1e-8);
  }
  CHECK(d.verdict == DriftVerdict::fixed_points_attract);
}

TEST_CASE("drift: requires a verified window; unmet thresholds stay unclassified") {
  const LiftMap m = build_map(zoo::rnf(0.05, 6.0, 0.9));
  const WindowReport bad =
      verify_window(m, band_boxes(BoxGrid(6, {0.0, 1.0}), {0.7, 0.9}));
  const auto pts = samples(3, 2);
  CHECK_THROWS_AS(drift_classification(m, pts, bad), PreconditionFailed);
  DriftOptions o;
  o.N = 10;
  o.escape = 50.0;
  const DriftClass d = drift_classification(m, pts, middle_window(m), o);
  for (const auto& s : d.samples) CHECK(s.tag == DriftTag::unclassified);
  CHECK(d.verdict == DriftVerdict::inconclusive);
}

TEST_CASE("fixed point records round trip through JSON") {
  const FixedPointSearch s = find_fixed_points(build_map(zoo::pt(0.0, 0.1, 0.0, 0.5)));
  REQUIRE_FALSE(s.points.empty());
  nlohmann::json j = s.points[1];
  CHECK(j.get<FixedPointRecord>() == s.points[1]);
}
