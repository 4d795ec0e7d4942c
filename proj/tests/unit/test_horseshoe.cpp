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
#include <random>
#include <string>
#include <vector>

#include "annulab/boxdyn.hpp"
#include "annulab/errors.hpp"
#include "annulab/horseshoe.hpp"
#include "annulab/registry.hpp"

using namespace annulab;

namespace {

// Fixed point of branch j from the affine constants: u = x0 + sx (u - a_j),
// y = b_j + sy (y - y0), orientation +1.
LiftPoint branch_fixed_point(const HorseshoeSpec& hs, int j) {
  const double sx = hs.N.width() / hs.delta;
  const double sy = hs.eps / hs.N.height();
  return {(sx * hs.a[j] - hs.N.x0) / (sx - 1.0), (hs.b[j] - sy * hs.N.y0) / (1.0 - sy)};
}

bool inside(const Box& inner, const Box& outer) {
  return inner.x0 >= outer.x0 - 1e-15 && inner.x1 <= outer.x1 + 1e-15 &&
         inner.y0 >= outer.y0 - 1e-15 && inner.y1 <= outer.y1 + 1e-15;
}

}  // namespace

TEST_CASE("default spec is valid and orientation preserving") {
  const HorseshoeSpec hs;
  CHECK_NOTHROW(hs.validate());
  for (int j = 0; j < 3; ++j) {
    CHECK(hs.jacobian_sign(j) == 1);
    CHECK(HorseshoeSpec::translation(j) == j - 1);
  }
  CHECK(HorseshoeSpec::from_map_spec(hs.map_spec()).a == hs.a);
  CHECK(build_map(hs.map_spec()).spec() == hs.map_spec());
}

TEST_CASE("branches: middle stays, left strip moves a turn left, outside is undefined") {
  const HorseshoeSpec hs;
  const LiftMap m = make_horseshoe(hs);
  const LiftPoint c1 = hs.strip(1).center();
  const LiftPoint i1 = m(c1);
  CHECK(hs.bar(1).contains(i1));
  const LiftPoint c0 = hs.strip(0).center();
  const LiftPoint i0 = m(c0);
  CHECK(hs.bar(0).translated(-1.0).contains(i0));
  CHECK(i0.x - c0.x < -0.7);
  CHECK(i0.x - c0.x > -1.3);
  CHECK(hs.bar(2).translated(1.0).contains(m(hs.strip(2).center())));
  CHECK_THROWS_AS(m({0.1, 0.5}), OutsideDomain);
  CHECK_THROWS_AS(m({0.5, 0.5}), OutsideDomain);
  CHECK_THROWS_AS(m({0.03, 0.9}), OutsideDomain);
  // Inverse round trip and deck equivariance on the strips.
  CHECK(norm(m.inverse(i1) - c1) < 1e-12);
  CHECK(norm(m.inverse(i0) - c0) < 1e-12);
  CHECK(norm(m(translate(c0, 3.0)) - translate(i0, 3.0)) < 1e-12);
}

TEST_CASE("branch fixed points have constant itineraries") {
  const HorseshoeSpec hs;
  const LiftMap m = make_horseshoe(hs);
  for (int j = 0; j < 3; ++j) {
    const LiftPoint p = branch_fixed_point(hs, j);
    CHECK(norm(m(p) - translate(p, static_cast<double>(j - 1))) < 1e-12);
    const ItineraryWord w = itinerary(hs, p, 8);
    CHECK(w.symbols == std::vector<int>(8, j));
    CHECK(std::abs(iterate(m, p, 6).x - p.x - 6.0 * (j - 1)) < 1e-9);
    // The deep single-symbol cylinder shrinks onto it.
    const CylinderBox c = cylinder_box(hs, ItineraryWord{std::vector<int>(12, j), 6});
    CHECK(c.verified);
    CHECK(c.box.contains(p));
    CHECK(c.box.diameter() < 1e-3);
  }
  const HorseshoeClaims claims = verify_example_claims(hs);
  CHECK(norm(claims.fixed_point - branch_fixed_point(hs, 0)) < 1e-12);
}

TEST_CASE("itineraries: cylinder points realize their words, escapes are reported") {
  const HorseshoeSpec hs;
  const CylinderBox c = cylinder_box(hs, parse_word("02220"));
  CHECK(c.verified);
  CHECK(itinerary(hs, c.box.center(), 5).symbols == std::vector<int>{0, 2, 2, 2, 0});
  CHECK(itinerary(hs, c.box.center(), 5).str() == "|0,2,2,2,0");
  // A point of H_1 leaving at the next step: its image lies off the strips.
  const LiftPoint leave{hs.a[1] + (0.1 - hs.N.x0) / (hs.N.width() / hs.delta), 0.5};
  CHECK_THROWS_AS(itinerary(hs, leave, 3), OrbitLeavesN);
  CHECK_THROWS_AS(parse_word("0|1|2"), BadParameter);
  CHECK_THROWS_AS(parse_word("013"), BadParameter);
  CHECK(parse_word("0|0,2").anchor == 1);
  CHECK(parse_word("0|0,2").past() == std::vector<int>{0});
  CHECK(parse_word("0|0,2").future() == std::vector<int>{0, 2});
}

TEST_CASE("cylinders: single symbols give the strips; nesting; geometric shrink") {
  const HorseshoeSpec hs;
  for (int j = 0; j < 3; ++j) {
    const CylinderBox c = cylinder_box(hs, ItineraryWord{{j}, 0});
    CHECK(std::abs(c.box.x0 - hs.a[j]) < 1e-15);
    CHECK(std::abs(c.box.x1 - hs.a[j] - hs.delta) < 1e-15);
    CHECK(c.box.y0 == hs.N.y0);
    CHECK(c.box.y1 == hs.N.y1);
  }
  const CylinderBox c00 = cylinder_box(hs, parse_word("00"));
  CHECK(c00.verified);
  CHECK(c00.box.width() > 0.0);
  CHECK(inside(c00.box, hs.strip(0)));

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> sym(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    ItineraryWord w;
    const int past = trial % 4;
    const int future = 1 + trial % 5;
    for (int i = 0; i < past + future; ++i) w.symbols.push_back(sym(rng));
    w.anchor = past;
    const CylinderBox c = cylinder_box(hs, w);
    CHECK(c.verified);
    ItineraryWord longer = w;
    longer.symbols.push_back(sym(rng));
    CHECK(inside(cylinder_box(hs, longer).box, c.box));
    ItineraryWord earlier = w;
    earlier.symbols.insert(earlier.symbols.begin(), sym(rng));
    ++earlier.anchor;
    CHECK(inside(cylinder_box(hs, earlier).box, c.box));
  }
  // Width contracts by delta / |N_x| per future symbol, height by eps / |N_y| per past symbol.
  const double w4 = cylinder_box(hs, parse_word("0120")).box.width();
  const double w5 = cylinder_box(hs, parse_word("01201")).box.width();
  CHECK(std::abs(w5 / w4 - hs.delta / hs.N.width()) < 1e-9);
  const double h2 = cylinder_box(hs, parse_word("12|0")).box.height();
  const double h3 = cylinder_box(hs, parse_word("212|0")).box.height();
  CHECK(std::abs(h3 / h2 - hs.eps / hs.N.height()) < 1e-9);
}

TEST_CASE("net translation of 0,2,2,2,0,0 over five steps is +1") {
  CHECK(net_translation(parse_word("022200"), 5) == 1);
  CHECK(net_translation(parse_word("022200"), 6) == 0);
  CHECK(net_translation(parse_word("0"), 1) == -1);
}

TEST_CASE("example claims: (1, -1), (5, +1) and nothing positive before 5") {
  const HorseshoeSpec hs;
  const LiftMap m = make_horseshoe(hs);
  const HorseshoeClaims c = verify_example_claims(hs);
  CHECK(c.all_pass());
  CHECK(c.negative.n == 1);
  CHECK(c.negative.k == -1);
  CHECK(c.positive.n == 5);
  CHECK(c.positive.k == 1);
  CHECK(c.U.contains(c.fixed_point));
  CHECK(image_disjoint(m, c.U));
  CHECK(verify_returning(m, c.negative).ok);
  CHECK(verify_returning(m, c.positive).ok);
  CHECK(c.minimality.min_positive_n == 5);
  CHECK_FALSE(c.minimality.counterexample.has_value());
}

TEST_CASE("forced minimality by exhaustive word enumeration") {
  const HorseshoeSpec hs;
  const HorseshoeClaims c = verify_example_claims(hs);
  const MinimalityReport r = enumerate_returns(hs, c.U, 5);
  CHECK(r.words_enumerated == 3u + 9u + 27u + 81u + 243u);
  CHECK(r.min_positive_n == 5);
  CHECK(r.compatible_positive >= 1);
  // Combinatorial oracle: words starting and ending with 0 have net
  // translation at most n - 2 - 2 = n - 4, which is <= 0 for n < 5.
  for (int n = 2; n < 5; ++n) {
    long best = -100;
    std::vector<int> w(n, 0);
    const int interior = n - 2;
    int total = 1;
    for (int i = 0; i < interior; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      int x = code;
      for (int i = 1; i <= interior; ++i, x /= 3) w[i] = x % 3;
      best = std::max(best, net_translation(ItineraryWord{w, 0}, n));
    }
    CHECK(best <= 0);
  }
}

TEST_CASE("small disk: word 0^2 2^4 0^2 returns with n = 7, k = +1") {
  const HorseshoeSpec hs;
  const LiftMap m = make_horseshoe(hs);
  const ReturningWitness w = small_disk_witness(hs, 2);
  CHECK(w.n == 7);
  CHECK(w.k == 1);
  CHECK(w.sign == Sign::positive);
  CHECK(verify_returning(m, w).ok);
  const CylinderBox W = cylinder_box(hs, parse_word("0|0,0"));
  CHECK(inside(w.U, W.box));
  CHECK(itinerary(hs, w.z, 8).symbols == std::vector<int>{0, 0, 2, 2, 2, 2, 0, 0});
  const ReturningWitness w3 = small_disk_witness(hs, 3);
  CHECK(w3.n == 11);
  CHECK(w3.k == 1);
  CHECK(verify_returning(m, w3).ok);
  CHECK_THROWS_AS(small_disk_witness(hs, 1), BadParameter);
}

TEST_CASE("shift conjugacy: every word realized, shift commutes") {
  const HorseshoeSpec hs;
  const ConjugacyReport r3 = shift_conjugacy_check(hs, 3);
  CHECK(r3.mismatches == 0);
  CHECK(r3.words_checked >= 27u);
  const ConjugacyReport r6 = shift_conjugacy_check(hs, 6);
  CHECK(r6.mismatches == 0);
  CHECK(r6.words_checked >= 729u);
  CHECK_THROWS_AS(shift_conjugacy_check(hs, 13), BadParameter);
}

TEST_CASE("spec validation rejects overlapping strips and bars") {
  HorseshoeSpec strips;
  strips.a[1] = strips.a[0] + 0.03;
  CHECK_THROWS_AS(strips.validate(), BadParameter);
  CHECK_THROWS_AS(make_horseshoe(strips), BadParameter);
  HorseshoeSpec bars;
  bars.b[2] = bars.b[1] + 0.01;
  CHECK_THROWS_AS(bars.validate(), BadParameter);
  HorseshoeSpec outside;
  outside.a[2] = 0.27;
  CHECK_THROWS_AS(outside.validate(), BadParameter);
}
