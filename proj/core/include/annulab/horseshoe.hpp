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

// A triple horseshoe on a rectangle N of the annulus. Branch j sends the
// vertical strip H_j = [a_j, a_j + delta] x N_y affinely onto the horizontal
// bar V_j = N_x x [b_j, b_j + eps], translated by k_j = j - 1 turns in the
// cover: symbol 0 moves left, 1 stays, 2 moves right. The map is partial:
// it is only defined on the strips.

#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/box.hpp"
#include "annulab/boxdyn.hpp"
#include "annulab/lift.hpp"

namespace annulab {

struct HorseshoeSpec {
  Box N{0.0, 0.3, 0.3, 0.7};
  double delta = 0.06;
  double eps = 0.08;
  std::array<double, 3> a{0.02, 0.12, 0.22};
  std::array<double, 3> b{0.32, 0.46, 0.60};
  /// +1 keeps both axes' orientation, -1 flips both (det stays positive).
  std::array<int, 3> orientation{1, 1, 1};

  /// Raises BadParameter when strips or bars overlap or leave N.
  void validate() const;
  Box strip(int j) const { return {a[j], a[j] + delta, N.y0, N.y1}; }
  Box bar(int j) const { return {N.x0, N.x1, b[j], b[j] + eps}; }
  static long translation(int j) { return j - 1; }
  /// Determinant sign of branch j's Jacobian.
  int jacobian_sign(int j) const;

  MapSpec map_spec() const;
  static HorseshoeSpec from_map_spec(const MapSpec& s);
};

/// Raises OutsideDomain off the strips; the inverse is defined on the
/// translated bars.
LiftMap make_horseshoe(const HorseshoeSpec& hs = {});

/// Symbols with a time-0 anchor: symbols[anchor + i] is the symbol at time i.
struct ItineraryWord {
  std::vector<int> symbols;
  int anchor = 0;

  std::vector<int> past() const;
  std::vector<int> future() const;
  std::string str() const;  // e.g. "0|0,2,2"

  friend bool operator==(const ItineraryWord&, const ItineraryWord&) = default;
};

/// Parses "0|0,2,2,2,0" or "02220" (no bar: anchor 0).
ItineraryWord parse_word(const std::string& text);

/// Strip index of each of the first `length` points of the forward orbit.
/// Raises OrbitLeavesN.
ItineraryWord itinerary(const HorseshoeSpec& hs, const LiftPoint& p, int length);

struct CylinderBox {
  Box box;  // x in the fundamental domain
  ItineraryWord word;
  int depth = 0;
  bool verified = false;  // the center realizes the word
};

/// Points whose future symbols and past symbols are the word's: the x-range
/// is pulled back through the future, the y-range pushed forward through the
/// past.
CylinderBox cylinder_box(const HorseshoeSpec& hs, const ItineraryWord& w);

/// Sum of the symbols' translations over the first n future symbols.
long net_translation(const ItineraryWord& w, int n);

struct MinimalityReport {
  int max_length = 0;
  std::size_t words_enumerated = 0;
  std::size_t compatible_positive = 0;
  /// Shortest n with a compatible word of positive net translation.
  int min_positive_n = 0;
  /// Compatible word with n < 5 and positive net translation, if any.
  std::optional<std::vector<int>> counterexample;
};

/// Exhaustive rectangle arithmetic over all words of length 1..max_length:
/// a word is compatible with U when some point of U follows it and lands in
/// a translate of U.
MinimalityReport enumerate_returns(const HorseshoeSpec& hs, const Box& U, int max_length);

struct HorseshoeClaims {
  Box U;
  LiftPoint fixed_point;  // branch-0 fixed point, inside U
  ReturningWitness negative;
  ReturningWitness positive;
  MinimalityReport minimality;
  /// Small disk W = [0 | 0^N] and its witness with n = 4N - 1, k = +1.
  int small_N = 2;
  ReturningWitness small_disk;
  bool negative_ok = false;
  bool positive_ok = false;
  bool minimal_ok = false;
  bool small_disk_ok = false;

  bool all_pass() const { return negative_ok && positive_ok && minimal_ok && small_disk_ok; }
};

/// Returning witness on W = cylinder [0 | 0^N] with word 0^N 2^{2N} 0^N,
/// N >= 2: n = 4N - 1, k = +1.
ReturningWitness small_disk_witness(const HorseshoeSpec& hs, int N);

/// Raises ClaimFailed naming the first failing check.
HorseshoeClaims verify_example_claims(const HorseshoeSpec& hs = {});

struct ConjugacyReport {
  int depth = 0;
  std::size_t words_checked = 0;
  std::size_t mismatches = 0;  // itinerary or shift-commutation failures
};

/// All words of length <= min(depth, 6), plus 729 seeded samples for each
/// longer length. Requires depth <= 12.
ConjugacyReport shift_conjugacy_check(const HorseshoeSpec& hs, int depth);

void to_json(nlohmann::json& j, const HorseshoeSpec& hs);
void to_json(nlohmann::json& j, const HorseshoeClaims& c);

}  // namespace annulab
