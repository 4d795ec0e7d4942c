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

// Set-oriented dynamics on a fundamental domain of the cover.
//
// Box images are sampled enclosures: a grid of sample points per box is
// mapped and every image point is inflated by a radius (default half a box
// diagonal). This is not rigorous. Certificates that matter (returning
// disks, chains) carry witness points that are re-checked by direct
// iteration.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/box.hpp"
#include "annulab/lift.hpp"

namespace annulab {

struct GraphOptions {
  /// Image inflation radius; negative means half a box diagonal.
  double inflation = -1.0;
  /// Samples per box side (3 = corners, edge midpoints and center).
  int samples_per_side = 3;
  /// Widen a box's radius to half the largest diagonal of a sample-image
  /// quad, so strongly sheared images stay covered.
  bool adaptive = true;

  double radius_for(const BoxGrid& grid) const;
};

struct GraphEdge {
  std::uint32_t target = 0;
  std::int32_t shift = 0;  // the image meets box(target) + shift

  friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

/// Translation-labelled box graph: edge (B, B', k) means the inflated
/// sampled image of B meets B' + k.
struct BoxGraph {
  BoxGrid grid;
  double inflation = 0.0;
  std::vector<std::vector<GraphEdge>> out;
  /// Radius actually used per box (>= inflation).
  std::vector<double> radius;
  /// Some inflated sample image left the grid's rows.
  std::vector<char> exits;
  /// Some sample of the box could not be evaluated (partial maps).
  std::vector<char> undefined;

  std::size_t edge_count() const;
};

/// Builds the graph over all boxes of `grid`, in parallel over boxes.
BoxGraph build_box_graph(const LiftMap& m, const BoxGrid& grid, const GraphOptions& opts = {});
inline BoxGraph build_box_graph(const LiftMap& m, YBand region, int depth,
                                const GraphOptions& opts = {}) {
  return build_box_graph(m, BoxGrid(depth, region), opts);
}

/// Union of the nontrivial strongly connected components (translations
/// ignored): an outer approximation of the nonwandering set.
BoxSet chain_recurrent_boxes(const BoxGraph& g);

/// Boxes reached from `s` along one graph edge.
BoxSet image_boxes(const BoxGraph& g, const BoxSet& s, bool* exits = nullptr);

struct TopologyReport {
  int components = 0;       // 4-adjacency components, x periodic
  bool connected = false;
  bool separates = false;   // removal disconnects the bottom collar from the top
};

TopologyReport box_topology(const BoxSet& s);

struct WindowReport {
  BoxSet boxes;
  bool forward_invariant = false;
  /// Min over sample images of (distance to the complement - inflation).
  double margin = 0.0;
  std::optional<std::uint32_t> counterexample;
  TopologyReport topology;

  bool verified() const { return forward_invariant && margin > 0.0; }
};

/// Checks that the inflated image of every box of W lies in the interior of W.
WindowReport verify_window(const LiftMap& m, const BoxSet& w, const GraphOptions& opts = {});

enum class GrowStatus { window, unverified, unbounded_at_scale, iteration_limit };

const char* to_string(GrowStatus s);

struct GrowResult {
  GrowStatus status = GrowStatus::iteration_limit;
  int rounds = 0;
  WindowReport report;
};

/// Unions inflated images into the seed until stable. The seed's grid is the
/// region bound: leaving it reports unbounded_at_scale.
GrowResult grow_window(const LiftMap& m, const BoxSet& seed, int max_iters,
                       const GraphOptions& opts = {});

struct AttractorReport {
  BoxSet boxes;
  int depth = 0;
  TopologyReport topology;
  bool inside_window = false;
  bool forward_invariant = false;  // at box level
};

/// Intersects the nested image covers of a verified window `depth` times.
/// Raises PreconditionFailed if the window does not verify.
AttractorReport attractor_boxes(const LiftMap& m, const WindowReport& w, int depth,
                                const GraphOptions& opts = {});

struct AnnulusReport {
  BoxSet band;
  WindowReport window;
  /// Per column: absolute [lowest, highest] row of the band.
  std::vector<std::pair<int, int>> column_rows;
};

/// Box surrogate for a smoothly bounded invariant closed annulus: an iterated
/// image of W with every column filled to one contiguous run, verified as a
/// window, with both collars nonempty. Empty when none is found at this
/// resolution.
std::optional<AnnulusReport> construct_invariant_annulus(const LiftMap& m, const WindowReport& w,
                                                         int max_rounds = 64,
                                                         const GraphOptions& opts = {});

struct OmegaLimit {
  BoxSet boxes;
  bool escaped = false;
};

/// Boxes hit by iterates n in (transient, N].
OmegaLimit omega_limit_boxes(const LiftMap& m, const BoxGrid& grid, LiftPoint p, long transient,
                             long N);

enum class Sign { positive = 1, negative = -1 };

const char* to_string(Sign s);

struct ReturningWitness {
  Box U;
  long n = 0;
  long k = 0;
  LiftPoint z;      // in U
  LiftPoint image;  // f~^n(z), in U + k
  Sign sign = Sign::positive;
};

void to_json(nlohmann::json& j, const ReturningWitness& w);
void from_json(const nlohmann::json& j, ReturningWitness& w);

struct ReturningSearchOptions {
  long horizon = 64;
  long kmax = 8;
  /// Search only this disk (covered by the graph boxes meeting it).
  std::optional<Box> base;
  /// Skip candidate boxes meeting this set.
  std::optional<BoxSet> avoid;
  /// Cells examined per witness refinement.
  int witness_budget = 20000;
};

/// Searches (box, cumulative translation) paths back to the starting box
/// with net translation of the requested sign. Candidates are tried in
/// box-index order, then by n, then by |k|; each is confirmed by a witness
/// point found by subdivision and by a sampled check of f~(U) and U being
/// disjoint. Empty means not found at this horizon and resolution.
std::optional<ReturningWitness> find_returning_disk(const LiftMap& m, const BoxGraph& g, Sign sign,
                                                    const ReturningSearchOptions& opts = {});

/// A point z of `source` with f~^n(z) in `target`: half the budget goes to
/// low-discrepancy samples, the rest to best-first subdivision.
std::optional<LiftPoint> find_orbit_witness(const LiftMap& m, const Box& source, long n,
                                            const Box& target, int budget = 20000);

/// Sampled check that f~(U) misses U: every image of a dense grid stays
/// farther from U than the image spacing.
bool image_disjoint(const LiftMap& m, const Box& u);

struct CheckResult {
  bool ok = true;
  std::string reason;

  static CheckResult fail(std::string why) { return {false, std::move(why)}; }
};

CheckResult verify_returning(const LiftMap& m, const ReturningWitness& w);

struct ChainLink {
  std::size_t from = 0;
  std::size_t to = 0;
  long exponent = 0;
  LiftPoint z;      // in disks[from]
  LiftPoint image;  // f~^exponent(z), in disks[to]
};

/// Disk chain in the cover: disks[i] = U + offsets[i].
struct DiskChain {
  Box base;
  std::vector<long> offsets;
  std::vector<ChainLink> links;
  /// The last disk links back to the first (closing link included in links).
  bool periodic = false;

  Box disk(std::size_t i) const { return base.translated(static_cast<double>(offsets[i])); }
};

void to_json(nlohmann::json& j, const DiskChain& c);
void from_json(const nlohmann::json& j, DiskChain& c);

/// Chain U+k1, U+2k1, ..., U+k1k2, U+(k1-1)k2, ..., U+k2, U from a positive
/// witness (n1, k1) and a negative witness (n2, -k2) on the same disk; the
/// closing link U -> U+k1 makes it periodic. Raises LinkVerificationFailed if
/// the bases differ or a link fails direct iteration.
DiskChain assemble_periodic_chain(const LiftMap& m, const ReturningWitness& positive,
                                  const ReturningWitness& negative);

CheckResult verify_chain(const LiftMap& m, const DiskChain& c);

/// Pulls a witness back along the orbit of x: if f~^n(lift of x) lies in
/// U + j, then V = f~^{-n}(U + j) (as an inflated hull) is returning with
/// the same (n, k) and contains the lift of x. Raises PreconditionFailed.
ReturningWitness pull_back_returning(const LiftMap& m, const AnnulusPoint& x,
                                     const ReturningWitness& w, long n);

}  // namespace annulab
