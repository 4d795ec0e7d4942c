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

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/lift.hpp"

namespace annulab {

/// Closed axis-aligned rectangle in lift coordinates.
struct Box {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double diameter() const;
  LiftPoint center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(const LiftPoint& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  /// Open-interior overlap (touching boxes do not intersect).
  bool overlaps(const Box& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  /// Overlap of the projections to the annulus, i.e. with some deck
  /// translate of `o`.
  bool overlaps_mod1(const Box& o) const;
  Box translated(double k) const { return {x0 + k, x1 + k, y0, y1}; }
  Box inflated(double r) const { return {x0 - r, x1 + r, y0 - r, y1 + r}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Distance from `p` to the rectangle (0 inside).
double distance(const Box& b, const LiftPoint& p);

void to_json(nlohmann::json& j, const Box& b);
void from_json(const nlohmann::json& j, Box& b);

/// Fiber band lo <= y <= hi.
struct YBand {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const YBand&, const YBand&) = default;
};

/// Dyadic boxes of side 2^-depth covering [0, 1) x band. Rows are absolute
/// (row r spans [r, r + 1] * 2^-depth) and indices are row-major from the
/// lowest row, so enumeration order is deterministic.
class BoxGrid {
 public:
  BoxGrid() = default;
  /// The band is snapped outward to dyadic rows and clipped to [0, 1].
  BoxGrid(int depth, YBand band);

  int depth() const { return depth_; }
  int cols() const { return 1 << depth_; }
  int row_lo() const { return row_lo_; }
  int row_hi() const { return row_hi_; }  // exclusive
  int rows() const { return row_hi_ - row_lo_; }
  std::size_t size() const { return static_cast<std::size_t>(cols()) * rows(); }
  double cell() const { return 1.0 / cols(); }
  YBand band() const { return {row_lo_ * cell(), row_hi_ * cell()}; }

  std::uint32_t index(int col, int row) const {
    return static_cast<std::uint32_t>((row - row_lo_) * cols() + col);
  }
  int col_of(std::uint32_t idx) const { return static_cast<int>(idx % cols()); }
  int row_of(std::uint32_t idx) const { return static_cast<int>(idx / cols()) + row_lo_; }
  bool has_row(int row) const { return row >= row_lo_ && row < row_hi_; }
  Box box(std::uint32_t idx) const;

  struct Location {
    std::uint32_t index = 0;
    long shift = 0;  // deck translation: p lies in box(index) + shift
  };
  /// Box containing p (half-open cells), or nullopt when p's row is outside.
  std::optional<Location> locate(const LiftPoint& p) const;

  friend bool operator==(const BoxGrid&, const BoxGrid&) = default;

 private:
  int depth_ = 0;
  int row_lo_ = 0;
  int row_hi_ = 0;
};

/// Sorted set of box indices of one grid.
class BoxSet {
 public:
  BoxSet() = default;
  explicit BoxSet(BoxGrid grid) : grid_(grid) {}
  BoxSet(BoxGrid grid, std::vector<std::uint32_t> indices);
  static BoxSet from_mask(BoxGrid grid, const std::vector<char>& mask);

  const BoxGrid& grid() const { return grid_; }
  const std::vector<std::uint32_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::uint32_t idx) const;
  std::vector<char> mask() const;

  /// True when some box of this set overlaps a deck translate of `b`.
  bool meets(const Box& b) const;

  friend bool operator==(const BoxSet&, const BoxSet&) = default;

 private:
  BoxGrid grid_;
  std::vector<std::uint32_t> indices_;
};

/// {d, region: [lo, hi], indices}.
/// Boxes of `grid` lying inside lo <= y <= hi.
BoxSet band_boxes(const BoxGrid& grid, YBand band);

nlohmann::json box_set_to_json(const BoxSet& s);
BoxSet box_set_from_json(const nlohmann::json& j);

}  // namespace annulab
