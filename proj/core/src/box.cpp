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

#include "annulab/box.hpp"

#include <algorithm>
#include <cmath>

#include "annulab/errors.hpp"

namespace annulab {

double Box::diameter() const { return std::hypot(width(), height()); }

bool Box::overlaps_mod1(const Box& o) const {
  if (!(y0 < o.y1 && o.y0 < y1)) return false;
  // Translates o + k with o.x0 + k < x1 and x0 < o.x1 + k.
  const double kmin = std::floor(x0 - o.x1) + 1.0;
  for (double k = kmin; o.x0 + k < x1; k += 1.0) {
    if (x0 < o.x1 + k) return true;
  }
  return false;
}

double distance(const Box& b, const LiftPoint& p) {
  const double dx = std::max({b.x0 - p.x, 0.0, p.x - b.x1});
  const double dy = std::max({b.y0 - p.y, 0.0, p.y - b.y1});
  return std::hypot(dx, dy);
}

void to_json(nlohmann::json& j, const Box& b) { j = nlohmann::json{b.x0, b.x1, b.y0, b.y1}; }

void from_json(const nlohmann::json& j, Box& b) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("box must be [x0, x1, y0, y1]");
  b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

BoxGrid::BoxGrid(int depth, YBand band) : depth_(depth) {
  if (depth < 1 || depth > 14) throw BadParameter("box resolution must lie in [1, 14]");
  if (!(band.lo < band.hi)) throw BadParameter("empty fiber band");
  const double scale = static_cast<double>(cols());
  row_lo_ = std::clamp(static_cast<int>(std::floor(band.lo * scale + 1e-9)), 0, cols());
  row_hi_ = std::clamp(static_cast<int>(std::ceil(band.hi * scale - 1e-9)), 0, cols());
  if (row_hi_ <= row_lo_) throw BadParameter("fiber band contains no box row");
}

Box BoxGrid::box(std::uint32_t idx) const {
  const double c = cell();
  const int col = col_of(idx);
  const int row = row_of(idx);
  return {col * c, (col + 1) * c, row * c, (row + 1) * c};
}

std::optional<BoxGrid::Location> BoxGrid::locate(const LiftPoint& p) const {
  const double scale = static_cast<double>(cols());
  const double fr = std::floor(p.y * scale);
  if (!std::isfinite(fr) || fr < row_lo_ || fr >= row_hi_) return std::nullopt;
  const double fc = std::floor(p.x * scale);
  const long gcol = static_cast<long>(fc);
  const long c = cols();
  long shift = gcol >= 0 ? gcol / c : -((-gcol + c - 1) / c);
  const int col = static_cast<int>(gcol - shift * c);
  return Location{index(col, static_cast<int>(fr)), shift};
}

BoxSet::BoxSet(BoxGrid grid, std::vector<std::uint32_t> indices)
    : grid_(grid), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.back() >= grid_.size()) {
    throw BadParameter("box index outside the grid");
  }
}

BoxSet BoxSet::from_mask(BoxGrid grid, const std::vector<char>& mask) {
  std::vector<std::uint32_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<std::uint32_t>(i));
  }
  return BoxSet(grid, std::move(idx));
}

bool BoxSet::contains(std::uint32_t idx) const {
  return std::binary_search(indices_.begin(), indices_.end(), idx);
}

std::vector<char> BoxSet::mask() const {
  std::vector<char> m(grid_.size(), 0);
  for (auto i : indices_) m[i] = 1;
  return m;
}

bool BoxSet::meets(const Box& b) const {
  const double c = grid_.cell();
  const int r0 = std::max(grid_.row_lo(), static_cast<int>(std::floor(b.y0 / c)));
  const int r1 = std::min(grid_.row_hi() - 1, static_cast<int>(std::floor(b.y1 / c)));
  for (int r = r0; r <= r1; ++r) {
    for (int col = 0; col < grid_.cols(); ++col) {
      const std::uint32_t idx = grid_.index(col, r);
      if (contains(idx) && grid_.box(idx).overlaps_mod1(b)) return true;
    }
  }
  return false;
}

BoxSet band_boxes(const BoxGrid& grid, YBand band) {
  constexpr double kSlack = 1e-12;
  std::vector<std::uint32_t> idx;
  for (std::uint32_t i = 0; i < grid.size(); ++i) {
    const Box b = grid.box(i);
    if (b.y0 >= band.lo - kSlack && b.y1 <= band.hi + kSlack) idx.push_back(i);
  }
  return BoxSet(grid, std::move(idx));
}

nlohmann::json box_set_to_json(const BoxSet& s) {
  const YBand band = s.grid().band();
  return nlohmann::json{{"d", s.grid().depth()},
                        {"region", {band.lo, band.hi}},
                        {"indices", s.indices()}};
}

BoxSet box_set_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("d").get<int>();
    const auto region = j.at("region");
    BoxGrid grid(d, YBand{region.at(0).get<double>(), region.at(1).get<double>()});
    return BoxSet(grid, j.at("indices").get<std::vector<std::uint32_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed box set: ") + e.what());
  } catch (const BadParameter& e) {
    throw SchemaError(std::string("malformed box set: ") + e.what());
  }
}

}  // namespace annulab
