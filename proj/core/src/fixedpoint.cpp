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

#include "annulab/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "annulab/errors.hpp"
#include "annulab/parallel.hpp"

namespace annulab {
namespace {

constexpr double kBoundaryZero = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<LiftPoint> displacement(const LiftMap& m, const LiftPoint& z) {
  try {
    const LiftPoint w = m(z);
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) return std::nullopt;
    return w - z;
  } catch (const OutsideDomain&) {
  } catch (const FiberEscape&) {
  } catch (const DegenerateChord&) {
  }
  return std::nullopt;
}

LiftPoint displacement_or_throw(const LiftMap& m, const LiftPoint& z) {
  const LiftPoint w = m(z);
  return w - z;
}

double angle_between(const LiftPoint& a, const LiftPoint& b) {
  return std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
}

double wind_segment(const LiftMap& m, const LiftPoint& a, const LiftPoint& da, const LiftPoint& b,
                    const LiftPoint& db, int depth) {
  const double step = angle_between(da, db);
  if (std::abs(step) < std::numbers::pi / 2) return step;
  if (depth > 40) throw BoundaryZero("winding refinement did not settle");
  const LiftPoint mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  const LiftPoint dm = displacement_or_throw(m, mid);
  if (norm(dm) < kBoundaryZero) throw BoundaryZero("displacement vanishes on the cell boundary");
  return wind_segment(m, a, da, mid, dm, depth + 1) + wind_segment(m, mid, dm, b, db, depth + 1);
}

double wrap_x(double x) {
  double w = wrap_turns(x);
  if (w > 1.0 - 1e-12) w = 0.0;
  return w;
}

double periodic_gap(double a, double b) {
  const double d = std::abs(wrap_turns(a - b));
  return std::min(d, 1.0 - d);
}

struct Solve {
  LiftPoint z;
  double residual = kInf;
};

// Damped Gauss-Newton with a forward-difference Jacobian.
Solve refine(const LiftMap& m, LiftPoint z, double tol, const YBand& band) {
  Solve best{z, kInf};
  auto D = displacement(m, z);
  if (!D) return best;
  double r = norm(*D);
  best = {z, r};
  for (int it = 0; it < 100 && r >= tol; ++it) {
    const double h = 1e-7;
    const auto Dx = displacement(m, {z.x + h, z.y});
    const auto Dy = displacement(m, {z.x, z.y + h});
    if (!Dx || !Dy) break;
    const double a = (Dx->x - D->x) / h, b = (Dy->x - D->x) / h;
    const double c = (Dx->y - D->y) / h, d = (Dy->y - D->y) / h;
    const double det = a * d - b * c;
    const double scale = a * a + b * b + c * c + d * d;
    LiftPoint step;
    if (std::abs(det) > 1e-12 * scale && det != 0.0) {
      step = {-(d * D->x - b * D->y) / det, -(-c * D->x + a * D->y) / det};
    } else {
      // Levenberg-Marquardt on the normal equations.
      const double mu = 1e-9 * std::max(scale, 1e-30);
      const double n11 = a * a + c * c + mu, n12 = a * b + c * d, n22 = b * b + d * d + mu;
      const double g1 = a * D->x + c * D->y, g2 = b * D->x + d * D->y;
      const double nd = n11 * n22 - n12 * n12;
      if (nd == 0.0) break;
      step = {-(n22 * g1 - n12 * g2) / nd, -(-n12 * g1 + n11 * g2) / nd};
    }
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const LiftPoint cand{z.x + step.x, z.y + step.y};
      if (cand.y < band.lo - 0.05 || cand.y > band.hi + 0.05) {
        step = {0.5 * step.x, 0.5 * step.y};
        continue;
      }
      const auto Dc = displacement(m, cand);
      if (Dc && norm(*Dc) < r) {
        z = cand;
        D = Dc;
        r = norm(*Dc);
        improved = true;
        break;
      }
      step = {0.5 * step.x, 0.5 * step.y};
    }
    if (!improved) break;
    if (r < best.residual) best = {z, r};
  }
  return best;
}

struct Leaf {
  int col;
  int row;
};

}  // namespace

int fixed_point_index(const LiftMap& m, const Box& cell) {
  const LiftPoint corners[4] = {{cell.x0, cell.y0}, {cell.x1, cell.y0}, {cell.x1, cell.y1},
                                {cell.x0, cell.y1}};
  constexpr int kSegments = 8;
  double total = 0.0;
  LiftPoint prev = corners[0];
  LiftPoint dprev = displacement_or_throw(m, prev);
  if (norm(dprev) < kBoundaryZero) throw BoundaryZero("displacement vanishes on the cell boundary");
  for (int side = 0; side < 4; ++side) {
    const LiftPoint a = corners[side];
    const LiftPoint b = corners[(side + 1) % 4];
    for (int s = 1; s <= kSegments; ++s) {
      const double t = static_cast<double>(s) / kSegments;
      const LiftPoint p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      const LiftPoint dp = displacement_or_throw(m, p);
      if (norm(dp) < kBoundaryZero) {
        throw BoundaryZero("displacement vanishes on the cell boundary");
      }
      total += wind_segment(m, prev, dprev, p, dp, 0);
      prev = p;
      dprev = dp;
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

FixedPointSearch find_fixed_points(const LiftMap& m, const FixedPointOptions& opts) {
  if (opts.max_depth < 2 || opts.max_depth > 12) throw BadParameter("max_depth must lie in [2, 12]");
  if (!(opts.region.lo < opts.region.hi)) throw BadParameter("empty region");
  if (!(opts.tol > 0.0)) throw BadParameter("tol must be positive");
  const YBand band = opts.region;
  const int D = opts.max_depth;
  auto cell_box = [&](int depth, int col, int row) {
    const double w = std::ldexp(1.0, -depth);
    const double h = (band.hi - band.lo) * w;
    return Box{col * w, (col + 1) * w, band.lo + row * h, band.lo + (row + 1) * h};
  };

  FixedPointSearch out;
  std::vector<Leaf> level;
  constexpr int kStart = 2;
  for (int r = 0; r < (1 << kStart); ++r) {
    for (int c = 0; c < (1 << kStart); ++c) level.push_back({c, r});
  }
  for (int depth = kStart; depth <= D; ++depth) {
    out.cells_examined += level.size();
    std::vector<char> keep(level.size(), 0);
    parallel_for(level.size(), [&](std::size_t i) {
      const Box b = cell_box(depth, level[i].col, level[i].row);
      std::optional<LiftPoint> d[9];
      LiftPoint pts[9];
      int defined = 0;
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          pts[j * 3 + k] = {b.x0 + 0.5 * k * b.width(), b.y0 + 0.5 * j * b.height()};
          d[j * 3 + k] = displacement(m, pts[j * 3 + k]);
          defined += d[j * 3 + k].has_value();
        }
      }
      if (defined == 0) return;
      if (defined < 9) {
        keep[i] = 1;
        return;
      }
      double mind = kInf;
      double lip = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          const int a = j * 3 + k;
          mind = std::min(mind, norm(*d[a]));
          if (k < 2) lip = std::max(lip, norm(*d[a + 1] - *d[a]) / norm(pts[a + 1] - pts[a]));
          if (j < 2) lip = std::max(lip, norm(*d[a + 3] - *d[a]) / norm(pts[a + 3] - pts[a]));
        }
      }
      const double rho = 0.5 * std::hypot(0.5 * b.width(), 0.5 * b.height());
      keep[i] = !(mind > 2.0 * lip * rho);
    });
    std::vector<Leaf> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (!keep[i]) continue;
      if (depth == D) {
        next.push_back(level[i]);
      } else {
        const Leaf l = level[i];
        next.push_back({2 * l.col, 2 * l.row});
        next.push_back({2 * l.col + 1, 2 * l.row});
        next.push_back({2 * l.col, 2 * l.row + 1});
        next.push_back({2 * l.col + 1, 2 * l.row + 1});
      }
    }
    level = std::move(next);
  }

  // Grid-qualified minimum displacement over finest cell centers.
  const int n = 1 << D;
  std::vector<double> mins(static_cast<std::size_t>(n), kInf);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t r) {
    for (int c = 0; c < n; ++c) {
      if (auto d = displacement(m, cell_box(D, c, static_cast<int>(r)).center())) {
        mins[r] = std::min(mins[r], norm(*d));
      }
    }
  });
  out.min_displacement = *std::min_element(mins.begin(), mins.end());

  // Clusters of surviving finest cells.
  std::vector<int> label(static_cast<std::size_t>(n) * n, -2);
  for (const auto& l : level) label[static_cast<std::size_t>(l.row) * n + l.col] = -1;
  std::vector<std::vector<Leaf>> clusters;
  for (const auto& start : level) {
    if (label[static_cast<std::size_t>(start.row) * n + start.col] != -1) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    std::vector<Leaf> todo{start};
    label[static_cast<std::size_t>(start.row) * n + start.col] = id;
    while (!todo.empty()) {
      const Leaf v = todo.back();
      todo.pop_back();
      clusters[id].push_back(v);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = v.row + dr;
          const int c = ((v.col + dc) % n + n) % n;
          if (r < 0 || r >= n) continue;
          int& lab = label[static_cast<std::size_t>(r) * n + c];
          if (lab == -1) {
            lab = id;
            todo.push_back({c, r});
          }
        }
      }
    }
  }

  const double index_side = opts.index_cell > 0.0 ? opts.index_cell : std::ldexp(1.0, -D);
  for (auto& cl : clusters) {
    std::sort(cl.begin(), cl.end(),
              [](const Leaf& a, const Leaf& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<char> occupied(n, 0);
    int rmin = n, rmax = -1;
    for (const auto& l : cl) {
      occupied[l.col] = 1;
      rmin = std::min(rmin, l.row);
      rmax = std::max(rmax, l.row);
    }
    int gap = 0, run = 0;
    for (int i = 0; i < 2 * n; ++i) {
      run = occupied[i % n] ? 0 : run + 1;
      gap = std::max(gap, std::min(run, n));
    }
    const double xspan = static_cast<double>(n - gap) / n;
    const double yspan = static_cast<double>(rmax - rmin + 1) / n * (band.hi - band.lo);
    const bool degenerate = xspan >= 0.25 || yspan >= 0.25 || cl.size() > 64;

    // Refine from (at most 256 evenly spread) cells of the cluster.
    const std::size_t stride = std::max<std::size_t>(1, cl.size() / 256);
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < cl.size(); i += stride) starts.push_back(i);
    std::vector<Solve> sols(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
      const Leaf l = cl[starts[i]];
      sols[i] = refine(m, cell_box(D, l.col, l.row).center(), opts.tol, band);
    });
    std::vector<Solve> found;
    for (const auto& s : sols) {
      if (!(s.residual < opts.tol)) continue;
      const LiftPoint z{wrap_x(s.z.x), s.z.y};
      if (z.y < band.lo || z.y > band.hi) continue;
      bool dup = false;
      for (auto& f : found) {
        if (periodic_gap(f.z.x, z.x) < 1e-7 && std::abs(f.z.y - z.y) < 1e-7) {
          if (s.residual < f.residual) f = {z, s.residual};
          dup = true;
          break;
        }
      }
      if (!dup) found.push_back({z, s.residual});
    }
    if (found.empty()) continue;
    std::sort(found.begin(), found.end(), [](const Solve& a, const Solve& b) {
      return a.z.x != b.z.x ? a.z.x < b.z.x : a.z.y < b.z.y;
    });

    auto as_curve = [&](const std::vector<Solve>& pts) {
      FixedCurve curve;
      for (const auto& l : cl) curve.cells.push_back(cell_box(D, l.col, l.row));
      const std::size_t step = std::max<std::size_t>(1, pts.size() / 16);
      for (std::size_t i = 0; i < pts.size(); i += step) {
        curve.points.push_back(pts[i].z);
        curve.max_residual = std::max(curve.max_residual, pts[i].residual);
      }
      out.curves.push_back(std::move(curve));
    };
    if (degenerate) {
      as_curve(found);
      continue;
    }
    // Lowest residual first; a zero inside an existing index cell is already
    // accounted for by that cell's index.
    std::vector<Solve> by_residual = found;
    std::stable_sort(by_residual.begin(), by_residual.end(),
                     [](const Solve& a, const Solve& b) { return a.residual < b.residual; });
    const std::size_t first_record = out.points.size();
    std::vector<Solve> loose;
    for (const auto& f : by_residual) {
      bool covered = false;
      for (std::size_t i = first_record; i < out.points.size(); ++i) {
        covered = covered || out.points[i].cell.overlaps_mod1(Box{f.z.x, f.z.x, f.z.y, f.z.y}.inflated(1e-15));
      }
      if (covered) continue;
      std::optional<FixedPointRecord> rec;
      for (double side = index_side; side >= index_side / 8.0 && !rec; side *= 0.5) {
        const Box cell{f.z.x - side / 2, f.z.x + side / 2, f.z.y - side / 2, f.z.y + side / 2};
        try {
          rec = FixedPointRecord{f.z, fixed_point_index(m, cell), f.residual, cell};
        } catch (const BoundaryZero&) {
        } catch (const OutsideDomain&) {
        } catch (const FiberEscape&) {
        }
      }
      if (rec) {
        out.points.push_back(*rec);
      } else {
        loose.push_back(f);
      }
    }
    if (!loose.empty()) as_curve(loose);
  }
  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
    return a.point.x != b.point.x ? a.point.x < b.point.x : a.point.y < b.point.y;
  });
  return out;
}

int lefschetz_sum(std::span<const FixedPointRecord> records, YBand region) {
  std::vector<const FixedPointRecord*> in;
  for (const auto& r : records) {
    if (r.point.y >= region.lo && r.point.y <= region.hi) in.push_back(&r);
  }
  int sum = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = i + 1; j < in.size(); ++j) {
      if (in[i]->cell.overlaps_mod1(in[j]->cell)) {
        throw OverlapError("index cells of two records overlap");
      }
    }
    sum += in[i]->index;
  }
  return sum;
}

PeriodicSearch find_periodic_orbit(const LiftMap& m, long p, long q,
                                   const FixedPointOptions& opts) {
  if (q < 1) throw BadParameter("q must be at least 1");
  const LiftMap g = return_map(m, p, q);
  const FixedPointSearch fs = find_fixed_points(g, opts);
  PeriodicSearch out;
  out.min_displacement = fs.min_displacement;
  const double target = static_cast<double>(p) / static_cast<double>(q);
  const long horizon = 100 * q;
  auto finish = [&](PeriodicOrbitRecord rec) {
    rec.p = p;
    rec.q = q;
    rec.residual = norm(g(rec.point) - rec.point);
    try {
      rec.rotation = rotation_estimate(m, rec.point, horizon);
      rec.rotation_consistent = rec.rotation.brackets(target, 1e-6);
    } catch (const Error&) {
      rec.rotation_consistent = false;
    }
    out.orbits.push_back(rec);
  };
  for (const auto& r : fs.points) {
    PeriodicOrbitRecord rec;
    rec.point = r.point;
    rec.index = r.index;
    rec.cell = r.cell;
    finish(rec);
  }
  for (const auto& c : fs.curves) {
    for (const auto& pt : c.points) {
      PeriodicOrbitRecord rec;
      rec.point = pt;
      rec.on_curve = true;
      const double s = opts.index_cell > 0.0 ? opts.index_cell : std::ldexp(1.0, -opts.max_depth);
      rec.cell = {pt.x - s / 2, pt.x + s / 2, pt.y - s / 2, pt.y + s / 2};
      finish(rec);
    }
  }
  return out;
}

const char* to_string(DriftTag t) {
  switch (t) {
    case DriftTag::to_plus_infinity:
      return "to +inf";
    case DriftTag::to_minus_infinity:
      return "to -inf";
    case DriftTag::converges_to_fixed:
      return "converges-to-fixed";
    case DriftTag::unclassified:
      return "unclassified";
  }
  return "?";
}

const char* to_string(DriftVerdict v) {
  switch (v) {
    case DriftVerdict::uniform_positive:
      return "uniform positive drift";
    case DriftVerdict::uniform_negative:
      return "uniform negative drift";
    case DriftVerdict::fixed_points_attract:
      return "orbits converge to fixed points";
    case DriftVerdict::mixed_signs:
      return "mixed drift signs";
    case DriftVerdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

DriftClass drift_classification(const LiftMap& m, std::span<const LiftPoint> points,
                                const WindowReport& window, const DriftOptions& opts) {
  if (!window.verified()) throw PreconditionFailed("drift classification needs a verified window");
  if (opts.N < 4) throw BadParameter("N must be at least 4");
  DriftClass out;
  out.samples.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    DriftSample& s = out.samples[i];
    s.start = points[i];
    LiftPoint z = points[i];
    const long half = opts.N / 2;
    bool up = true, down = true;
    double mid_x = 0.0;
    try {
      for (long n = 1; n <= opts.N; ++n) {
        const LiftPoint next = m(z);
        if (!m.chart().admits(next.y)) throw FiberEscape("orbit left the chart");
        if (n > half) {
          up = up && next.x >= z.x;
          down = down && next.x <= z.x;
        }
        z = next;
        if (n == half) mid_x = z.x;
      }
    } catch (const Error&) {
      s.end = z;
      s.tag = DriftTag::unclassified;
      return;
    }
    s.end = z;
    s.tail_advance = z.x - mid_x;
    if (up && s.tail_advance > opts.escape) {
      s.tag = DriftTag::to_plus_infinity;
    } else if (down && -s.tail_advance > opts.escape) {
      s.tag = DriftTag::to_minus_infinity;
    } else if (norm(m(z) - z) < 10.0 * opts.tol) {
      s.tag = DriftTag::converges_to_fixed;
    } else {
      s.tag = DriftTag::unclassified;
    }
  });
  int plus = 0, minus = 0, fixed = 0, unknown = 0;
  for (const auto& s : out.samples) {
    switch (s.tag) {
      case DriftTag::to_plus_infinity: ++plus; break;
      case DriftTag::to_minus_infinity: ++minus; break;
      case DriftTag::converges_to_fixed: ++fixed; break;
      case DriftTag::unclassified: ++unknown; break;
    }
  }
  if (unknown > 0) {
    out.verdict = DriftVerdict::inconclusive;
  } else if (fixed > 0) {
    out.verdict = DriftVerdict::fixed_points_attract;
  } else if (plus > 0 && minus > 0) {
    out.verdict = DriftVerdict::mixed_signs;
  } else if (plus > 0) {
    out.verdict = DriftVerdict::uniform_positive;
  } else if (minus > 0) {
    out.verdict = DriftVerdict::uniform_negative;
  }
  const bool fix_empty = opts.fix_empty.value_or(fixed == 0);
  out.same_sign_clause_holds = !fix_empty || !(plus > 0 && minus > 0);
  return out;
}

void to_json(nlohmann::json& j, const FixedPointRecord& r) {
  j = nlohmann::json{
      {"point", r.point}, {"index", r.index}, {"residual", r.residual}, {"cell", r.cell}};
}

void from_json(const nlohmann::json& j, FixedPointRecord& r) {
  try {
    r.point = j.at("point").get<LiftPoint>();
    r.index = j.at("index").get<int>();
    r.residual = j.at("residual").get<double>();
    r.cell = j.at("cell").get<Box>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed fixed point record: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const FixedCurve& c) {
  j = nlohmann::json{{"cells", c.cells}, {"points", c.points}, {"max_residual", c.max_residual}};
}

void to_json(nlohmann::json& j, const PeriodicOrbitRecord& r) {
  j = nlohmann::json{{"point", r.point},       {"p", r.p},
                     {"q", r.q},               {"index", r.index},
                     {"residual", r.residual}, {"cell", r.cell},
                     {"on_curve", r.on_curve}, {"rotation_consistent", r.rotation_consistent}};
}

void from_json(const nlohmann::json& j, PeriodicOrbitRecord& r) {
  try {
    r.point = j.at("point").get<LiftPoint>();
    r.p = j.at("p").get<long>();
    r.q = j.at("q").get<long>();
    r.index = j.at("index").get<int>();
    r.residual = j.at("residual").get<double>();
    r.cell = j.at("cell").get<Box>();
    r.on_curve = j.value("on_curve", false);
    r.rotation_consistent = j.value("rotation_consistent", false);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed periodic orbit record: ") + e.what());
  }
}

}  // namespace annulab
