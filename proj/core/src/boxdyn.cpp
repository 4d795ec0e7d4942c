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

#include "annulab/boxdyn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "annulab/errors.hpp"
#include "annulab/parallel.hpp"

namespace annulab {
namespace {

// One forward step; partial-map failures come back as nullopt.
std::optional<LiftPoint> try_step(const LiftMap& m, const LiftPoint& p, long n = 1) {
  try {
    return iterate(m, p, n);
  } catch (const OutsideDomain&) {
  } catch (const FiberEscape&) {
  } catch (const DegenerateChord&) {
  }
  return std::nullopt;
}

struct BoxImage {
  std::vector<LiftPoint> images;
  double radius = 0.0;
  bool undefined = false;
};

BoxImage sample_box(const LiftMap& m, const Box& b, const GraphOptions& opts, double base) {
  const int s = std::max(2, opts.samples_per_side);
  BoxImage out;
  out.radius = base;
  std::vector<std::optional<LiftPoint>> grid(static_cast<std::size_t>(s) * s);
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) {
      const LiftPoint p{b.x0 + b.width() * i / (s - 1), b.y0 + b.height() * j / (s - 1)};
      grid[j * s + i] = try_step(m, p);
      if (grid[j * s + i]) {
        out.images.push_back(*grid[j * s + i]);
      } else {
        out.undefined = true;
      }
    }
  }
  if (opts.adaptive) {
    for (int j = 0; j + 1 < s; ++j) {
      for (int i = 0; i + 1 < s; ++i) {
        const auto& a = grid[j * s + i];
        const auto& bb = grid[j * s + i + 1];
        const auto& c = grid[(j + 1) * s + i];
        const auto& d = grid[(j + 1) * s + i + 1];
        if (a && d) out.radius = std::max(out.radius, 0.5 * norm(*d - *a));
        if (bb && c) out.radius = std::max(out.radius, 0.5 * norm(*c - *bb));
      }
    }
  }
  return out;
}

long floor_div_cell(double v, double cell) { return static_cast<long>(std::floor(v / cell)); }

// Boxes met by the squares of half-side `r` around the images.
void cover_images(const BoxGrid& grid, const BoxImage& img, std::vector<GraphEdge>& edges,
                  bool& exits) {
  const double c = grid.cell();
  const long cols = grid.cols();
  const double r = img.radius;
  for (const auto& q : img.images) {
    const long r0 = floor_div_cell(q.y - r, c);
    const long r1 = floor_div_cell(q.y + r, c);
    const long c0 = floor_div_cell(q.x - r, c);
    const long c1 = floor_div_cell(q.x + r, c);
    for (long row = r0; row <= r1; ++row) {
      if (row < grid.row_lo() || row >= grid.row_hi()) {
        exits = true;
        continue;
      }
      for (long gc = c0; gc <= c1; ++gc) {
        const long shift = gc >= 0 ? gc / cols : -((-gc + cols - 1) / cols);
        const int col = static_cast<int>(gc - shift * cols);
        edges.push_back({grid.index(col, static_cast<int>(row)), static_cast<std::int32_t>(shift)});
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Lazily computed image covers of individual boxes.
class CoverCache {
 public:
  CoverCache(const LiftMap& m, const BoxGrid& grid, const GraphOptions& opts)
      : m_(m), grid_(grid), opts_(opts), base_(opts.radius_for(grid)),
        done_(grid.size(), 0), targets_(grid.size()), exits_(grid.size(), 0),
        undefined_(grid.size(), 0) {}

  void ensure(const std::vector<std::uint32_t>& idx) {
    std::vector<std::uint32_t> todo;
    for (auto i : idx) {
      if (!done_[i]) todo.push_back(i);
    }
    parallel_for(todo.size(), [&](std::size_t t) {
      const auto i = todo[t];
      const BoxImage img = sample_box(m_, grid_.box(i), opts_, base_);
      std::vector<GraphEdge> edges;
      bool ex = false;
      cover_images(grid_, img, edges, ex);
      std::vector<std::uint32_t> tg;
      tg.reserve(edges.size());
      for (const auto& e : edges) tg.push_back(e.target);
      std::sort(tg.begin(), tg.end());
      tg.erase(std::unique(tg.begin(), tg.end()), tg.end());
      targets_[i] = std::move(tg);
      exits_[i] = ex;
      undefined_[i] = img.undefined;
    });
    for (auto i : todo) done_[i] = 1;
  }

  // Union of covers of `s`; `exits` reports images leaving the grid rows.
  std::vector<char> image_mask(const BoxSet& s, bool& exits) {
    ensure(s.indices());
    std::vector<char> mask(grid_.size(), 0);
    exits = false;
    for (auto i : s.indices()) {
      if (exits_[i] || undefined_[i]) exits = true;
      for (auto t : targets_[i]) mask[t] = 1;
    }
    return mask;
  }

 private:
  const LiftMap& m_;
  BoxGrid grid_;
  GraphOptions opts_;
  double base_;
  std::vector<char> done_;
  std::vector<std::vector<std::uint32_t>> targets_;
  std::vector<char> exits_;
  std::vector<char> undefined_;
};

// Iterative Tarjan; returns the component id of each node.
std::vector<int> strongly_connected(const std::vector<std::vector<GraphEdge>>& out,
                                    int& count) {
  const std::size_t n = out.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;
  int next = 0;
  count = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < out[v].size()) {
        const std::uint32_t w = out[v][pos++].target;
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::uint32_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != done);
        ++count;
      }
    }
  }
  return comp;
}

bool in_nontrivial(const BoxGraph& g, const std::vector<int>& comp,
                   const std::vector<int>& comp_size, std::uint32_t v) {
  if (comp_size[comp[v]] > 1) return true;
  for (const auto& e : g.out[v]) {
    if (e.target == v) return true;
  }
  return false;
}

double distance_to_complement(const BoxGrid& grid, const std::vector<char>& in_w,
                              const LiftPoint& q, double reach) {
  const double c = grid.cell();
  const long cols = grid.cols();
  double best = reach;
  const long r0 = floor_div_cell(q.y - reach, c);
  const long r1 = floor_div_cell(q.y + reach, c);
  const long c0 = floor_div_cell(q.x - reach, c);
  const long c1 = floor_div_cell(q.x + reach, c);
  for (long row = r0; row <= r1; ++row) {
    for (long gc = c0; gc <= c1; ++gc) {
      bool outside = row < grid.row_lo() || row >= grid.row_hi();
      if (!outside) {
        const long shift = gc >= 0 ? gc / cols : -((-gc + cols - 1) / cols);
        const int col = static_cast<int>(gc - shift * cols);
        outside = !in_w[grid.index(col, static_cast<int>(row))];
      }
      if (outside) {
        const Box cellbox{gc * c, (gc + 1) * c, row * c, (row + 1) * c};
        best = std::min(best, distance(cellbox, q));
      }
    }
  }
  return best;
}

std::vector<char> fill_columns(const BoxGrid& grid, const std::vector<char>& mask) {
  std::vector<char> out(mask.size(), 0);
  for (int col = 0; col < grid.cols(); ++col) {
    int lo = grid.row_hi();
    int hi = grid.row_lo() - 1;
    for (int row = grid.row_lo(); row < grid.row_hi(); ++row) {
      if (mask[grid.index(col, row)]) {
        lo = std::min(lo, row);
        hi = std::max(hi, row);
      }
    }
    for (int row = lo; row <= hi; ++row) out[grid.index(col, row)] = 1;
  }
  return out;
}

bool sign_matches(long k, Sign s) { return s == Sign::positive ? k > 0 : k < 0; }

constexpr double kSlack = 1e-12;

bool contains_slack(const Box& b, const LiftPoint& p) { return b.inflated(kSlack).contains(p); }

}  // namespace

double GraphOptions::radius_for(const BoxGrid& grid) const {
  if (inflation >= 0.0) return inflation;
  return 0.5 * std::sqrt(2.0) * grid.cell();
}

std::size_t BoxGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : out) n += e.size();
  return n;
}

BoxGraph build_box_graph(const LiftMap& m, const BoxGrid& grid, const GraphOptions& opts) {
  BoxGraph g;
  g.grid = grid;
  g.inflation = opts.radius_for(grid);
  g.out.resize(grid.size());
  g.radius.assign(grid.size(), g.inflation);
  g.exits.assign(grid.size(), 0);
  g.undefined.assign(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const BoxImage img = sample_box(m, grid.box(static_cast<std::uint32_t>(i)), opts, g.inflation);
    bool ex = false;
    cover_images(grid, img, g.out[i], ex);
    g.radius[i] = img.radius;
    g.exits[i] = ex;
    g.undefined[i] = img.undefined;
  });
  return g;
}

BoxSet chain_recurrent_boxes(const BoxGraph& g) {
  int count = 0;
  const auto comp = strongly_connected(g.out, count);
  std::vector<int> size(count, 0);
  for (int c : comp) ++size[c];
  std::vector<std::uint32_t> idx;
  for (std::uint32_t v = 0; v < g.out.size(); ++v) {
    if (in_nontrivial(g, comp, size, v)) idx.push_back(v);
  }
  return BoxSet(g.grid, std::move(idx));
}

BoxSet image_boxes(const BoxGraph& g, const BoxSet& s, bool* exits) {
  std::vector<char> mask(g.grid.size(), 0);
  bool ex = false;
  for (auto i : s.indices()) {
    ex = ex || g.exits[i] || g.undefined[i];
    for (const auto& e : g.out[i]) mask[e.target] = 1;
  }
  if (exits) *exits = ex;
  return BoxSet::from_mask(g.grid, mask);
}

TopologyReport box_topology(const BoxSet& s) {
  const BoxGrid& grid = s.grid();
  TopologyReport rep;
  const auto mask = s.mask();
  const int cols = grid.cols();
  auto wrap = [cols](int c) { return (c % cols + cols) % cols; };

  std::vector<int> label(grid.size(), -1);
  std::vector<std::uint32_t> todo;
  for (auto start : s.indices()) {
    if (label[start] >= 0) continue;
    label[start] = rep.components;
    todo.push_back(start);
    while (!todo.empty()) {
      const auto v = todo.back();
      todo.pop_back();
      const int col = grid.col_of(v);
      const int row = grid.row_of(v);
      const int nb[4][2] = {{col - 1, row}, {col + 1, row}, {col, row - 1}, {col, row + 1}};
      for (const auto& q : nb) {
        if (!grid.has_row(q[1])) continue;
        const auto w = grid.index(wrap(q[0]), q[1]);
        if (mask[w] && label[w] < 0) {
          label[w] = rep.components;
          todo.push_back(w);
        }
      }
    }
    ++rep.components;
  }
  rep.connected = rep.components == 1;

  // Complement flood with 8-adjacency from the bottom collar.
  std::vector<char> seen(grid.size(), 0);
  bool bottom = false;
  bool top = false;
  for (int col = 0; col < cols; ++col) {
    const auto v = grid.index(col, grid.row_lo());
    if (!mask[v]) {
      bottom = true;
      seen[v] = 1;
      todo.push_back(v);
    }
    if (!mask[grid.index(col, grid.row_hi() - 1)]) top = true;
  }
  bool reached_top = false;
  while (!todo.empty()) {
    const auto v = todo.back();
    todo.pop_back();
    const int col = grid.col_of(v);
    const int row = grid.row_of(v);
    if (row == grid.row_hi() - 1) reached_top = true;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (!grid.has_row(row + dr)) continue;
        const auto w = grid.index(wrap(col + dc), row + dr);
        if (!mask[w] && !seen[w]) {
          seen[w] = 1;
          todo.push_back(w);
        }
      }
    }
  }
  rep.separates = bottom && top && !reached_top;
  return rep;
}

WindowReport verify_window(const LiftMap& m, const BoxSet& w, const GraphOptions& opts) {
  if (w.empty()) throw BadParameter("window must be nonempty");
  const BoxGrid& grid = w.grid();
  const auto in_w = w.mask();
  const double base = opts.radius_for(grid);
  const auto& idx = w.indices();
  std::vector<double> margins(idx.size(), 0.0);
  std::vector<char> inside(idx.size(), 1);
  parallel_for(idx.size(), [&](std::size_t t) {
    const BoxImage img = sample_box(m, grid.box(idx[t]), opts, base);
    if (img.undefined) {
      inside[t] = 0;
      margins[t] = -std::numeric_limits<double>::infinity();
      return;
    }
    std::vector<GraphEdge> edges;
    bool ex = false;
    cover_images(grid, img, edges, ex);
    bool ok = !ex;
    for (const auto& e : edges) ok = ok && in_w[e.target];
    inside[t] = ok;
    const double reach = img.radius + 4.0 * grid.cell();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : img.images) {
      best = std::min(best, distance_to_complement(grid, in_w, q, reach) - img.radius);
    }
    margins[t] = best;
  });
  WindowReport rep;
  rep.boxes = w;
  rep.forward_invariant = true;
  rep.margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if ((!inside[t] || margins[t] <= 0.0) && !rep.counterexample) rep.counterexample = idx[t];
    rep.forward_invariant = rep.forward_invariant && inside[t];
    rep.margin = std::min(rep.margin, margins[t]);
  }
  rep.topology = box_topology(w);
  return rep;
}

const char* to_string(GrowStatus s) {
  switch (s) {
    case GrowStatus::window:
      return "window";
    case GrowStatus::unverified:
      return "stable-unverified";
    case GrowStatus::unbounded_at_scale:
      return "unbounded-at-scale";
    case GrowStatus::iteration_limit:
      return "iteration-limit";
  }
  return "?";
}

GrowResult grow_window(const LiftMap& m, const BoxSet& seed, int max_iters,
                       const GraphOptions& opts) {
  if (seed.empty()) throw BadParameter("seed must be nonempty");
  const BoxGrid& grid = seed.grid();
  CoverCache cache(m, grid, opts);
  GrowResult res;
  BoxSet cur = seed;
  for (res.rounds = 1; res.rounds <= max_iters; ++res.rounds) {
    bool exits = false;
    auto mask = cache.image_mask(cur, exits);
    if (exits) {
      res.status = GrowStatus::unbounded_at_scale;
      res.report.boxes = cur;
      res.report.topology = box_topology(cur);
      return res;
    }
    for (auto i : cur.indices()) mask[i] = 1;
    BoxSet next = BoxSet::from_mask(grid, mask);
    if (next == cur) {
      res.report = verify_window(m, cur, opts);
      res.status = res.report.verified() ? GrowStatus::window : GrowStatus::unverified;
      return res;
    }
    cur = std::move(next);
  }
  res.rounds = max_iters;
  res.status = GrowStatus::iteration_limit;
  res.report = verify_window(m, cur, opts);
  return res;
}

AttractorReport attractor_boxes(const LiftMap& m, const WindowReport& w, int depth,
                                const GraphOptions& opts) {
  if (!w.verified()) throw PreconditionFailed("attractor needs a verified window");
  const BoxGrid& grid = w.boxes.grid();
  CoverCache cache(m, grid, opts);
  const auto in_w = w.boxes.mask();
  BoxSet cur = w.boxes;
  for (int j = 0; j < depth; ++j) {
    bool exits = false;
    auto mask = cache.image_mask(cur, exits);
    const auto prev = cur.mask();
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && prev[i];
    cur = BoxSet::from_mask(grid, mask);
  }
  AttractorReport rep;
  rep.depth = depth;
  rep.boxes = cur;
  rep.inside_window = std::all_of(cur.indices().begin(), cur.indices().end(),
                                  [&](std::uint32_t i) { return in_w[i] != 0; });
  bool exits = false;
  const auto img = cache.image_mask(cur, exits);
  const auto have = cur.mask();
  bool inv = !exits;
  for (std::size_t i = 0; i < img.size() && inv; ++i) inv = !img[i] || have[i];
  rep.forward_invariant = inv;
  rep.topology = box_topology(cur);
  return rep;
}

std::optional<AnnulusReport> construct_invariant_annulus(const LiftMap& m, const WindowReport& w,
                                                         int max_rounds,
                                                         const GraphOptions& opts) {
  if (!w.verified()) return std::nullopt;
  const BoxGrid& grid = w.boxes.grid();
  CoverCache cache(m, grid, opts);
  BoxSet cur = w.boxes;
  for (int round = 0; round <= max_rounds; ++round) {
    const BoxSet band = BoxSet::from_mask(grid, fill_columns(grid, cur.mask()));
    const auto mask = band.mask();
    AnnulusReport rep;
    bool essential = true;
    for (int col = 0; col < grid.cols() && essential; ++col) {
      int lo = -1;
      int hi = -1;
      for (int row = grid.row_lo(); row < grid.row_hi(); ++row) {
        if (mask[grid.index(col, row)]) {
          if (lo < 0) lo = row;
          hi = row;
        }
      }
      // Both collars need a free row below and above in every column.
      essential = lo > grid.row_lo() && hi >= 0 && hi < grid.row_hi() - 1;
      rep.column_rows.push_back({lo, hi});
    }
    if (essential) {
      rep.window = verify_window(m, band, opts);
      if (rep.window.verified()) {
        rep.band = band;
        return rep;
      }
    }
    bool exits = false;
    auto next = cache.image_mask(cur, exits);
    if (exits) return std::nullopt;
    BoxSet nb = BoxSet::from_mask(grid, next);
    if (nb.empty() || nb == cur) {
      if (nb.empty()) return std::nullopt;
    }
    cur = std::move(nb);
  }
  return std::nullopt;
}

OmegaLimit omega_limit_boxes(const LiftMap& m, const BoxGrid& grid, LiftPoint p, long transient,
                             long N) {
  if (transient < 0 || N <= transient) throw BadParameter("need 0 <= transient < N");
  OmegaLimit res;
  res.boxes = BoxSet(grid);
  std::vector<std::uint32_t> hit;
  try {
    for (long n = 1; n <= N; ++n) {
      p = iterate(m, p, 1);
      if (n <= transient) continue;
      if (auto loc = grid.locate(p)) hit.push_back(loc->index);
    }
  } catch (const FiberEscape&) {
    res.escaped = true;
    return res;
  }
  res.boxes = BoxSet(grid, std::move(hit));
  return res;
}

const char* to_string(Sign s) { return s == Sign::positive ? "positive" : "negative"; }

void to_json(nlohmann::json& j, const ReturningWitness& w) {
  j = nlohmann::json{{"U", w.U},         {"n", w.n},         {"k", w.k},
                     {"z", w.z},         {"image", w.image}, {"sign", to_string(w.sign)}};
}

void from_json(const nlohmann::json& j, ReturningWitness& w) {
  try {
    w.U = j.at("U").get<Box>();
    w.n = j.at("n").get<long>();
    w.k = j.at("k").get<long>();
    w.z = j.at("z").get<LiftPoint>();
    w.image = j.at("image").get<LiftPoint>();
    const auto s = j.at("sign").get<std::string>();
    if (s != "positive" && s != "negative") throw SchemaError("sign must be positive|negative");
    w.sign = s == "positive" ? Sign::positive : Sign::negative;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed returning witness: ") + e.what());
  }
}

std::optional<LiftPoint> find_orbit_witness(const LiftMap& m, const Box& source, long n,
                                            const Box& target, int budget) {
  if (n < 0) throw BadParameter("orbit length must be nonnegative");
  struct Cell {
    Box box;
    long survived;
    double dist;  // lower estimate of the distance from the image to the target
    double raw;   // distance from the center's image to the target
    long order;
    std::vector<LiftPoint> trail;  // orbit of the center, survived + 1 points
  };
  // Tiers: survivors whose image may reach the target, then cells whose
  // center dies early (longest survival first, larger cells first), then
  // survivors that appear to miss.
  auto tier = [n](const Cell& c) { return c.survived < n ? 1 : (c.dist == 0.0 ? 0 : 2); };
  auto worse = [&](const Cell& a, const Cell& b) {
    if (tier(a) != tier(b)) return tier(a) > tier(b);
    if (tier(a) == 1) {
      if (a.survived != b.survived) return a.survived < b.survived;
      if (a.box.diameter() != b.box.diameter()) return a.box.diameter() < b.box.diameter();
    } else if (a.raw != b.raw) {
      return a.raw > b.raw;
    }
    return a.order > b.order;
  };
  std::priority_queue<Cell, std::vector<Cell>, decltype(worse)> open(worse);
  long order = 0;
  std::optional<LiftPoint> found;
  auto evaluate = [&](const Box& b) {
    Cell c{b, 0, 0.0, 0.0, order++, {b.center()}};
    for (; c.survived < n; ++c.survived) {
      auto q = try_step(m, c.trail.back());
      if (!q) break;
      c.trail.push_back(*q);
    }
    c.dist = c.survived == n ? distance(target, c.trail.back())
                             : std::numeric_limits<double>::infinity();
    c.raw = c.dist;
    if (c.survived == n && c.dist == 0.0 && !found) found = b.center();
    return c;
  };
  // How far apart the two halves' orbits drift before either dies.
  auto divergence = [](const Cell& a, const Cell& b) {
    const std::size_t k = std::min(a.trail.size(), b.trail.size()) - 1;
    const double lost = std::abs(static_cast<double>(a.survived - b.survived));
    return std::pair{lost, norm(a.trail[k] - b.trail[k])};
  };
  // Low-discrepancy sampling first: it finds thin hit sets of partial maps
  // that subdivision guided by one center per cell tends to miss.
  auto radical_inverse = [](long i, int base) {
    double f = 1.0, r = 0.0;
    for (; i > 0; i /= base) {
      f /= base;
      r += f * static_cast<double>(i % base);
    }
    return r;
  };
  const long sampled = std::max(1, budget / 2);
  for (long i = 1; i <= sampled; ++i) {
    const LiftPoint p{source.x0 + source.width() * radical_inverse(i, 2),
                      source.y0 + source.height() * radical_inverse(i, 3)};
    auto q = try_step(m, p, n);
    if (q && target.contains(*q)) return p;
  }
  budget -= static_cast<int>(sampled);
  const double floor_x = 1e-12 * std::max(1.0, source.width());
  const double floor_y = 1e-12 * std::max(1.0, source.height());
  open.push(evaluate(source));
  // Each cell is bisected across the axis along which its halves separate
  // more, so strongly hyperbolic directions are resolved first.
  for (int used = 1; used < budget && !found && !open.empty(); used += 4) {
    const Cell c = open.top();
    open.pop();
    const bool split_x = c.box.width() > floor_x;
    const bool split_y = c.box.height() > floor_y;
    if (!split_x && !split_y) continue;
    const double xm = 0.5 * (c.box.x0 + c.box.x1);
    const double ym = 0.5 * (c.box.y0 + c.box.y1);
    Cell l = evaluate({c.box.x0, xm, c.box.y0, c.box.y1});
    Cell r = evaluate({xm, c.box.x1, c.box.y0, c.box.y1});
    Cell b = evaluate({c.box.x0, c.box.x1, c.box.y0, ym});
    Cell t = evaluate({c.box.x0, c.box.x1, ym, c.box.y1});
    if (found) break;
    // The sibling's endpoint estimates the reach of each half's image.
    auto reach = [&](Cell& a, const Cell& o) {
      if (a.survived == n && o.survived == n) {
        a.dist = std::max(0.0, a.dist - norm(a.trail.back() - o.trail.back()));
      }
    };
    reach(l, r);
    reach(r, l);
    reach(b, t);
    reach(t, b);
    if (!split_y || (split_x && divergence(l, r) >= divergence(b, t))) {
      open.push(std::move(l));
      open.push(std::move(r));
    } else {
      open.push(std::move(b));
      open.push(std::move(t));
    }
  }
  return found;
}

bool image_disjoint(const LiftMap& m, const Box& u) {
  constexpr int kS = 17;
  std::vector<std::optional<LiftPoint>> img(kS * kS);
  for (int j = 0; j < kS; ++j) {
    for (int i = 0; i < kS; ++i) {
      img[j * kS + i] =
          try_step(m, {u.x0 + u.width() * i / (kS - 1), u.y0 + u.height() * j / (kS - 1)});
    }
  }
  double spread = 0.0;
  for (int j = 0; j < kS; ++j) {
    for (int i = 0; i < kS; ++i) {
      const auto& a = img[j * kS + i];
      if (!a) continue;
      if (i + 1 < kS && img[j * kS + i + 1]) spread = std::max(spread, norm(*img[j * kS + i + 1] - *a));
      if (j + 1 < kS && img[(j + 1) * kS + i]) spread = std::max(spread, norm(*img[(j + 1) * kS + i] - *a));
    }
  }
  bool any = false;
  for (const auto& q : img) {
    if (!q) continue;
    any = true;
    if (distance(u, *q) <= spread) return false;
  }
  return any;
}

CheckResult verify_returning(const LiftMap& m, const ReturningWitness& w) {
  if (w.n <= 0) return CheckResult::fail("n must be positive");
  if (w.k == 0) return CheckResult::fail("k must be nonzero");
  if (!sign_matches(w.k, w.sign)) return CheckResult::fail("sign does not match k");
  if (!contains_slack(w.U, w.z)) return CheckResult::fail("witness point is not in U");
  const auto img = try_step(m, w.z, w.n);
  if (!img) return CheckResult::fail("witness orbit is undefined");
  const double err = norm(*img - w.image);
  if (!(err <= m.tolerance())) {
    std::ostringstream os;
    os << "recomputed image differs from the recorded one by " << err;
    return CheckResult::fail(os.str());
  }
  if (!contains_slack(w.U.translated(static_cast<double>(w.k)), *img)) {
    return CheckResult::fail("image is not in U + k");
  }
  if (!image_disjoint(m, w.U)) return CheckResult::fail("f(U) meets U");
  return {};
}

std::optional<ReturningWitness> find_returning_disk(const LiftMap& m, const BoxGraph& g, Sign sign,
                                                    const ReturningSearchOptions& opts) {
  if (opts.horizon < 1) throw BadParameter("horizon must be positive");
  if (opts.kmax < 1 || opts.kmax > 28) throw BadParameter("kmax must lie in [1, 28]");
  const BoxGrid& grid = g.grid;
  const long span = opts.kmax + 1;  // cumulative shift range [-span, span]
  constexpr int kOff = 31;
  auto bit = [](long s) { return std::uint64_t{1} << (s + kOff); };

  int ncomp = 0;
  const auto comp = strongly_connected(g.out, ncomp);
  std::vector<int> csize(ncomp, 0);
  std::vector<char> has_sign(ncomp, 0);
  for (int c : comp) ++csize[c];
  for (std::uint32_t v = 0; v < g.out.size(); ++v) {
    for (const auto& e : g.out[v]) {
      if (comp[e.target] == comp[v] && sign_matches(e.shift, sign)) has_sign[comp[v]] = 1;
    }
  }

  // Layered reachability over (box, cumulative shift) from `sources`
  // (box, initial shift); calls visit(n, box, shift-mask) on each layer.
  std::vector<std::uint64_t> cur(grid.size(), 0), nxt(grid.size(), 0);
  auto try_candidates = [&](const Box& U, const std::vector<std::pair<std::uint32_t, long>>& ends,
                            const std::vector<char>& allowed,
                            const std::vector<std::pair<std::uint32_t, long>>& starts)
      -> std::optional<ReturningWitness> {
    std::fill(cur.begin(), cur.end(), 0);
    std::vector<std::uint32_t> active;
    for (const auto& [b, t] : starts) {
      if (!cur[b]) active.push_back(b);
      cur[b] |= bit(t);
    }
    std::optional<bool> free_u;
    // Orbits of a sample grid of U, advanced lazily; they give direct
    // witnesses and rule out targets farther away than the sample spacing.
    constexpr int kS = 33;
    std::vector<LiftPoint> seeds;
    std::vector<std::optional<LiftPoint>> orbit;
    long advanced = 0;
    auto advance_to = [&](long n) {
      if (seeds.empty()) {
        for (int b = 0; b < kS; ++b) {
          for (int a = 0; a < kS; ++a) {
            seeds.push_back({U.x0 + U.width() * a / (kS - 1), U.y0 + U.height() * b / (kS - 1)});
          }
        }
        orbit.assign(seeds.begin(), seeds.end());
      }
      for (; advanced < n; ++advanced) {
        for (auto& q : orbit) {
          if (q) q = try_step(m, *q);
        }
      }
    };
    auto spread_now = [&]() {
      double sp = 0.0;
      for (int b = 0; b < kS; ++b) {
        for (int a = 0; a < kS; ++a) {
          const auto& q = orbit[b * kS + a];
          if (!q) continue;
          if (a + 1 < kS && orbit[b * kS + a + 1]) sp = std::max(sp, norm(*orbit[b * kS + a + 1] - *q));
          if (b + 1 < kS && orbit[(b + 1) * kS + a]) sp = std::max(sp, norm(*orbit[(b + 1) * kS + a] - *q));
        }
      }
      return sp;
    };
    for (long n = 1; n <= opts.horizon && !active.empty(); ++n) {
      std::vector<std::uint32_t> next_active;
      for (auto v : active) {
        const std::uint64_t mask = cur[v];
        for (const auto& e : g.out[v]) {
          if (!allowed[e.target]) continue;
          std::uint64_t shifted = 0;
          for (long s = -span; s <= span; ++s) {
            if (!(mask & bit(s))) continue;
            const long t = s + e.shift;
            if (t >= -span && t <= span) shifted |= bit(t);
          }
          if (!shifted) continue;
          if (!nxt[e.target]) next_active.push_back(e.target);
          nxt[e.target] |= shifted;
        }
        cur[v] = 0;
      }
      // Candidate net translations at this n, by |k| then k.
      std::vector<long> ks;
      for (const auto& [b, t] : ends) {
        for (long s = -span; s <= span; ++s) {
          if (!(nxt[b] & bit(s))) continue;
          const long k = s - t;
          if (k != 0 && std::abs(k) <= opts.kmax && sign_matches(k, sign)) ks.push_back(k);
        }
      }
      std::sort(ks.begin(), ks.end(), [](long a, long b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
      });
      ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
      for (long k : ks) {
        if (!free_u) free_u = image_disjoint(m, U);
        if (!*free_u) break;
        const Box target = U.translated(static_cast<double>(k));
        advance_to(n);
        std::optional<LiftPoint> z;
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < orbit.size() && !z; ++i) {
          if (!orbit[i]) continue;
          if (target.contains(*orbit[i])) z = seeds[i];
          nearest = std::min(nearest, distance(target, *orbit[i]));
        }
        // The spacing bound needs a complete sample; partial maps lose it.
        const bool complete = std::all_of(orbit.begin(), orbit.end(),
                                          [](const auto& q) { return q.has_value(); });
        if (!z && complete && nearest > spread_now()) continue;
        if (!z) z = find_orbit_witness(m, U, n, target, opts.witness_budget);
        if (z) {
          ReturningWitness w{U, n, k, *z, iterate(m, *z, n), sign};
          if (verify_returning(m, w).ok) {
            for (auto v : next_active) nxt[v] = 0;
            return w;
          }
        }
      }
      if (free_u && !*free_u) {
        for (auto v : next_active) nxt[v] = 0;
        return std::nullopt;
      }
      std::swap(cur, nxt);
      active = std::move(next_active);
    }
    for (auto v : active) cur[v] = 0;
    return std::nullopt;
  };

  if (opts.base) {
    const double lift = std::floor(opts.base->center().x);
    const Box base = opts.base->translated(-lift);
    std::vector<std::pair<std::uint32_t, long>> members;
    for (std::uint32_t v = 0; v < grid.size(); ++v) {
      const Box b = grid.box(v);
      for (long t = -1; t <= 1; ++t) {
        if (b.translated(static_cast<double>(t)).overlaps(base)) {
          members.push_back({v, t});
          break;
        }
      }
    }
    if (members.empty()) return std::nullopt;
    std::vector<char> allowed(grid.size(), 1);
    auto w = try_candidates(base, members, allowed, members);
    if (w) {
      w->U = w->U.translated(lift);
      w->z = translate(w->z, lift);
      w->image = translate(w->image, lift);
    }
    return w;
  }

  for (std::uint32_t v = 0; v < grid.size(); ++v) {
    const int c = comp[v];
    bool self = false;
    for (const auto& e : g.out[v]) self = self || e.target == v;
    if (csize[c] == 1 && !self) continue;
    if (!has_sign[c]) continue;
    const Box U = grid.box(v);
    if (opts.avoid && opts.avoid->meets(U)) continue;
    std::vector<char> allowed(grid.size(), 0);
    for (std::uint32_t u = 0; u < grid.size(); ++u) allowed[u] = comp[u] == c;
    const std::vector<std::pair<std::uint32_t, long>> one{{v, 0}};
    if (auto w = try_candidates(U, one, allowed, one)) return w;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const DiskChain& c) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : c.links) {
    links.push_back({{"from", l.from},
                     {"to", l.to},
                     {"exponent", l.exponent},
                     {"z", l.z},
                     {"image", l.image}});
  }
  j = nlohmann::json{
      {"base", c.base}, {"offsets", c.offsets}, {"links", links}, {"periodic", c.periodic}};
}

void from_json(const nlohmann::json& j, DiskChain& c) {
  try {
    c.base = j.at("base").get<Box>();
    c.offsets = j.at("offsets").get<std::vector<long>>();
    c.periodic = j.at("periodic").get<bool>();
    c.links.clear();
    for (const auto& l : j.at("links")) {
      c.links.push_back({l.at("from").get<std::size_t>(), l.at("to").get<std::size_t>(),
                         l.at("exponent").get<long>(), l.at("z").get<LiftPoint>(),
                         l.at("image").get<LiftPoint>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed disk chain: ") + e.what());
  }
}

CheckResult verify_chain(const LiftMap& m, const DiskChain& c) {
  if (c.offsets.empty()) return CheckResult::fail("empty chain");
  if (!(c.base.width() < 1.0)) return CheckResult::fail("translates of the base disk overlap");
  if (!image_disjoint(m, c.base)) return CheckResult::fail("f(U) meets U");
  const std::size_t len = c.offsets.size();
  const std::size_t need = c.periodic ? len : len - 1;
  if (c.links.size() != need) return CheckResult::fail("wrong number of links");
  for (std::size_t i = 0; i < c.links.size(); ++i) {
    const auto& l = c.links[i];
    const std::size_t want_to = (i + 1) % len;
    if (l.from != i || l.to != want_to) return CheckResult::fail("links out of order");
    if (l.exponent <= 0) return CheckResult::fail("link exponent must be positive");
    if (!contains_slack(c.disk(l.from), l.z)) {
      return CheckResult::fail("link " + std::to_string(i) + ": point outside its disk");
    }
    const auto img = try_step(m, l.z, l.exponent);
    if (!img || !(norm(*img - l.image) <= m.tolerance())) {
      return CheckResult::fail("link " + std::to_string(i) + ": image does not recompute");
    }
    if (!contains_slack(c.disk(l.to), *img)) {
      return CheckResult::fail("link " + std::to_string(i) + ": image misses the next disk");
    }
  }
  return {};
}

DiskChain assemble_periodic_chain(const LiftMap& m, const ReturningWitness& positive,
                                  const ReturningWitness& negative) {
  if (!(positive.U == negative.U)) {
    throw LinkVerificationFailed("witnesses live on different base disks");
  }
  if (positive.k <= 0 || negative.k >= 0) {
    throw LinkVerificationFailed("need one positive and one negative witness");
  }
  const long k1 = positive.k;
  const long k2 = -negative.k;
  DiskChain c;
  c.base = positive.U;
  c.periodic = true;
  for (long i = 1; i <= k2; ++i) c.offsets.push_back(i * k1);
  for (long j = k1 - 1; j >= 0; --j) c.offsets.push_back(j * k2);
  const std::size_t len = c.offsets.size();
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t to = (i + 1) % len;
    const long from_off = c.offsets[i];
    const long step = c.offsets[to] - from_off;
    const ReturningWitness& w = step == k1 ? positive : negative;
    if (step != k1 && step != -k2) throw LinkVerificationFailed("inconsistent chain offsets");
    const double off = static_cast<double>(from_off);
    c.links.push_back({i, to, w.n, translate(w.z, off), translate(w.image, off)});
  }
  if (const auto chk = verify_chain(m, c); !chk.ok) throw LinkVerificationFailed(chk.reason);
  return c;
}

ReturningWitness pull_back_returning(const LiftMap& m, const AnnulusPoint& x,
                                     const ReturningWitness& w, long n) {
  if (n < 0) throw PreconditionFailed("n must be nonnegative");
  const LiftPoint p = lift_of(x);
  const auto q = try_step(m, p, n);
  if (!q) throw PreconditionFailed("orbit of x is undefined");
  const double j = std::round(q->x - w.U.center().x);
  std::optional<double> shift;
  for (double cand : {j - 1.0, j, j + 1.0}) {
    if (contains_slack(w.U.translated(cand), *q)) {
      shift = cand;
      break;
    }
  }
  if (!shift) throw PreconditionFailed("f^n(x) does not lie in a translate of U");
  if (n == 0) return w;
  if (!m.has_inverse()) throw PreconditionFailed("pull-back needs an inverse");

  const Box Uj = w.U.translated(*shift);
  constexpr int kS = 9;
  std::vector<LiftPoint> pre(kS * kS);
  for (int b = 0; b < kS; ++b) {
    for (int a = 0; a < kS; ++a) {
      pre[b * kS + a] = iterate(m, {Uj.x0 + Uj.width() * a / (kS - 1),
                                    Uj.y0 + Uj.height() * b / (kS - 1)}, -n);
    }
  }
  Box hull{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double spread = 0.0;
  for (int b = 0; b < kS; ++b) {
    for (int a = 0; a < kS; ++a) {
      const auto& v = pre[b * kS + a];
      hull = {std::min(hull.x0, v.x), std::max(hull.x1, v.x), std::min(hull.y0, v.y),
              std::max(hull.y1, v.y)};
      if (a + 1 < kS) spread = std::max(spread, norm(pre[b * kS + a + 1] - v));
      if (b + 1 < kS) spread = std::max(spread, norm(pre[(b + 1) * kS + a] - v));
    }
  }
  ReturningWitness v;
  v.U = hull.inflated(0.5 * spread);
  v.n = w.n;
  v.k = w.k;
  v.sign = w.sign;
  v.z = iterate(m, translate(w.z, *shift), -n);
  v.image = iterate(m, v.z, w.n);
  if (!v.U.contains(p)) throw PreconditionFailed("pulled-back disk misses the lift of x");
  if (!v.U.contains(v.z)) throw PreconditionFailed("pulled-back witness left its disk");
  if (!image_disjoint(m, v.U)) throw PreconditionFailed("pulled-back disk is not free");
  if (const auto chk = verify_returning(m, v); !chk.ok) throw PreconditionFailed(chk.reason);
  return v;
}

}  // namespace annulab
