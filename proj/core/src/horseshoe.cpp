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

#include "annulab/horseshoe.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "annulab/errors.hpp"

namespace annulab {
namespace {

struct Interval {
  double lo;
  double hi;
  bool empty() const { return !(lo < hi); }
};

Interval meet(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

// Affine branch coordinates: u in the strip -> N_x, y in N_y -> the bar.
double x_branch(const HorseshoeSpec& hs, int j, double u) {
  const double sx = hs.N.width() / hs.delta;
  return hs.orientation[j] > 0 ? hs.N.x0 + sx * (u - hs.a[j])
                               : hs.N.x0 + sx * (hs.a[j] + hs.delta - u);
}

double x_branch_inverse(const HorseshoeSpec& hs, int j, double v) {
  const double sx = hs.N.width() / hs.delta;
  return hs.orientation[j] > 0 ? hs.a[j] + (v - hs.N.x0) / sx
                               : hs.a[j] + hs.delta - (v - hs.N.x0) / sx;
}

double y_branch(const HorseshoeSpec& hs, int j, double y) {
  const double sy = hs.eps / hs.N.height();
  return hs.orientation[j] > 0 ? hs.b[j] + sy * (y - hs.N.y0)
                               : hs.b[j] + hs.eps - sy * (y - hs.N.y0);
}

double y_branch_inverse(const HorseshoeSpec& hs, int j, double v) {
  const double sy = hs.eps / hs.N.height();
  return hs.orientation[j] > 0 ? hs.N.y0 + (v - hs.b[j]) / sy
                               : hs.N.y0 + (hs.b[j] + hs.eps - v) / sy;
}

Interval image(double (*fn)(const HorseshoeSpec&, int, double), const HorseshoeSpec& hs, int j,
               Interval in) {
  const double p = fn(hs, j, in.lo);
  const double q = fn(hs, j, in.hi);
  return {std::min(p, q), std::max(p, q)};
}

int strip_of(const HorseshoeSpec& hs, const LiftPoint& p) {
  if (p.y < hs.N.y0 || p.y > hs.N.y1) return -1;
  const double u = p.x - std::floor(p.x);
  for (int j = 0; j < 3; ++j) {
    if (u >= hs.a[j] && u <= hs.a[j] + hs.delta) return j;
  }
  return -1;
}

int bar_of(const HorseshoeSpec& hs, const LiftPoint& p) {
  const double v = p.x - std::floor(p.x);
  if (v < hs.N.x0 || v > hs.N.x1) return -1;
  for (int j = 0; j < 3; ++j) {
    if (p.y >= hs.b[j] && p.y <= hs.b[j] + hs.eps) return j;
  }
  return -1;
}

LiftPoint forward(const HorseshoeSpec& hs, const LiftPoint& p) {
  const int j = strip_of(hs, p);
  if (j < 0) throw OutsideDomain("point is not in a horseshoe strip");
  const double fl = std::floor(p.x);
  return {fl + static_cast<double>(HorseshoeSpec::translation(j)) + x_branch(hs, j, p.x - fl),
          y_branch(hs, j, p.y)};
}

LiftPoint backward(const HorseshoeSpec& hs, const LiftPoint& p) {
  const int j = bar_of(hs, p);
  if (j < 0) throw OutsideDomain("point is not in a translated horseshoe bar");
  const double fl = std::floor(p.x);
  return {fl - static_cast<double>(HorseshoeSpec::translation(j)) +
              x_branch_inverse(hs, j, p.x - fl),
          y_branch_inverse(hs, j, p.y)};
}

std::vector<int> word_of_index(std::size_t code, int length) {
  std::vector<int> w(length);
  for (int i = length - 1; i >= 0; --i) {
    w[i] = static_cast<int>(code % 3);
    code /= 3;
  }
  return w;
}

}  // namespace

void HorseshoeSpec::validate() const {
  if (!(N.x0 >= 0.0 && N.x1 < 1.0 && N.x0 < N.x1 && N.y0 > 0.0 && N.y1 < 1.0 && N.y0 < N.y1)) {
    throw BadParameter("N must be a rectangle inside [0, 1) x (0, 1)");
  }
  if (!(delta > 0.0 && eps > 0.0)) throw BadParameter("strip and bar widths must be positive");
  for (int j = 0; j < 3; ++j) {
    if (orientation[j] != 1 && orientation[j] != -1) throw BadParameter("orientation must be +-1");
    if (a[j] < N.x0 || a[j] + delta > N.x1) throw BadParameter("strip leaves N");
    if (b[j] < N.y0 || b[j] + eps > N.y1) throw BadParameter("bar leaves N");
    for (int i = 0; i < j; ++i) {
      if (strip(i).overlaps(strip(j)) || strip(i).x1 == strip(j).x0 || strip(j).x1 == strip(i).x0) {
        throw BadParameter("strips must be pairwise disjoint");
      }
      if (bar(i).overlaps(bar(j)) || bar(i).y1 == bar(j).y0 || bar(j).y1 == bar(i).y0) {
        throw BadParameter("bars must be pairwise disjoint");
      }
    }
  }
}

int HorseshoeSpec::jacobian_sign(int j) const {
  const double h = 1e-6;
  const double u = a[j] + 0.5 * delta;
  const double y = 0.5 * (N.y0 + N.y1);
  const double dx = x_branch(*this, j, u + h) - x_branch(*this, j, u);
  const double dy = y_branch(*this, j, y + h) - y_branch(*this, j, y);
  return dx * dy > 0.0 ? 1 : -1;
}

MapSpec HorseshoeSpec::map_spec() const {
  MapSpec s;
  s.name = "TH";
  s.params = {{"nx0", N.x0}, {"nx1", N.x1}, {"ny0", N.y0}, {"ny1", N.y1},
              {"delta", delta}, {"eps", eps}};
  for (int j = 0; j < 3; ++j) {
    s.params["a" + std::to_string(j)] = a[j];
    s.params["b" + std::to_string(j)] = b[j];
    s.params["o" + std::to_string(j)] = orientation[j];
  }
  return s;
}

HorseshoeSpec HorseshoeSpec::from_map_spec(const MapSpec& s) {
  HorseshoeSpec hs;
  hs.N = {s.param("nx0", hs.N.x0), s.param("nx1", hs.N.x1), s.param("ny0", hs.N.y0),
          s.param("ny1", hs.N.y1)};
  hs.delta = s.param("delta", hs.delta);
  hs.eps = s.param("eps", hs.eps);
  for (int j = 0; j < 3; ++j) {
    hs.a[j] = s.param("a" + std::to_string(j), hs.a[j]);
    hs.b[j] = s.param("b" + std::to_string(j), hs.b[j]);
    hs.orientation[j] = static_cast<int>(s.param("o" + std::to_string(j), hs.orientation[j]));
  }
  return hs;
}

LiftMap make_horseshoe(const HorseshoeSpec& hs) {
  hs.validate();
  for (int j = 0; j < 3; ++j) {
    if (hs.jacobian_sign(j) <= 0) throw BadParameter("branch reverses orientation");
  }
  MapSpec spec = hs.map_spec();
  return LiftMap(
      spec, [hs](const LiftPoint& p) { return forward(hs, p); },
      [hs](const LiftPoint& p) { return backward(hs, p); });
}

std::vector<int> ItineraryWord::past() const {
  return {symbols.begin(), symbols.begin() + anchor};
}

std::vector<int> ItineraryWord::future() const {
  return {symbols.begin() + anchor, symbols.end()};
}

std::string ItineraryWord::str() const {
  std::ostringstream os;
  for (int i = 0; i < anchor; ++i) os << (i ? "," : "") << symbols[i];
  os << "|";
  for (std::size_t i = anchor; i < symbols.size(); ++i) {
    os << (i > static_cast<std::size_t>(anchor) ? "," : "") << symbols[i];
  }
  return os.str();
}

ItineraryWord parse_word(const std::string& text) {
  ItineraryWord w;
  bool bar = false;
  for (char c : text) {
    if (c == '|') {
      if (bar) throw BadParameter("word has two anchors");
      bar = true;
      w.anchor = static_cast<int>(w.symbols.size());
    } else if (c >= '0' && c <= '2') {
      w.symbols.push_back(c - '0');
    } else if (c != ',' && c != ' ') {
      throw BadParameter("word symbols must be 0, 1 or 2");
    }
  }
  return w;
}

ItineraryWord itinerary(const HorseshoeSpec& hs, const LiftPoint& p, int length) {
  ItineraryWord w;
  LiftPoint z = p;
  for (int i = 0; i < length; ++i) {
    const int j = strip_of(hs, z);
    if (j < 0) throw OrbitLeavesN("orbit leaves the strips at step " + std::to_string(i));
    w.symbols.push_back(j);
    if (i + 1 < length) z = forward(hs, z);
  }
  return w;
}

long net_translation(const ItineraryWord& w, int n) {
  const auto f = w.future();
  long k = 0;
  for (int i = 0; i < n && i < static_cast<int>(f.size()); ++i) k += HorseshoeSpec::translation(f[i]);
  return k;
}

CylinderBox cylinder_box(const HorseshoeSpec& hs, const ItineraryWord& w) {
  for (int s : w.symbols) {
    if (s < 0 || s > 2) throw BadParameter("word symbols must be 0, 1 or 2");
  }
  const auto fut = w.future();
  const auto past = w.past();
  Interval X{hs.N.x0, hs.N.x1};
  for (auto it = fut.rbegin(); it != fut.rend(); ++it) {
    const Interval target = meet(X, {hs.N.x0, hs.N.x1});
    X = image(x_branch_inverse, hs, *it, target);
  }
  Interval Y{hs.N.y0, hs.N.y1};
  for (int s : past) Y = image(y_branch, hs, s, Y);

  CylinderBox c;
  c.word = w;
  c.depth = static_cast<int>(w.symbols.size());
  c.box = {X.lo, X.hi, Y.lo, Y.hi};
  const LiftPoint z = c.box.center();
  try {
    bool ok = itinerary(hs, z, static_cast<int>(fut.size())).symbols == fut;
    LiftPoint p = z;
    for (auto it = past.rbegin(); ok && it != past.rend(); ++it) {
      ok = bar_of(hs, p) == *it;
      if (ok) p = backward(hs, p);
    }
    c.verified = ok;
  } catch (const Error&) {
    c.verified = false;
  }
  return c;
}

MinimalityReport enumerate_returns(const HorseshoeSpec& hs, const Box& U, int max_length) {
  MinimalityReport rep;
  rep.max_length = max_length;
  const Interval ux{U.x0 - std::floor(U.x0), U.x1 - std::floor(U.x0)};
  const Interval uy{U.y0, U.y1};
  for (int n = 1; n <= max_length; ++n) {
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      ++rep.words_enumerated;
      const auto word = word_of_index(code, n);
      Interval px = ux, py = uy;
      long k = 0;
      bool alive = true;
      for (int s : word) {
        px = meet(px, {hs.a[s], hs.a[s] + hs.delta});
        py = meet(py, {hs.N.y0, hs.N.y1});
        if (px.empty() || py.empty()) {
          alive = false;
          break;
        }
        px = image(x_branch, hs, s, px);
        py = image(y_branch, hs, s, py);
        k += HorseshoeSpec::translation(s);
      }
      if (!alive || meet(px, ux).empty() || meet(py, uy).empty() || k <= 0) continue;
      ++rep.compatible_positive;
      if (rep.min_positive_n == 0) rep.min_positive_n = n;
      if (n < 5 && !rep.counterexample) rep.counterexample = word;
    }
  }
  return rep;
}

ReturningWitness small_disk_witness(const HorseshoeSpec& hs, int N) {
  if (N < 2) throw BadParameter("the small-disk construction needs N >= 2");
  const LiftMap m = make_horseshoe(hs);
  ItineraryWord disk{{0}, 1};
  for (int i = 0; i < N; ++i) disk.symbols.push_back(0);
  ItineraryWord word;
  for (int i = 0; i < 2 * N; ++i) word.symbols.push_back(0);
  word.anchor = 2 * N;
  for (int i = 0; i < N; ++i) word.symbols.push_back(0);
  for (int i = 0; i < 2 * N; ++i) word.symbols.push_back(2);
  for (int i = 0; i < 2 * N; ++i) word.symbols.push_back(0);
  ReturningWitness w;
  w.U = cylinder_box(hs, disk).box;
  w.n = 4 * N - 1;
  w.k = net_translation(word, static_cast<int>(w.n));
  w.sign = w.k > 0 ? Sign::positive : Sign::negative;
  w.z = cylinder_box(hs, word).box.center();
  w.image = iterate(m, w.z, w.n);
  return w;
}

HorseshoeClaims verify_example_claims(const HorseshoeSpec& hs) {
  const LiftMap m = make_horseshoe(hs);
  HorseshoeClaims c;
  c.U = cylinder_box(hs, parse_word("0|0")).box;

  // Branch-0 fixed point from the two affine fixed-point equations.
  const double x_ic = x_branch(hs, 0, 0.0), x_sl = x_branch(hs, 0, 1.0) - x_ic;
  const double y_ic = y_branch(hs, 0, 0.0), y_sl = y_branch(hs, 0, 1.0) - y_ic;
  c.fixed_point = {x_ic / (1.0 - x_sl), y_ic / (1.0 - y_sl)};
  c.negative = {c.U, 1, -1, c.fixed_point, m(c.fixed_point), Sign::negative};
  c.negative_ok = c.U.contains(c.fixed_point) && verify_returning(m, c.negative).ok;

  const auto word = parse_word("0|0,2,2,2,0,0");
  const LiftPoint z = cylinder_box(hs, word).box.center();
  c.positive = {c.U, 5, net_translation(word, 5), z, iterate(m, z, 5), Sign::positive};
  c.positive_ok = c.positive.k == 1 && verify_returning(m, c.positive).ok;

  c.minimality = enumerate_returns(hs, c.U, 5);
  c.minimal_ok = !c.minimality.counterexample && c.minimality.min_positive_n == 5;

  c.small_disk = small_disk_witness(hs, c.small_N);
  const Box& W = c.small_disk.U;
  c.small_disk_ok = c.small_disk.n == 7 && c.small_disk.k == 1 && W.x0 >= c.U.x0 &&
                    W.x1 <= c.U.x1 && W.y0 >= c.U.y0 && W.y1 <= c.U.y1 &&
                    verify_returning(m, c.small_disk).ok;

  if (!c.negative_ok) throw ClaimFailed("fixed point of branch 0 is not a (1, -1) witness");
  if (!c.positive_ok) throw ClaimFailed("word 0|0,2,2,2,0 is not a (5, +1) witness");
  if (!c.minimal_ok) {
    std::ostringstream os;
    os << "positive return shorter than 5";
    if (c.minimality.counterexample) {
      os << ": word";
      for (int s : *c.minimality.counterexample) os << ' ' << s;
    }
    throw ClaimFailed(os.str());
  }
  if (!c.small_disk_ok) throw ClaimFailed("small-disk witness (7, +1) failed");
  return c;
}

ConjugacyReport shift_conjugacy_check(const HorseshoeSpec& hs, int depth) {
  if (depth < 1 || depth > 12) throw BadParameter("depth must lie in [1, 12]");
  const LiftMap m = make_horseshoe(hs);
  ConjugacyReport rep;
  rep.depth = depth;
  for (int len = 1; len <= depth; ++len) {
    std::vector<std::vector<int>> words;
    if (len <= 6) {
      std::size_t total = 1;
      for (int i = 0; i < len; ++i) total *= 3;
      for (std::size_t code = 0; code < total; ++code) words.push_back(word_of_index(code, len));
    } else {
      std::mt19937_64 rng(static_cast<std::uint64_t>(len));
      std::uniform_int_distribution<int> sym(0, 2);
      for (int s = 0; s < 729; ++s) {
        std::vector<int> w(len);
        for (auto& v : w) v = sym(rng);
        words.push_back(std::move(w));
      }
    }
    for (const auto& w : words) {
      ++rep.words_checked;
      const CylinderBox c = cylinder_box(hs, ItineraryWord{w, 0});
      const LiftPoint z = c.box.center();
      try {
        bool ok = c.verified && itinerary(hs, z, len).symbols == w;
        if (ok && len > 1) {
          const auto shifted = itinerary(hs, m(z), len - 1).symbols;
          ok = std::equal(shifted.begin(), shifted.end(), w.begin() + 1);
        }
        if (!ok) ++rep.mismatches;
      } catch (const Error&) {
        ++rep.mismatches;
      }
    }
  }
  return rep;
}

void to_json(nlohmann::json& j, const HorseshoeSpec& hs) {
  j = nlohmann::json{{"N", hs.N},     {"delta", hs.delta}, {"eps", hs.eps},
                     {"a", hs.a},     {"b", hs.b},         {"orientation", hs.orientation}};
}

void to_json(nlohmann::json& j, const HorseshoeClaims& c) {
  nlohmann::json mini{{"max_length", c.minimality.max_length},
                      {"words_enumerated", c.minimality.words_enumerated},
                      {"compatible_positive", c.minimality.compatible_positive},
                      {"min_positive_n", c.minimality.min_positive_n}};
  j = nlohmann::json{{"U", c.U},
                     {"fixed_point", c.fixed_point},
                     {"negative", c.negative},
                     {"positive", c.positive},
                     {"minimality", mini},
                     {"small_disk", {{"N", c.small_N}, {"witness", c.small_disk}}},
                     {"checks",
                      {{"negative", c.negative_ok},
                       {"positive", c.positive_ok},
                       {"minimal", c.minimal_ok},
                       {"small_disk", c.small_disk_ok}}}};
}

}  // namespace annulab
