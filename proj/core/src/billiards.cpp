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

#include "annulab/billiards.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "annulab/errors.hpp"

namespace annulab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kChordTol = 1e-12;

double cross(LiftPoint a, LiftPoint b) { return a.x * b.y - a.y * b.x; }
double dot(LiftPoint a, LiftPoint b) { return a.x * b.x + a.y * b.y; }
LiftPoint scale(LiftPoint a, double c) { return {a.x * c, a.y * c}; }
LiftPoint unit(LiftPoint a) { return scale(a, 1.0 / norm(a)); }
LiftPoint rot90(LiftPoint a) { return {-a.y, a.x}; }

void check_state(const BilliardState& st) {
  if (!(st.theta > 0.0 && st.theta < kPi) || !std::isfinite(st.s)) {
    std::ostringstream msg;
    msg << "billiard angle " << st.theta << " is not in (0, pi)";
    throw BadParameter(msg.str());
  }
}

struct Chord {
  double u = 0.0;  // absolute boundary parameter of the next hit, in (s, s + 1)
  LiftPoint dir;
};

// Next hit of the ray leaving boundary(s) at angle theta. The hit is the
// nontrivial zero of F(u) = cross(d, boundary(u) - p) on (s, s + 1): F < 0
// just after s and F > 0 just before s + 1.
Chord solve_chord(const TableSpec& table, const BilliardState& st) {
  const LiftPoint p = table.boundary(st.s);
  const LiftPoint t = unit(table.tangent(st.s));
  const LiftPoint d = scale(t, std::cos(st.theta)) + scale(rot90(t), std::sin(st.theta));
  auto F = [&](double u) { return cross(d, table.boundary(u) - p); };

  const double ratio = table.b / table.a;
  const double grazing = std::min(st.theta, kPi - st.theta);
  const double h0 = std::min(1.0 / 256.0, grazing * ratio * ratio / (8.0 * kPi));

  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  if (st.theta <= 0.5 * kPi) {
    double prev = st.s;
    for (double u = st.s + h0; u < st.s + 1.0; u += h0) {
      if (F(u) >= 0.0) {
        lo = prev;
        hi = u;
        bracketed = true;
        break;
      }
      prev = u;
    }
    if (bracketed && lo == st.s) lo = st.s + 1e-6 * h0;
  } else {
    double prev = st.s + 1.0;
    for (double u = st.s + 1.0 - h0; u > st.s; u -= h0) {
      if (F(u) < 0.0) {
        lo = u;
        hi = prev;
        bracketed = true;
        break;
      }
      prev = u;
    }
    if (bracketed && hi == st.s + 1.0) hi = st.s + 1.0 - 1e-6 * h0;
  }
  if (!bracketed || !(F(lo) < 0.0) || !(F(hi) >= 0.0)) {
    std::ostringstream msg;
    msg << "cannot bracket the next collision from s = " << st.s << ", theta = " << st.theta;
    throw DegenerateChord(msg.str());
  }
  while (hi - lo > kChordTol) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double u = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double dF = cross(d, table.tangent(u));
    if (dF == 0.0) break;
    const double next = u - F(u) / dF;
    if (next < lo - kChordTol || next > hi + kChordTol) break;
    u = next;
  }
  return {u, d};
}

double segment_distance(LiftPoint a, LiftPoint b, LiftPoint c) {
  const LiftPoint ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(c - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(a + scale(ab, t) - c);
}

double chord_clearance(const TableSpec& table, std::span<const Bumper> bumpers, double s0,
                       double s1) {
  const LiftPoint a = table.boundary(s0);
  const LiftPoint b = table.boundary(s1);
  double best = std::numeric_limits<double>::infinity();
  for (const Bumper& bump : bumpers) {
    best = std::min(best, segment_distance(a, b, {bump.cx, bump.cy}) - bump.radius);
  }
  return best;
}

}  // namespace

void TableSpec::validate() const {
  if (!(b > 0.0) || !(a >= b) || !std::isfinite(a)) {
    throw BadParameter("table needs a >= b > 0");
  }
  if (kind == Kind::circle && a != b) throw BadParameter("circle table needs a == b");
}

LiftPoint TableSpec::boundary(double s) const {
  return {a * std::cos(kTwoPi * s), b * std::sin(kTwoPi * s)};
}

LiftPoint TableSpec::tangent(double s) const {
  return {-kTwoPi * a * std::sin(kTwoPi * s), kTwoPi * b * std::cos(kTwoPi * s)};
}

double billiard_advance(const TableSpec& table, const BilliardState& st) {
  check_state(st);
  if (table.kind == TableSpec::Kind::circle) return st.theta / kPi;
  return solve_chord(table, st).u - st.s;
}

BilliardState billiard_step(const TableSpec& table, const BilliardState& st) {
  check_state(st);
  if (table.kind == TableSpec::Kind::circle) {
    return {wrap_turns(st.s + st.theta / kPi), st.theta};
  }
  const Chord chord = solve_chord(table, st);
  const LiftPoint t = unit(table.tangent(chord.u));
  // Equal-angle reflection keeps the tangential component and flips the
  // normal one, which is negative on arrival.
  const double theta = std::atan2(-dot(chord.dir, rot90(t)), dot(chord.dir, t));
  return {wrap_turns(chord.u), theta};
}

double billiard_area_defect(const TableSpec& table, const BilliardState& st, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw BadParameter("difference step must lie in [1e-7, 1e-3]");
  check_state(st);
  const double v = -std::cos(st.theta);
  if (!(v - h > -1.0 && v + h < 1.0)) throw BadParameter("state too close to grazing for step");

  // Image in lifted coordinates (s + advance, -cos theta').
  auto image = [&](double s, double vv) {
    const BilliardState in{s, std::acos(-vv)};
    const double adv = billiard_advance(table, in);
    const BilliardState out = billiard_step(table, in);
    return LiftPoint{s + adv, -std::cos(out.theta)};
  };
  const LiftPoint sp = image(st.s + h, v);
  const LiftPoint sm = image(st.s - h, v);
  const LiftPoint vp = image(st.s, v + h);
  const LiftPoint vm = image(st.s, v - h);
  const double j11 = (sp.x - sm.x) / (2.0 * h);
  const double j21 = (sp.y - sm.y) / (2.0 * h);
  const double j12 = (vp.x - vm.x) / (2.0 * h);
  const double j22 = (vp.y - vm.y) / (2.0 * h);
  const double det_s = j11 * j22 - j12 * j21;

  const double s_next = st.s + billiard_advance(table, st);
  const double speed_ratio = norm(table.tangent(s_next)) / norm(table.tangent(st.s));
  return std::abs(std::abs(det_s * speed_ratio) - 1.0);
}

void validate_bumpers(const TableSpec& table, std::span<const Bumper> bumpers) {
  table.validate();
  constexpr int kSamples = 8192;
  for (const Bumper& bump : bumpers) {
    if (!(bump.radius > 0.0)) throw BadParameter("bumper radius must be positive");
    const LiftPoint c{bump.cx, bump.cy};
    const double q = (c.x * c.x) / (table.a * table.a) + (c.y * c.y) / (table.b * table.b);
    if (!(q < 1.0)) throw BadParameter("bumper center lies outside the table");
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kSamples; ++i) {
      gap = std::min(gap, norm(table.boundary(static_cast<double>(i) / kSamples) - c));
    }
    if (!(gap > bump.radius)) throw BadParameter("bumper touches the table boundary");
  }
}

std::optional<AvoidanceCertificate> bumper_avoidance_search(const TableSpec& table,
                                                            std::span<const Bumper> bumpers,
                                                            std::span<const double> theta_grid,
                                                            int steps, int s_samples) {
  if (steps < 1) throw BadParameter("bumper search needs at least one step");
  if (s_samples < 1) throw BadParameter("bumper search needs at least one start position");
  validate_bumpers(table, bumpers);
  for (double theta0 : theta_grid) {
    for (int i = 0; i < s_samples; ++i) {
      AvoidanceCertificate cert;
      cert.initial = {static_cast<double>(i) / s_samples, theta0};
      cert.steps = steps;
      cert.overall_min = std::numeric_limits<double>::infinity();
      cert.min_distance.reserve(static_cast<std::size_t>(steps));
      BilliardState st = cert.initial;
      bool clear = true;
      for (int n = 0; n < steps; ++n) {
        const double adv = billiard_advance(table, st);
        const double dist = bumpers.empty() ? std::numeric_limits<double>::infinity()
                                            : chord_clearance(table, bumpers, st.s, st.s + adv);
        if (!(dist > 0.0)) {
          clear = false;
          break;
        }
        cert.min_distance.push_back(dist);
        cert.overall_min = std::min(cert.overall_min, dist);
        st = billiard_step(table, st);
      }
      if (clear) return cert;
    }
  }
  return std::nullopt;
}

bool verify_avoidance(const TableSpec& table, std::span<const Bumper> bumpers,
                      const AvoidanceCertificate& cert) {
  if (cert.steps < 1 || cert.min_distance.size() != static_cast<std::size_t>(cert.steps)) {
    return false;
  }
  BilliardState st = cert.initial;
  for (int n = 0; n < cert.steps; ++n) {
    const double adv = billiard_advance(table, st);
    const double dist = bumpers.empty() ? std::numeric_limits<double>::infinity()
                                        : chord_clearance(table, bumpers, st.s, st.s + adv);
    if (!(dist > 0.0)) return false;
    const double recorded = cert.min_distance[static_cast<std::size_t>(n)];
    if (std::isfinite(dist) && std::abs(dist - recorded) > 1e-9) return false;
    st = billiard_step(table, st);
  }
  return true;
}

MapSpec billiard_spec(const TableSpec& table) {
  if (table.kind == TableSpec::Kind::circle) {
    return {"billiard-circle", {{"radius", table.a}}, {}};
  }
  return {"billiard-ellipse", {{"a", table.a}, {"b", table.b}}, {}};
}

TableSpec table_from_spec(const MapSpec& spec) {
  TableSpec t;
  if (spec.name == "billiard-circle") {
    t = TableSpec::circle(spec.param("radius", 1.0));
  } else if (spec.name == "billiard-ellipse") {
    t = TableSpec::ellipse(spec.param("a", 2.0), spec.param("b", 1.0));
  } else {
    throw BadParameter("'" + spec.name + "' is not a billiard table");
  }
  t.validate();
  return t;
}

LiftMap billiard_lift_map(const TableSpec& table) {
  table.validate();
  MapSpec spec = billiard_spec(table);
  if (table.kind == TableSpec::Kind::circle) {
    PlaneFn fwd = [](const LiftPoint& p) { return LiftPoint{p.x + p.y, p.y}; };
    PlaneFn inv = [](const LiftPoint& p) { return LiftPoint{p.x - p.y, p.y}; };
    return LiftMap(std::move(spec), std::move(fwd), std::move(inv));
  }
  auto admit = [](const LiftPoint& p) {
    if (!(p.y > 0.0 && p.y < 1.0)) throw OutsideDomain("billiard chart needs theta/pi in (0, 1)");
  };
  PlaneFn fwd = [table, admit](const LiftPoint& p) {
    admit(p);
    const BilliardState st{wrap_turns(p.x), kPi * p.y};
    const double adv = billiard_advance(table, st);
    const BilliardState next = billiard_step(table, st);
    return LiftPoint{p.x + adv, next.theta / kPi};
  };
  // Time reversal (s, theta) -> (s, pi - theta) conjugates the map to its
  // inverse; the reversed chord advances 1 - A where A is the forward advance.
  PlaneFn inv = [table, admit](const LiftPoint& p) {
    admit(p);
    const BilliardState rev{wrap_turns(p.x), kPi - kPi * p.y};
    const double adv = billiard_advance(table, rev);
    const BilliardState next = billiard_step(table, rev);
    return LiftPoint{p.x - 1.0 + adv, (kPi - next.theta) / kPi};
  };
  return LiftMap(std::move(spec), std::move(fwd), std::move(inv));
}

void to_json(nlohmann::json& j, const TableSpec& t) {
  j = nlohmann::json{{"kind", t.kind == TableSpec::Kind::circle ? "circle" : "ellipse"},
                     {"a", t.a},
                     {"b", t.b}};
}

void from_json(const nlohmann::json& j, TableSpec& t) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "circle" && kind != "ellipse") throw SchemaError("unknown table kind " + kind);
  t.kind = kind == "circle" ? TableSpec::Kind::circle : TableSpec::Kind::ellipse;
  t.a = j.at("a").get<double>();
  t.b = j.at("b").get<double>();
}

void to_json(nlohmann::json& j, const Bumper& b) {
  j = nlohmann::json{{"center", {b.cx, b.cy}}, {"radius", b.radius}};
}

void from_json(const nlohmann::json& j, Bumper& b) {
  const auto c = j.at("center");
  b.cx = c.at(0).get<double>();
  b.cy = c.at(1).get<double>();
  b.radius = j.at("radius").get<double>();
}

}  // namespace annulab
