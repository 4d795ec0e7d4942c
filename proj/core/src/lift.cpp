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

#include "annulab/lift.hpp"

#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "annulab/errors.hpp"

namespace annulab {

double wrap_turns(double x) {
  double t = x - std::floor(x);
  // floor(-1e-18) = -1 gives t = 1.0 after rounding.
  if (t >= 1.0) t = 0.0;
  return t;
}

AnnulusPoint project(const LiftPoint& p) { return {wrap_turns(p.x), p.y}; }

void ChartSpec::validate() const {
  if (!(margin > 0.0) || !(margin < 0.1)) {
    throw BadParameter("chart margin must lie in (0, 0.1)");
  }
}

bool ChartSpec::admits(double y) const {
  return std::isfinite(y) && y >= -margin && y <= 1.0 + margin;
}

double MapSpec::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw BadParameter("map '" + name + "' is missing parameter '" + key + "'");
  return it->second;
}

double MapSpec::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void to_json(nlohmann::json& j, const LiftPoint& p) { j = nlohmann::json{p.x, p.y}; }

void from_json(const nlohmann::json& j, LiftPoint& p) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("point must be [x, y]");
  p = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(nlohmann::json& j, const ChartSpec& c) {
  j = nlohmann::json{{"kind", c.kind == ChartKind::open ? "open" : "closed"},
                     {"margin", c.margin}};
}

void from_json(const nlohmann::json& j, ChartSpec& c) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "open") {
    c.kind = ChartKind::open;
  } else if (kind == "closed") {
    c.kind = ChartKind::closed;
  } else {
    throw SchemaError("chart kind must be 'open' or 'closed'");
  }
  c.margin = j.at("margin").get<double>();
}

void to_json(nlohmann::json& j, const MapSpec& s) {
  j = nlohmann::json{{"name", s.name}, {"params", s.params}, {"chart", s.chart}};
}

void from_json(const nlohmann::json& j, MapSpec& s) {
  try {
    s.name = j.at("name").get<std::string>();
    s.params = j.at("params").get<std::map<std::string, double>>();
    s.chart = j.at("chart").get<ChartSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed map spec: ") + e.what());
  }
}

LiftMap::LiftMap(MapSpec spec, PlaneFn forward, PlaneFn inverse, Exactness exactness,
                 double step)
    : spec_(std::move(spec)),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      exactness_(exactness),
      step_(step) {
  spec_.chart.validate();
  if (!forward_) throw BadParameter("lift map '" + spec_.name + "' has no forward evaluation");
}

LiftPoint LiftMap::inverse(const LiftPoint& p) const {
  if (!inverse_) throw MissingInverse("map '" + spec_.name + "' has no inverse");
  return inverse_(p);
}

LiftPoint iterate(const LiftMap& m, LiftPoint p, long n) {
  if (n < 0 && !m.has_inverse()) {
    throw MissingInverse("backward iteration of '" + m.name() + "'");
  }
  const ChartSpec& chart = m.chart();
  const long steps = n < 0 ? -n : n;
  for (long i = 0; i < steps; ++i) {
    p = n < 0 ? m.inverse(p) : m(p);
    if (!chart.admits(p.y) || !std::isfinite(p.x)) {
      std::ostringstream msg;
      msg << std::setprecision(17) << "orbit of '" << m.name() << "' left the chart at step "
          << (i + 1) << " (y = " << p.y << ")";
      throw FiberEscape(msg.str());
    }
  }
  return p;
}

LiftMap compose_translation(const LiftMap& m, long k) {
  MapSpec spec = m.spec();
  spec.params["deck_shift"] = spec.param("deck_shift", 0.0) + static_cast<double>(k);
  const double shift = static_cast<double>(k);
  PlaneFn fwd = [m, shift](const LiftPoint& p) { return translate(m(p), shift); };
  PlaneFn inv;
  if (m.has_inverse()) {
    inv = [m, shift](const LiftPoint& p) { return m.inverse(translate(p, -shift)); };
  }
  return LiftMap(std::move(spec), std::move(fwd), std::move(inv), m.exactness(), m.step());
}

LiftMap return_map(const LiftMap& m, long p, long q) {
  if (q < 1) throw BadParameter("return map needs q >= 1");
  MapSpec spec = m.spec();
  spec.params["return_p"] = static_cast<double>(p);
  spec.params["return_q"] = static_cast<double>(q);
  const double shift = -static_cast<double>(p);
  PlaneFn fwd = [m, q, shift](const LiftPoint& z) {
    LiftPoint w = z;
    for (long i = 0; i < q; ++i) w = m(w);
    return translate(w, shift);
  };
  PlaneFn inv;
  if (m.has_inverse()) {
    inv = [m, q, shift](const LiftPoint& z) {
      LiftPoint w = translate(z, -shift);
      for (long i = 0; i < q; ++i) w = m.inverse(w);
      return w;
    };
  }
  return LiftMap(std::move(spec), std::move(fwd), std::move(inv), m.exactness(), m.step());
}

EquivarianceReport check_equivariance(const LiftMap& m, int samples, double tol) {
  EquivarianceReport report;
  const double golden = 0.6180339887498949;
  const double silver = 0.4142135623730951;
  for (int i = 0; i < samples; ++i) {
    const double x = wrap_turns(golden * i) + static_cast<double>(i % 7 - 3);
    const double y = 0.05 + 0.9 * wrap_turns(0.25 + silver * i);
    LiftPoint a;
    LiftPoint b;
    try {
      a = m(LiftPoint{x, y});
      b = m(LiftPoint{x + 1.0, y});
    } catch (const OutsideDomain&) {
      continue;
    }
    const double defect = norm(b - a - LiftPoint{1.0, 0.0});
    report.max_defect = std::max(report.max_defect, defect);
    ++report.samples_used;
  }
  report.pass = report.samples_used > 0 && report.max_defect < tol;
  return report;
}

void write_orbit_csv(std::ostream& out, const LiftMap& m, LiftPoint p, long steps) {
  out << "n,x,y\n" << std::setprecision(17);
  out << 0 << ',' << p.x << ',' << p.y << '\n';
  for (long n = 1; n <= steps; ++n) {
    p = iterate(m, p, 1);
    out << n << ',' << p.x << ',' << p.y << '\n';
  }
}

}  // namespace annulab
