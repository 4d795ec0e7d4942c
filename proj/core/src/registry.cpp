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

#include "annulab/registry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "annulab/billiards.hpp"
#include "annulab/errors.hpp"
#include "annulab/horseshoe.hpp"
#include "annulab/zoo.hpp"

namespace annulab {
namespace {

LiftMap with_spec(const LiftMap& inner, const MapSpec& spec) {
  PlaneFn fwd = [inner](const LiftPoint& p) { return inner(p); };
  PlaneFn inv;
  if (inner.has_inverse()) inv = [inner](const LiftPoint& p) { return inner.inverse(p); };
  return LiftMap(spec, std::move(fwd), std::move(inv), inner.exactness(), inner.step());
}

long integral_param(const MapSpec& spec, const std::string& key) {
  const double v = spec.param(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw BadParameter(key + " must be an integer");
  return static_cast<long>(v);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw BadParameter("parameter '" + key + "' needs a finite number, got '" + text + "'");
  }
  return v;
}

}  // namespace

LiftMap build_map(const MapSpec& spec) {
  spec.chart.validate();
  if (spec.has("return_p") || spec.has("return_q")) {
    MapSpec base = spec;
    base.params.erase("return_p");
    base.params.erase("return_q");
    const long p = integral_param(spec, "return_p");
    const long q = integral_param(spec, "return_q");
    return with_spec(return_map(build_map(base), p, q), spec);
  }
  if (spec.has("deck_shift")) {
    MapSpec base = spec;
    base.params.erase("deck_shift");
    return with_spec(compose_translation(build_map(base), integral_param(spec, "deck_shift")),
                     spec);
  }
  if (is_zoo_name(spec.name)) return make_map(spec);
  if (spec.name == "billiard-circle" || spec.name == "billiard-ellipse") {
    return with_spec(billiard_lift_map(table_from_spec(spec)), spec);
  }
  if (spec.name == "TH") {
    return with_spec(make_horseshoe(HorseshoeSpec::from_map_spec(spec)), spec);
  }
  throw BadParameter("unknown map '" + spec.name + "'");
}

MapSpec parse_map_arg(const std::string& text) {
  MapSpec spec;
  std::string rest;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    spec.name = trim(text.substr(0, colon));
    rest = text.substr(colon + 1);
  } else if (text.find('=') != std::string::npos) {
    rest = text;
  } else {
    spec.name = trim(text);
  }
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw BadParameter("expected key=value, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    if (key == "variant" || key == "name") {
      spec.name = value;
    } else if (key == "chart") {
      if (value != "open" && value != "closed") throw BadParameter("chart must be open or closed");
      spec.chart.kind = value == "open" ? ChartKind::open : ChartKind::closed;
    } else if (key == "margin") {
      spec.chart.margin = parse_number(key, value);
    } else {
      spec.params[key] = parse_number(key, value);
    }
  }
  if (spec.name.empty()) throw BadParameter("map name missing in '" + text + "'");
  const auto names = known_map_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    throw BadParameter("unknown map '" + spec.name + "'");
  }
  spec.chart.validate();
  return spec;
}

std::vector<std::string> known_map_names() {
  return {"RIGID", "TW", "DISS_ROT", "PT", "RNF", "IZ", "billiard-circle", "billiard-ellipse", "TH"};
}

}  // namespace annulab
