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

#include "annulab/zoo.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "annulab/errors.hpp"

namespace annulab {
namespace {

constexpr double kPi = std::numbers::pi;

void require_contraction(const MapSpec& spec, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw BadParameter(spec.name + ": lambda must lie in (0, 1)");
  }
}

// Solves u + gamma/(2 pi) sin(2 pi u) = c; the left side is increasing for
// |gamma| < 1, so the root is unique and lies within gamma/(2 pi) of c.
double invert_circle_perturbation(double gamma, double c) {
  const double amp = gamma / (2.0 * kPi);
  double lo = c - std::abs(amp);
  double hi = c + std::abs(amp);
  double u = c;
  for (int it = 0; it < 100; ++it) {
    const double f = u + amp * std::sin(2.0 * kPi * u) - c;
    if (f == 0.0) return u;
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double df = 1.0 + gamma * std::cos(2.0 * kPi * u);
    double next = u - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-16 * std::max(1.0, std::abs(u))) return next;
    u = next;
  }
  return u;
}

LiftMap make_shear_family(const MapSpec& spec, double alpha, double gamma, double beta,
                          double lambda) {
  require_contraction(spec, lambda);
  if (!(std::abs(gamma) < 1.0)) throw BadParameter(spec.name + ": |gamma| must be < 1");
  const double amp = gamma / (2.0 * kPi);
  PlaneFn fwd = [=](const LiftPoint& p) {
    return LiftPoint{p.x + amp * std::sin(2.0 * kPi * p.x) + alpha + beta * (p.y - 0.5),
                     fiber_contraction(lambda, p.y)};
  };
  PlaneFn inv = [=](const LiftPoint& p) {
    const double y = fiber_contraction(1.0 / lambda, p.y);
    const double x = invert_circle_perturbation(gamma, p.x - alpha - beta * (y - 0.5));
    return LiftPoint{x, y};
  };
  return LiftMap(spec, std::move(fwd), std::move(inv));
}

LiftPoint rk4_step(const VectorField& field, const LiftPoint& z, double h) {
  const LiftPoint k1 = field(z);
  const LiftPoint k2 = field({z.x + 0.5 * h * k1.x, z.y + 0.5 * h * k1.y});
  const LiftPoint k3 = field({z.x + 0.5 * h * k2.x, z.y + 0.5 * h * k2.y});
  const LiftPoint k4 = field({z.x + h * k3.x, z.y + h * k3.y});
  return {z.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          z.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
}

}  // namespace

double fiber_contraction(double lambda, double y) {
  if (!(y > 0.0 && y < 1.0)) return y;
  const double phi = std::tan(kPi * (y - 0.5));
  return 0.5 + std::atan(lambda * phi) / kPi;
}

LiftMap vector_field_time_one(MapSpec spec, VectorField field, double step) {
  if (!(step > 0.0) || !(step <= 1.0)) throw BadParameter("integration step must lie in (0, 1]");
  const long steps = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(steps) * step - 1.0) > 1e-12) {
    throw BadParameter("integration step must divide unit time");
  }
  PlaneFn fwd = [field, step, steps](const LiftPoint& p) {
    LiftPoint z = p;
    for (long i = 0; i < steps; ++i) z = rk4_step(field, z, step);
    return z;
  };
  PlaneFn inv = [field, step, steps](const LiftPoint& p) {
    LiftPoint z = p;
    for (long i = 0; i < steps; ++i) z = rk4_step(field, z, -step);
    return z;
  };
  return LiftMap(std::move(spec), std::move(fwd), std::move(inv), Exactness::integrated, step);
}

bool is_zoo_name(const std::string& name) {
  return name == "RIGID" || name == "TW" || name == "DISS_ROT" || name == "PT" ||
         name == "RNF" || name == "IZ";
}

LiftMap make_map(const MapSpec& spec) {
  const std::string& v = spec.name;
  if (v == "RIGID" || v == "DISS_ROT") {
    const double alpha = spec.param("alpha", v == "RIGID" ? 0.25 : 0.318);
    const double lambda = spec.param("lambda", v == "RIGID" ? 0.5 : 0.9);
    require_contraction(spec, lambda);
    PlaneFn fwd = [=](const LiftPoint& p) {
      return LiftPoint{p.x + alpha, fiber_contraction(lambda, p.y)};
    };
    PlaneFn inv = [=](const LiftPoint& p) {
      return LiftPoint{p.x - alpha, fiber_contraction(1.0 / lambda, p.y)};
    };
    return LiftMap(spec, std::move(fwd), std::move(inv));
  }
  if (v == "TW") {
    PlaneFn fwd = [](const LiftPoint& p) { return LiftPoint{p.x + p.y - 0.5, p.y}; };
    PlaneFn inv = [](const LiftPoint& p) { return LiftPoint{p.x - p.y + 0.5, p.y}; };
    return LiftMap(spec, std::move(fwd), std::move(inv));
  }
  if (v == "PT") {
    return make_shear_family(spec, spec.param("alpha", 0.0), spec.param("gamma", 0.1),
                             spec.param("beta", 0.0), spec.param("lambda", 0.5));
  }
  if (v == "RNF") {
    return make_shear_family(spec, spec.param("alpha", 0.05), 0.0, spec.param("beta", 6.0),
                             spec.param("lambda", 0.9));
  }
  if (v == "IZ") {
    const double mu = spec.param("mu", 1.0);
    if (!(mu > 0.0)) throw BadParameter("IZ: mu must be positive");
    const double step = spec.param("step", 1.0 / 64.0);
    VectorField field = [mu](const LiftPoint& p) {
      const double s = std::sin(kPi * p.x);
      const double dy = p.y - 0.5;
      return LiftPoint{s * s + dy * dy, mu * (0.5 - p.y) * p.y * (1.0 - p.y)};
    };
    return vector_field_time_one(spec, std::move(field), step);
  }
  throw BadParameter("unknown map variant '" + v + "'");
}

namespace zoo {

MapSpec rigid(double alpha, double lambda) {
  return {"RIGID", {{"alpha", alpha}, {"lambda", lambda}}, {}};
}

MapSpec twist() { return {"TW", {}, {}}; }

MapSpec diss_rot(double alpha, double lambda) {
  return {"DISS_ROT", {{"alpha", alpha}, {"lambda", lambda}}, {}};
}

MapSpec pt(double alpha, double gamma, double beta, double lambda) {
  return {"PT", {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"lambda", lambda}}, {}};
}

MapSpec rnf(double alpha, double beta, double lambda) {
  return {"RNF", {{"alpha", alpha}, {"beta", beta}, {"lambda", lambda}}, {}};
}

MapSpec iz(double mu) { return {"IZ", {{"mu", mu}}, {}}; }

}  // namespace zoo

}  // namespace annulab
