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

// Parametric example maps. Every variant is a homeomorphism of the open
// annulus presented by its lift:
//
//   RIGID(alpha, lambda)     (x + alpha, h(y))
//   TW                       (x + y - 1/2, y)
//   DISS_ROT(alpha, lambda)  same closed form as RIGID
//   PT(alpha, gamma, beta, lambda)
//                            (x + gamma/(2 pi) sin(2 pi x) + alpha + beta (y - 1/2), h(y))
//   RNF(alpha, beta, lambda) PT with gamma = 0: small drift, strong shear
//   IZ(mu)                   time-one map of
//                            (sin^2(pi x) + (y - 1/2)^2, mu (1/2 - y) y (1 - y))
//
// where h(y) = phi^{-1}(lambda phi(y)), phi(y) = tan(pi (y - 1/2)), is an
// increasing bijection of (0, 1) contracting towards the circle y = 1/2.

#pragma once

#include <functional>

#include "annulab/lift.hpp"

namespace annulab {

/// h_lambda. Points on or beyond the fiber ends are left where they are.
double fiber_contraction(double lambda, double y);

/// Builds one of RIGID, TW, DISS_ROT, PT, RNF, IZ. Raises BadParameter for
/// an unknown name or a parameter outside its admissible range.
LiftMap make_map(const MapSpec& spec);

bool is_zoo_name(const std::string& name);

/// Velocity field on the cover; must be 1-periodic in x.
using VectorField = std::function<LiftPoint(const LiftPoint&)>;

/// Time-one map of `field` by fixed-step classical RK4; the inverse
/// integrates backwards in time with the same step.
LiftMap vector_field_time_one(MapSpec spec, VectorField field, double step = 1.0 / 64.0);

namespace zoo {

MapSpec rigid(double alpha, double lambda = 0.5);
MapSpec twist();
MapSpec diss_rot(double alpha, double lambda);
MapSpec pt(double alpha, double gamma, double beta, double lambda);
MapSpec rnf(double alpha, double beta, double lambda);
MapSpec iz(double mu);

}  // namespace zoo

}  // namespace annulab
