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

// Name-based construction of every map the library knows, so a serialized
// MapSpec is enough to rebuild the exact lift a certificate refers to.

#pragma once

#include <string>
#include <vector>

#include "annulab/lift.hpp"

namespace annulab {

/// Zoo variants, billiard tables ("billiard-circle", "billiard-ellipse") and
/// the horseshoe ("TH"). The wrappers recorded by compose_translation and
/// return_map (deck_shift, return_p / return_q) are re-applied. The result's
/// spec equals `spec`.
LiftMap build_map(const MapSpec& spec);

/// Accepts "NAME", "NAME:key=value,...", or "variant=NAME,key=value,...".
/// The keys `chart` (open | closed) and `margin` set the chart. Raises
/// BadParameter on malformed input.
MapSpec parse_map_arg(const std::string& text);

std::vector<std::string> known_map_names();

}  // namespace annulab
