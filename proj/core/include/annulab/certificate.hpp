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

// Self-contained JSON certificates:
//
//   {kind, tool, version, map: MapSpec, payload, reverify: {map, checks}}
//
// `reverify` replays only the witness checks recorded in the payload; no
// search is rerun. A certificate whose two map copies disagree fails.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/billiards.hpp"
#include "annulab/boxdyn.hpp"
#include "annulab/fixedpoint.hpp"
#include "annulab/horseshoe.hpp"
#include "annulab/lift.hpp"

namespace annulab {

inline constexpr const char* kToolName = "annulab";
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json make_certificate(const std::string& kind, const MapSpec& map,
                                nlohmann::json payload);

nlohmann::json returning_payload(const ReturningWitness& w,
                                 const std::optional<BoxSet>& chain_recurrent = std::nullopt);
nlohmann::json chain_payload(const DiskChain& c);
nlohmann::json fixed_payload(const LiftMap& m, const FixedPointSearch& s,
                             const FixedPointOptions& opts);
nlohmann::json periodic_payload(const LiftMap& m, const PeriodicSearch& s, long p, long q,
                                const FixedPointOptions& opts);
nlohmann::json window_payload(const WindowReport& w, const GraphOptions& opts);
nlohmann::json attractor_payload(const AttractorReport& a, const WindowReport& w,
                                 const GraphOptions& opts);
nlohmann::json drift_payload(const DriftClass& d, const DriftOptions& opts,
                             const WindowReport& w);
nlohmann::json billiard_payload(const TableSpec& table, std::span<const Bumper> bumpers,
                                const AvoidanceCertificate& cert);
nlohmann::json horseshoe_payload(const HorseshoeClaims& c);

struct ReverifyResult {
  std::string kind;
  bool ok = true;
  std::vector<std::string> failures;
};

/// Raises SchemaError when the document is not a certificate of a known kind.
ReverifyResult reverify(const nlohmann::json& cert);

}  // namespace annulab
