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


// Orchestration behind the `annulab` executable. A RunConfig fully
// determines the files written, so equal configs give byte-identical output.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annulab/lift.hpp"

namespace annulab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotFound = 2;

struct RunConfig {
  std::string command;
  std::optional<MapSpec> map;
  // Command parameters keyed by long flag name without dashes.
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  std::optional<double> tol;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;  // relative to out_dir, in write order
  std::string summary;
};

std::vector<std::string> command_names();

/// Library errors propagate; callers map them to kExitError.
RunResult run(const RunConfig& config);

}  // namespace annulab::cli
