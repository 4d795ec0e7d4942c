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

#pragma once

#include <stdexcept>
#include <string>

namespace annulab {

/// Base class of every error raised by the library. "Not found at this
/// scale" outcomes are not errors; they come back as empty optionals or
/// status enums.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ANNULAB_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

ANNULAB_DEFINE_ERROR(MissingInverse);
ANNULAB_DEFINE_ERROR(FiberEscape);
ANNULAB_DEFINE_ERROR(OutsideDomain);
ANNULAB_DEFINE_ERROR(BadParameter);
ANNULAB_DEFINE_ERROR(DegenerateChord);
ANNULAB_DEFINE_ERROR(BoundaryZero);
ANNULAB_DEFINE_ERROR(OverlapError);
ANNULAB_DEFINE_ERROR(LinkVerificationFailed);
ANNULAB_DEFINE_ERROR(PreconditionFailed);
ANNULAB_DEFINE_ERROR(OrbitLeavesN);
ANNULAB_DEFINE_ERROR(ClaimFailed);
ANNULAB_DEFINE_ERROR(SchemaError);

#undef ANNULAB_DEFINE_ERROR

}  // namespace annulab
