// Copyright 2026 The kinsde Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace kinsde
{
/// Numerical failure of a well-formed computation: blowup, divergence,
/// degenerate reweighting, solver breakdown. The CLI maps it to exit code 3.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DegenerateReweighting : public NumericError
{
public:
    using NumericError::NumericError;
};

/// Input rejected before any numerics ran. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};
}  // namespace kinsde
