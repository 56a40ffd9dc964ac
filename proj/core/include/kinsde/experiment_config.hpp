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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/integrators.hpp"
#include "kinsde/io.hpp"

namespace kinsde
{
/// Every key accepted in an experiment config file.
const std::set<std::string>& known_config_keys();

/// "[(0,1.0), (2,0.5)]": each tuple lists d location coordinates then the weight.
std::vector<RieszAtom> parse_atoms(const std::string& text, int d);

/// Fields from `drift`, `singular`, `noise.sigma` and `interaction` keys.
CoefficientSet build_coefficients(const KvConfig& kv, int d1, int d2, int m);

/// Initial law from `<prefix>.kind`, `<prefix>.x`, `<prefix>.y`, `<prefix>.spread`.
InitialLaw build_initial_law(const KvConfig& kv, const std::string& prefix, int d1, int d2);

struct Experiment
{
    KvConfig kv;
    SimConfig sim;
    CoefficientSet coeffs;
    InitialLaw init;
    std::optional<InitialLaw> init2;
    std::string config_hash;
};

Experiment build_experiment(const KvConfig& kv);
Experiment load_experiment(const std::filesystem::path& path);
}  // namespace kinsde
