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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/fields.hpp"

namespace kinsde
{
/// Points on phase space: the origin plus, for each of `radii` log-spaced
/// radii in [r_min, r_max], `directions` random unit directions.
struct SampleSpec
{
    double r_min = 0.1;
    double r_max = 20.0;
    int radii = 40;
    int directions = 32;
    std::uint64_t seed = 7;
    /// Shell sample count for the epsilon-ball supremum.
    int shell_points = 32;
    /// Per radius, the left side is maximized over the sphere by projected
    /// gradient ascent from this many of the worst sampled directions. V is
    /// constant on spheres, so these are also the smallest margins.
    int refine_starts = 2;

    std::vector<std::vector<double>> enumerate(int dims) const;
    std::string describe() const;
};

/// Offsets u with |u| <= 1 standing in for the unit ball in R^d.
std::vector<std::vector<double>> shell_offsets(int d, int count);

struct DriftPoint
{
    std::vector<double> x;
    std::vector<double> y;
    double v = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< K - (lhs + Phi(V)); rhs - lhs up to rounding
    bool flagged = false;  ///< non-finite derivative or field value
};

struct DriftConditionReport
{
    std::vector<DriftPoint> points;
    double K = 0.0;
    PhiFamily phi;
    double epsilon = 0.0;
    double min_margin = 0.0;
    std::size_t worst = 0;
    std::size_t flagged = 0;
    bool holds = false;
    std::string domain;

    std::string verdict() const;
};

/// Drift part of the drift-condition left side at one point, with the measure argument
/// at the point mass in the origin and t = 0.
double b3_lhs(const CoefficientSet& coeffs,
              const LyapunovV& V,
              double epsilon,
              const std::vector<std::vector<double>>& shell,
              ConstVec x,
              ConstVec y);

DriftConditionReport check_b3(const CoefficientSet& coeffs,
                              const LyapunovV& V,
                              const PhiFamily& phi,
                              double K,
                              double epsilon,
                              const SampleSpec& sample,
                              int workers = 0);

struct ConstantSearch
{
    double c0 = 0.0;
    double K = 0.0;
    bool at_cap = false;  ///< c0 hit the search cap; every larger value may also work
    DriftConditionReport report;
};

struct SearchOptions
{
    /// K is the max of LHS + Phi(V) over sample points with radius at most
    /// core_fraction * r_max; the remaining points must then satisfy the drift condition.
    double core_fraction = 0.5;
    double c0_min = 1e-6;
    double c0_cap = 1e6;
    int workers = 0;
};

/// Largest c0 (by doubling then bisection) for which check_b3 holds.
/// Throws NumericError "condition not certifiable on this domain" when even
/// c0_min fails.
ConstantSearch search_constants(const CoefficientSet& coeffs,
                                const LyapunovV& V,
                                PhiFamily::Kind kind,
                                double beta,
                                double epsilon,
                                const SampleSpec& sample,
                                const SearchOptions& opts = {});

struct GrowthRatioReport
{
    std::vector<double> radii;
    std::vector<double> shell_max;
    bool vanishing = false;
};

/// sup over y' in B_eps(y) of (|grad_y V| + |hess_yy V|) / min(V, Phi(V)),
/// maximized over points of each phase-space sphere.
GrowthRatioReport check_growth_ratios(const LyapunovV& V,
                                      const PhiFamily& phi,
                                      std::vector<double> radii,
                                      double epsilon,
                                      int directions = 64,
                                      int shell_points = 32);
}  // namespace kinsde
