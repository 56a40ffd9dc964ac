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
#include <span>
#include <vector>

namespace kinsde
{
/// Neumaier-compensated sum; order of add() calls is the only source of
/// rounding differences.
class CompensatedSum
{
public:
    void add(double v);
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double compensated_sum(std::span<const double> values);

struct MeanEstimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean and its standard error (unbiased variance / n).
MeanEstimate mean_estimate(std::span<const double> values);

/// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct LineFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_std_error = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Percentile bootstrap interval for the mean.
struct BootstrapInterval
{
    double lo = 0.0;
    double hi = 0.0;
};

BootstrapInterval bootstrap_mean_interval(std::span<const double> values,
                                          std::size_t replicates,
                                          std::uint64_t seed,
                                          double level = 0.95);
}  // namespace kinsde
