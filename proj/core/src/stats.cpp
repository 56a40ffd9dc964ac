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

#include "kinsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinsde/rng.hpp"

namespace kinsde
{
void CompensatedSum::add(double v)
{
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        carry_ += (sum_ - t) + v;
    else
        carry_ += (v - t) + sum_;
    sum_ = t;
}

double compensated_sum(std::span<const double> values)
{
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value();
}

MeanEstimate mean_estimate(std::span<const double> values)
{
    MeanEstimate est;
    est.n = values.size();
    if (values.empty()) return est;
    est.mean = compensated_sum(values) / static_cast<double>(values.size());
    if (values.size() < 2) return est;
    CompensatedSum ss;
    for (double v : values) ss.add((v - est.mean) * (v - est.mean));
    const double var = ss.value() / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
    return est;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 paired points");
    const auto n = static_cast<double>(x.size());
    const double mx = compensated_sum(x) / n;
    const double my = compensated_sum(y) / n;
    CompensatedSum sxx, sxy, syy;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
        syy.add((y[i] - my) * (y[i] - my));
    }
    LineFit fit;
    if (sxx.value() <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    CompensatedSum ssr;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssr.add(r * r);
    }
    fit.r_squared = syy.value() > 0.0 ? 1.0 - ssr.value() / syy.value() : 0.0;
    if (x.size() > 2) fit.slope_std_error = std::sqrt(ssr.value() / (n - 2.0) / sxx.value());
    return fit;
}

BootstrapInterval bootstrap_mean_interval(std::span<const double> values,
                                          std::size_t replicates,
                                          std::uint64_t seed,
                                          double level)
{
    if (values.empty()) throw std::invalid_argument("bootstrap of empty sample");
    std::vector<double> means(replicates);
    const std::size_t n = values.size();
    for (std::size_t r = 0; r < replicates; ++r)
    {
        const StreamAddress addr{seed, StreamTag::bootstrap, r};
        CompensatedSum s;
        for (std::size_t j = 0; j < n; ++j)
        {
            const auto pick = std::min(n - 1, static_cast<std::size_t>(uniform_at(addr, j) * static_cast<double>(n)));
            s.add(values[pick]);
        }
        means[r] = s.value() / static_cast<double>(n);
    }
    const double tail = 0.5 * (1.0 - level);
    return {quantile(means, tail), quantile(means, 1.0 - tail)};
}
}  // namespace kinsde
