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

#include "kinsde/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinsde/errors.hpp"
#include "kinsde/parallel.hpp"
#include "kinsde/stats.hpp"

namespace kinsde
{
PhaseState::PhaseState(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
{
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x_.begin(), x_.end(), finite) || !std::all_of(y_.begin(), y_.end(), finite))
        throw ValidationError("PhaseState: non-finite coordinate");
}

bool AdmissiblePair::admissible(double p, double q, int d2)
{
    return p > 2.0 && q > 2.0 && std::isfinite(p) && std::isfinite(q) && d2 >= 1 &&
           static_cast<double>(d2) / p + 2.0 / q < 1.0;
}

AdmissiblePair::AdmissiblePair(double p, double q, int d2) : p_(p), q_(q)
{
    if (!admissible(p, q, d2))
    {
        std::ostringstream os;
        os << "(p, q) = (" << p << ", " << q << ") is not admissible for d2 = " << d2
           << ": need p, q > 2 and d2/p + 2/q < 1";
        throw ValidationError(os.str());
    }
}

std::size_t HistogramSpec::cell_count() const
{
    std::size_t n = 1;
    for (int b : bins) n *= static_cast<std::size_t>(std::max(b, 0));
    return n;
}

HistogramSpec HistogramSpec::uniform(int dims, double lo, double hi, int bins_per_axis)
{
    return {std::vector<double>(dims, lo), std::vector<double>(dims, hi), std::vector<int>(dims, bins_per_axis)};
}

std::string to_string(Scheme s)
{
    return s == Scheme::tamed ? "tamed" : "euler";
}

Scheme scheme_from_string(const std::string& s)
{
    if (s == "euler") return Scheme::euler;
    if (s == "tamed") return Scheme::tamed;
    throw ValidationError("unknown scheme '" + s + "' (expected euler or tamed)");
}

std::size_t SimConfig::steps() const
{
    if (!(h > 0.0) || !(T > 0.0)) return 0;
    return static_cast<std::size_t>(std::llround(T / h));
}

double EmpiricalLaw::total_weight() const
{
    if (weights.empty()) return static_cast<double>(size());
    return compensated_sum(weights);
}

EmpiricalLaw EmpiricalLaw::point_mass(const PhaseState& s)
{
    return EmpiricalLaw{s.d1(), s.d2(), s.x(), s.y(), {}};
}

std::size_t MeasureFlow::nearest_slice(double t) const
{
    if (times.empty()) throw ValidationError("empty measure flow");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const auto hi = static_cast<std::size_t>(it - times.begin());
    return (t - times[hi - 1] <= *it - t) ? hi - 1 : hi;
}

MeasureFlow MeasureFlow::constant(const EmpiricalLaw& law, std::vector<double> times)
{
    MeasureFlow flow;
    flow.slices.assign(times.size(), law);
    flow.times = std::move(times);
    return flow;
}

bool ValidationReport::ok() const
{
    return std::none_of(items.begin(), items.end(), [](const Violation& v) { return v.severity == Severity::error; });
}

bool ValidationReport::has(const std::string& fragment) const
{
    return std::any_of(items.begin(), items.end(),
                       [&](const Violation& v) { return v.what.find(fragment) != std::string::npos; });
}

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    for (const auto& v : items) os << (v.severity == Severity::error ? "error: " : "warning: ") << v.what << '\n';
    return os.str();
}

ValidationReport validate_config(const SimConfig& cfg,
                                 const CoefficientSet& coeffs,
                                 std::span<const std::pair<double, double>> pairs)
{
    ValidationReport r;
    const auto error = [&](std::string s) { r.items.push_back({Severity::error, std::move(s)}); };
    const auto warn = [&](std::string s) { r.items.push_back({Severity::warning, std::move(s)}); };

    if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) error("nonpositive step h");
    if (!(cfg.T >= cfg.h) || !std::isfinite(cfg.T)) error("horizon T must satisfy T >= h");
    if (cfg.N < 1) error("particle count N must be >= 1");
    if (cfg.h > 0.0 && cfg.T > 0.0)
    {
        const double ratio = cfg.T / cfg.h;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) error("T/h is not an integer");
    }
    if (cfg.d1 < 1 || cfg.d2 < 1 || cfg.m < 1) error("dimensions d1, d2, m must be >= 1");
    if (cfg.d1 != coeffs.d1 || cfg.d2 != coeffs.d2 || cfg.m != coeffs.m)
        error("config dimensions do not match the coefficient set");

    const auto& hs = cfg.hist;
    if (hs.dims() != cfg.d1 + cfg.d2 || hs.min.size() != hs.bins.size() || hs.max.size() != hs.bins.size())
        error("histogram spec must have d1 + d2 axes");
    else
    {
        for (int a = 0; a < hs.dims(); ++a)
        {
            if (hs.bins[a] < 2) error("histogram bins per axis must be >= 2");
            if (!(hs.max[a] > hs.min[a])) error("histogram box has empty axis " + std::to_string(a));
        }
    }

    for (const auto& [p, q] : pairs)
    {
        if (!AdmissiblePair::admissible(p, q, cfg.d2))
        {
            std::ostringstream os;
            os << "(p, q) = (" << p << ", " << q << ") violates d2/p + 2/q < 1";
            error(os.str());
        }
    }

    const auto& sb = coeffs.sigma_bounds;
    if (!(sb.sigma_sup > 0.0) || !std::isfinite(sb.sigma_sup) || !(sb.inverse_gram_sup > 0.0) ||
        !std::isfinite(sb.inverse_gram_sup))
        warn("sigma bounds not finite and positive: noise is degenerate");

    if (!coeffs.z1 || !coeffs.z2 || !coeffs.sigma) error("coefficient set is missing z1, z2 or sigma");
    if (coeffs.classical == coeffs.interaction.has_value())
        error("classical flag disagrees with the presence of a measure-dependent term");
    if (coeffs.interaction && coeffs.interaction->kappa < 0.0) error("interaction strength kappa must be >= 0");
    if (coeffs.growth == GrowthClass::superlinear && cfg.scheme != Scheme::tamed)
        error("superlinear drift requires the tamed scheme");
    return r;
}

std::vector<std::vector<double>> CenterSet::enumerate() const
{
    std::vector<std::vector<double>> out;
    const std::size_t dims = min.size();
    if (dims > 0 && points_per_axis > 0)
    {
        std::size_t total = 1;
        for (std::size_t a = 0; a < dims; ++a) total *= static_cast<std::size_t>(points_per_axis);
        out.reserve(total + atoms.size());
        for (std::size_t flat = 0; flat < total; ++flat)
        {
            std::vector<double> c(dims);
            std::size_t rest = flat;
            for (std::size_t a = 0; a < dims; ++a)
            {
                const auto k = rest % static_cast<std::size_t>(points_per_axis);
                rest /= static_cast<std::size_t>(points_per_axis);
                c[a] = points_per_axis == 1 ? 0.5 * (min[a] + max[a])
                                            : min[a] + (max[a] - min[a]) * static_cast<double>(k) /
                                                           static_cast<double>(points_per_axis - 1);
            }
            out.push_back(std::move(c));
        }
    }
    out.insert(out.end(), atoms.begin(), atoms.end());
    return out;
}

double ball_lp_integral(const SpaceTimeScalar& f, double t, ConstVec center, double p, int cells_per_axis)
{
    const std::size_t dims = center.size();
    const double width = 2.0 / cells_per_axis;
    const double volume = std::pow(width, static_cast<double>(dims));
    std::size_t total = 1;
    for (std::size_t a = 0; a < dims; ++a) total *= static_cast<std::size_t>(cells_per_axis);

    std::vector<double> point(dims);
    CompensatedSum acc;
    for (std::size_t flat = 0; flat < total; ++flat)
    {
        std::size_t rest = flat;
        double r2 = 0.0;
        for (std::size_t a = 0; a < dims; ++a)
        {
            const auto k = rest % static_cast<std::size_t>(cells_per_axis);
            rest /= static_cast<std::size_t>(cells_per_axis);
            const double offset = -1.0 + (static_cast<double>(k) + 0.5) * width;
            r2 += offset * offset;
            point[a] = center[a] + offset;
        }
        if (r2 > 1.0) continue;
        acc.add(std::pow(std::abs(f(t, point)), p) * volume);
    }
    return acc.value();
}

LocalizedNorm localized_lpq_norm(const SpaceTimeScalar& f,
                                 const AdmissiblePair& pair,
                                 const NormGrid& grid,
                                 const CenterSet& centers,
                                 int workers)
{
    const auto points = centers.enumerate();
    if (points.empty()) throw ValidationError("localized_lpq_norm: no centers");
    const double dt = grid.horizon / grid.time_nodes;
    std::vector<double> per_center(points.size());

    parallel_for(points.size(), workers, [&](std::size_t c) {
        CompensatedSum time_integral;
        for (int k = 0; k < grid.time_nodes; ++k)
        {
            const double t = (k + 0.5) * dt;
            const double lp = std::pow(ball_lp_integral(f, t, points[c], pair.p(), grid.cells_per_axis), 1.0 / pair.p());
            time_integral.add(std::pow(lp, pair.q()) * dt);
        }
        per_center[c] = std::pow(time_integral.value(), 1.0 / pair.q());
    });

    LocalizedNorm result;
    for (std::size_t c = 0; c < points.size(); ++c)
    {
        if (!std::isfinite(per_center[c]))
        {
            std::ostringstream os;
            os << "norm diverged at center (";
            for (std::size_t a = 0; a < points[c].size(); ++a) os << (a ? ", " : "") << points[c][a];
            os << ")";
            throw NumericError(os.str());
        }
        if (c == 0 || per_center[c] > result.value)
        {
            result.value = per_center[c];
            result.argmax_center = points[c];
        }
    }
    return result;
}
}  // namespace kinsde
