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

#include "kinsde/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "kinsde/errors.hpp"
#include "kinsde/parallel.hpp"
#include "kinsde/rng.hpp"
#include "kinsde/stats.hpp"

namespace kinsde
{
namespace
{
void require_same_binning(const HistogramLaw& a, const HistogramLaw& b)
{
    if (!(a.spec == b.spec) || a.mass.size() != b.mass.size())
        throw ValidationError("binning mismatch between histogram laws");
}

std::vector<double> bin_weights(const HistogramSpec& spec, const LyapunovV& V)
{
    HistogramLaw shape{spec, {}, 0.0};
    const std::size_t cells = spec.cell_count();
    std::vector<double> w(cells);
    for (std::size_t c = 0; c < cells; ++c)
    {
        const std::vector<double> z = shape.bin_center(c);
        w[c] = V.value(ConstVec(z.data(), V.d1()), ConstVec(z.data() + V.d1(), V.d2()));
    }
    return w;
}

double corner_weight(const HistogramSpec& spec, const LyapunovV& V)
{
    std::vector<double> z(spec.dims());
    for (int a = 0; a < spec.dims(); ++a) z[a] = std::max(std::abs(spec.min[a]), std::abs(spec.max[a]));
    return V.value(ConstVec(z.data(), V.d1()), ConstVec(z.data() + V.d1(), V.d2()));
}

double weighted_distance(const std::vector<double>& a,
                         double a_out,
                         const std::vector<double>& b,
                         double b_out,
                         const std::vector<double>* w,
                         double w_out)
{
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add((w ? (*w)[i] : 1.0) * std::abs(a[i] - b[i]));
    s.add(w_out * std::abs(a_out - b_out));
    return s.value();
}

std::vector<long long> cells_of(const EmpiricalLaw& law, const HistogramSpec& spec, int workers)
{
    if (spec.dims() != law.d1 + law.d2) throw ValidationError("histogram dimension differs from d1 + d2");
    const std::size_t n = law.size();
    std::vector<long long> cells(n);
    parallel_for(n, workers, [&](std::size_t i) {
        double z[64];
        const ConstVec x = law.x_of(i);
        const ConstVec y = law.y_of(i);
        std::copy(x.begin(), x.end(), z);
        std::copy(y.begin(), y.end(), z + x.size());
        cells[i] = histogram_cell(spec, ConstVec(z, x.size() + y.size()));
    });
    return cells;
}
}  // namespace

double HistogramLaw::total_mass() const
{
    CompensatedSum s;
    for (double m : mass) s.add(m);
    s.add(out_mass);
    return s.value();
}

std::vector<double> HistogramLaw::bin_center(std::size_t cell) const
{
    const int dims = spec.dims();
    std::vector<double> z(dims);
    for (int a = dims - 1; a >= 0; --a)
    {
        const auto nb = static_cast<std::size_t>(spec.bins[a]);
        const std::size_t idx = cell % nb;
        cell /= nb;
        const double width = (spec.max[a] - spec.min[a]) / static_cast<double>(nb);
        z[a] = spec.min[a] + (static_cast<double>(idx) + 0.5) * width;
    }
    return z;
}

long long histogram_cell(const HistogramSpec& spec, ConstVec point)
{
    long long cell = 0;
    for (int a = 0; a < spec.dims(); ++a)
    {
        const double v = point[a];
        if (!std::isfinite(v) || v < spec.min[a] || v >= spec.max[a]) return -1;
        const double width = (spec.max[a] - spec.min[a]) / spec.bins[a];
        auto idx = static_cast<long long>((v - spec.min[a]) / width);
        idx = std::min<long long>(idx, spec.bins[a] - 1);
        cell = cell * spec.bins[a] + idx;
    }
    return cell;
}

HistogramLaw histogram_of(const EmpiricalLaw& law, const HistogramSpec& spec, int workers)
{
    if (spec.dims() > 64) throw ValidationError("histogram supports at most 64 axes");
    const std::vector<long long> cells = cells_of(law, spec, workers);
    HistogramLaw h{spec, std::vector<double>(spec.cell_count(), 0.0), 0.0};
    std::vector<CompensatedSum> acc(h.mass.size());
    CompensatedSum out, total;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        const double w = law.weight(i);
        if (!(w > 0.0)) continue;
        total.add(w);
        if (cells[i] < 0)
            out.add(w);
        else
            acc[static_cast<std::size_t>(cells[i])].add(w);
    }
    const double t = total.value();
    if (!(t > 0.0)) throw NumericError("histogram of a law with zero total weight");
    for (std::size_t c = 0; c < acc.size(); ++c) h.mass[c] = acc[c].value() / t;
    h.out_mass = out.value() / t;
    return h;
}

double empirical_var_distance(const HistogramLaw& a, const HistogramLaw& b)
{
    require_same_binning(a, b);
    return weighted_distance(a.mass, a.out_mass, b.mass, b.out_mass, nullptr, 1.0);
}

double empirical_v_distance(const HistogramLaw& a, const HistogramLaw& b, const LyapunovV& V)
{
    require_same_binning(a, b);
    if (a.spec.dims() != V.d1() + V.d2()) throw ValidationError("V dimension differs from the histogram dimension");
    if (V.is_unit()) return empirical_var_distance(a, b);
    const std::vector<double> w = bin_weights(a.spec, V);
    return weighted_distance(a.mass, a.out_mass, b.mass, b.out_mass, &w, corner_weight(a.spec, V));
}

double bootstrap_noise_floor(const EmpiricalLaw& law,
                             const HistogramSpec& spec,
                             std::size_t replicates,
                             std::uint64_t seed,
                             const LyapunovV* V,
                             double level,
                             int workers)
{
    if (replicates == 0) throw ValidationError("bootstrap needs at least one replicate");
    const std::vector<long long> cells = cells_of(law, spec, workers);
    const std::size_t n = cells.size();
    std::vector<double> cdf(n);
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double w = law.weight(i);
        run += w > 0.0 ? w : 0.0;
        cdf[i] = run;
    }
    if (!(run > 0.0)) throw NumericError("bootstrap of a law with zero total weight");
    std::size_t alive = 0;
    for (std::size_t i = 0; i < n; ++i) alive += law.weight(i) > 0.0 ? 1 : 0;

    std::vector<double> w;
    double w_out = 1.0;
    if (V != nullptr && !V->is_unit())
    {
        w = bin_weights(spec, *V);
        w_out = corner_weight(spec, *V);
    }
    const std::size_t ncell = spec.cell_count();
    std::vector<double> dist(replicates);
    parallel_for(replicates, workers, [&](std::size_t r) {
        std::vector<double> a(ncell, 0.0), b(ncell, 0.0);
        double a_out = 0.0, b_out = 0.0;
        const double unit = 1.0 / static_cast<double>(alive);
        for (int side = 0; side < 2; ++side)
        {
            const StreamAddress addr{seed, StreamTag::bootstrap, 2 * r + static_cast<std::uint64_t>(side)};
            auto& target = side == 0 ? a : b;
            double& target_out = side == 0 ? a_out : b_out;
            for (std::size_t j = 0; j < alive; ++j)
            {
                const double u = uniform_at(addr, j) * run;
                auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
                const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
                if (cells[idx] < 0)
                    target_out += unit;
                else
                    target[static_cast<std::size_t>(cells[idx])] += unit;
            }
        }
        dist[r] = weighted_distance(a, a_out, b, b_out, w.empty() ? nullptr : &w, w_out);
    });
    return quantile(std::move(dist), level);
}

std::vector<double> distance_series(const Ensemble& ens, const HistogramLaw& reference, const LyapunovV* V, int workers)
{
    std::vector<double> out;
    out.reserve(ens.slices.size());
    for (const auto& slice : ens.slices)
    {
        const HistogramLaw h = histogram_of(slice, reference.spec, workers);
        out.push_back(V != nullptr ? empirical_v_distance(h, reference, *V) : empirical_var_distance(h, reference));
    }
    return out;
}

std::string to_string(DecayVerdict v)
{
    switch (v)
    {
        case DecayVerdict::decay_confirmed: return "decay_confirmed";
        case DecayVerdict::no_decay: return "no_decay";
        case DecayVerdict::insufficient_signal: return "insufficient_signal";
    }
    return "unknown";
}

DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> distances, double noise_floor)
{
    if (times.size() != distances.size()) throw ValidationError("times and distances differ in length");
    DecayFit fit;
    fit.times.assign(times.begin(), times.end());
    fit.distances.assign(distances.begin(), distances.end());
    fit.noise_floor = noise_floor;
    std::vector<double> t, logd;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (distances[i] > noise_floor && distances[i] > 0.0 && std::isfinite(distances[i]))
        {
            t.push_back(times[i]);
            logd.push_back(std::log(distances[i]));
        }
    }
    fit.used_points = t.size();
    if (t.size() < 4)
    {
        fit.verdict = DecayVerdict::insufficient_signal;
        return fit;
    }
    const LineFit line = fit_line(t, logd);
    fit.rate = -line.slope;
    fit.prefactor = std::exp(line.intercept);
    fit.r_squared = line.r_squared;
    fit.rate_std_error = line.slope_std_error;
    const bool significant = fit.rate > 1e-12 && fit.rate > 2.0 * fit.rate_std_error;
    fit.verdict = significant ? DecayVerdict::decay_confirmed : DecayVerdict::no_decay;
    return fit;
}

namespace
{
void require_superlinear(const PhiFamily& phi)
{
    if (phi.kind == PhiFamily::Kind::linear) throw ValidationError("H diverges at 0 for linear Φ");
    if (!(phi.c0 > 0.0) || !(phi.beta > 0.0)) throw ValidationError("superlinear Φ needs c0 > 0 and beta > 0");
}
}  // namespace

double h_integral(const PhiFamily& phi, double r)
{
    require_superlinear(phi);
    if (r <= 0.0) return 0.0;
    if (std::isinf(r)) return h_limit(phi);
    // t = s^p / (1 + s^p) turns int_0^r ds / (1 + s^p) into an incomplete beta
    const double p = 1.0 + phi.beta;
    const double a = 1.0 / p, b = 1.0 - a;
    const double rp = std::pow(r, p);
    if (rp <= 1.0) return boost::math::beta(a, b, rp / (1.0 + rp)) / (p * phi.c0);
    return (boost::math::beta(a, b) - boost::math::beta(b, a, 1.0 / (1.0 + rp))) / (p * phi.c0);
}

double h_limit(const PhiFamily& phi)
{
    require_superlinear(phi);
    // int_0^inf ds / (1 + s^p) = (pi / p) / sin(pi / p) for p > 1
    const double p = 1.0 + phi.beta;
    return (std::numbers::pi / p) / std::sin(std::numbers::pi / p) / phi.c0;
}

double h_inverse(const PhiFamily& phi, double r)
{
    require_superlinear(phi);
    if (r <= 0.0) return 0.0;
    if (r >= h_limit(phi)) return std::numeric_limits<double>::infinity();
    double hi = 1.0;
    while (h_integral(phi, hi) < r)
    {
        hi *= 2.0;
        if (std::isinf(hi)) return hi;
    }
    // H' = 1 / Phi
    const auto f = [&](double v) { return std::make_pair(h_integral(phi, v) - r, 1.0 / phi(v)); };
    std::uintmax_t iters = 100;
    return boost::math::tools::newton_raphson_iterate(f, 0.5 * hi, 0.0, hi, 50, iters);
}

std::vector<double> h_envelope(const PhiFamily& phi, double v0, double k, double lambda, std::span<const double> times)
{
    require_superlinear(phi);
    if (!(v0 >= 1.0)) throw ValidationError("envelope needs V0 >= 1");
    if (!(k > 0.0)) throw ValidationError("envelope needs k > 0");
    if (!(lambda > 0.0)) throw ValidationError("envelope needs lambda > 0");
    const double hv = h_integral(phi, v0);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times)
    {
        const double arg = hv - t / k;
        const double inv = arg <= 0.0 ? 0.0 : h_inverse(phi, arg);
        out.push_back(k * (1.0 + inv) * std::exp(-lambda * t));
    }
    return out;
}

double fit_envelope_k(const PhiFamily& phi,
                      double v0,
                      double lambda,
                      std::span<const double> times,
                      std::span<const double> distances)
{
    if (times.size() != distances.size() || times.empty())
        throw ValidationError("envelope fit needs matching non-empty series");
    const auto dominates = [&](double k) {
        const std::vector<double> env = h_envelope(phi, v0, k, lambda, times);
        for (std::size_t i = 0; i < env.size(); ++i)
            if (env[i] < distances[i]) return false;
        return true;
    };
    double hi = 1e-6;
    while (!dominates(hi))
    {
        hi *= 2.0;
        if (hi > 1e300) throw NumericError("no envelope constant dominates the distance series");
    }
    double lo = hi / 2.0;
    if (hi == 1e-6) lo = 0.0;
    for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (dominates(mid) ? hi : lo) = mid;
    }
    return hi;
}

MomentBoundReport moment_bound_check(std::span<const Ensemble> runs, const LyapunovV& V)
{
    if (runs.size() < 2) throw ValidationError("moment bound check needs at least two initial conditions");
    MomentBoundReport rep;
    for (const Ensemble& ens : runs)
    {
        if (ens.slices.size() < 2) throw ValidationError("moment bound check needs stored paths");
        const std::size_t n = ens.size();
        const EmpiricalLaw& first = ens.slices.front();
        std::vector<double> ratios;
        std::vector<double> v0s(n);
        MomentBoundPoint pt;
        for (std::size_t i = 0; i < n; ++i)
        {
            v0s[i] = V.value(first.x_of(i), first.y_of(i));
            if (ens.death_step[i] != kAlive)
            {
                ++pt.dead;
                continue;
            }
            double sup = 0.0;
            for (const auto& s : ens.slices) sup = std::max(sup, V.value(s.x_of(i), s.y_of(i)));
            ratios.push_back(sup / v0s[i]);
        }
        pt.v0 = mean_estimate(v0s).mean;
        pt.ratio = mean_estimate(ratios);
        rep.dead += pt.dead;
        rep.points.push_back(pt);
    }
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& p : rep.points)
    {
        vmin = std::min(vmin, p.v0);
        vmax = std::max(vmax, p.v0);
        if (p.ratio.n > 0)
        {
            rmin = std::min(rmin, p.ratio.mean);
            rmax = std::max(rmax, p.ratio.mean);
        }
    }
    rep.v0_spread = vmax / vmin;
    if (rep.v0_spread < 10.0)
    {
        std::ostringstream os;
        os << "initial V values span only " << rep.v0_spread << "x; need at least 10x";
        throw ValidationError(os.str());
    }
    rep.ratio_band = rmax > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    rep.bounded = rep.dead == 0 && rep.ratio_band <= 2.0;
    return rep;
}
}  // namespace kinsde
