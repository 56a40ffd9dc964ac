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

#include "kinsde/lyapunov_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include "kinsde/errors.hpp"
#include "kinsde/parallel.hpp"
#include "kinsde/rng.hpp"

namespace kinsde
{
namespace
{
std::vector<double> random_direction(std::uint64_t seed, std::uint64_t stream, int dims)
{
    NormalStream ns({seed, StreamTag::sampling, stream});
    std::vector<double> u(dims);
    double n2 = 0.0;
    while (n2 < 1e-24)
    {
        n2 = 0.0;
        for (double& c : u)
        {
            c = ns.next();
            n2 += c * c;
        }
    }
    const double n = std::sqrt(n2);
    for (double& c : u) c /= n;
    return u;
}

double radical_inverse(std::uint64_t i, std::uint64_t base)
{
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (i > 0)
    {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double operator_norm(const std::vector<double>& a, int rows, int cols)
{
    if (rows == 1 || cols == 1)
    {
        double s = 0.0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(a.data(), rows,
                                                                                                      cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double symmetric_norm(const std::vector<double>& a, int n)
{
    if (n == 1) return std::abs(a[0]);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(a.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double vnorm(ConstVec v)
{
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

double dot(ConstVec a, ConstVec b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Z2 with the measure argument at the point mass in the origin.
void z2_at_dirac(const CoefficientSet& c, ConstVec x, ConstVec y, OutVec out)
{
    c.z2(0.0, x, y, out);
    if (!c.interaction) return;
    std::vector<double> w(out.size());
    const std::vector<double> zx(x.size(), 0.0), zy(y.size(), 0.0);
    c.interaction->kernel.eval(x, y, zx, zy, w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c.interaction->kappa * w[i];
}

double shell_factor(const LyapunovV& V, ConstVec x, ConstVec yp, double z1n, double z2n)
{
    const LyapunovEval e = V.eval(x, yp);
    return z1n * operator_norm(e.hess_xy, V.d1(), V.d2()) +
           z2n * (vnorm(e.grad_y) + symmetric_norm(e.hess_yy, V.d2()));
}
}  // namespace

std::vector<std::vector<double>> SampleSpec::enumerate(int dims) const
{
    if (!(r_min > 0.0) || !(r_max > r_min) || radii < 2 || directions < 1)
        throw ValidationError("sample spec needs 0 < r_min < r_max, radii >= 2, directions >= 1");
    std::vector<std::vector<double>> pts;
    pts.emplace_back(dims, 0.0);
    const double ratio = std::log(r_max / r_min);
    for (int k = 0; k < radii; ++k)
    {
        const double r = r_min * std::exp(ratio * k / (radii - 1));
        for (int j = 0; j < directions; ++j)
        {
            std::vector<double> u =
                random_direction(seed, static_cast<std::uint64_t>(k) * directions + j, dims);
            for (double& c : u) c *= r;
            pts.push_back(std::move(u));
        }
    }
    return pts;
}

std::string SampleSpec::describe() const
{
    std::ostringstream os;
    os << "D = {origin} + " << radii << " log-spaced radii in [" << r_min << ", " << r_max << "] x " << directions
       << " directions (seed " << seed << ")";
    if (refine_starts > 0) os << ", sphere maxima refined from " << refine_starts << " starts";
    return os.str();
}

std::vector<std::vector<double>> shell_offsets(int d, int count)
{
    if (d < 1 || count < 2) throw ValidationError("shell needs d >= 1 and at least 2 points");
    std::vector<std::vector<double>> out;
    if (d == 1)
    {
        for (int j = 0; j < count; ++j) out.push_back({-1.0 + 2.0 * j / (count - 1)});
        return out;
    }
    const int dirs = (count + 2) / 3;
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    for (int j = 0; j < dirs; ++j)
    {
        std::vector<double> u(d);
        if (d == 2)
        {
            const double a = 2.0 * std::numbers::pi * (j + 0.5) / dirs;
            u = {std::cos(a), std::sin(a)};
        }
        else
        {
            if (d > 16) throw ValidationError("shell directions support d <= 16");
            double n2 = 0.0;
            for (int i = 0; i < d; ++i)
            {
                const double h = radical_inverse(static_cast<std::uint64_t>(j) + 1, primes[i]);
                u[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * h - 1.0);
                n2 += u[i] * u[i];
            }
            for (double& c : u) c /= std::sqrt(n2);
        }
        for (double r : {0.5, 0.75, 1.0})
        {
            std::vector<double> v(u);
            for (double& c : v) c *= r;
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string DriftConditionReport::verdict() const
{
    return (holds ? "holds: certified on domain " : "fails on domain ") + domain;
}

double b3_lhs(const CoefficientSet& coeffs,
              const LyapunovV& V,
              double epsilon,
              const std::vector<std::vector<double>>& shell,
              ConstVec x,
              ConstVec y)
{
    std::vector<double> z1(coeffs.d1), z2(coeffs.d2), yp(coeffs.d2);
    coeffs.z1(0.0, x, y, z1);
    z2_at_dirac(coeffs, x, y, z2);
    const double z1n = vnorm(z1), z2n = vnorm(z2);
    double shell_max = 0.0;
    for (const auto& u : shell)
    {
        for (int i = 0; i < coeffs.d2; ++i) yp[i] = y[i] + epsilon * u[i];
        shell_max = std::max(shell_max, shell_factor(V, x, yp, z1n, z2n));
    }
    const LyapunovEval e = V.eval(x, y);
    return epsilon * shell_max + dot(z1, e.grad_x) + dot(z2, e.grad_y);
}

namespace
{
struct PointValues
{
    std::vector<std::vector<double>> pts;
    std::vector<double> lhs;
    std::vector<double> v;
    std::vector<char> bad;
};

PointValues evaluate_points(const CoefficientSet& coeffs,
                            const LyapunovV& V,
                            double epsilon,
                            const SampleSpec& sample,
                            int workers)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("shell radius epsilon must lie in (0, 1)");
    if (V.d1() != coeffs.d1 || V.d2() != coeffs.d2) throw ValidationError("V dimension differs from the coefficients");
    PointValues pv;
    pv.pts = sample.enumerate(coeffs.d1 + coeffs.d2);
    const auto shell = shell_offsets(coeffs.d2, sample.shell_points);
    const std::size_t n = pv.pts.size();
    pv.lhs.assign(n, 0.0);
    pv.v.assign(n, 0.0);
    pv.bad.assign(n, 0);
    const int d1 = coeffs.d1;
    const auto lhs_at = [&](const std::vector<double>& z, double& lhs, double& v) {
        const ConstVec x(z.data(), d1);
        const ConstVec y(z.data() + d1, coeffs.d2);
        try
        {
            lhs = b3_lhs(coeffs, V, epsilon, shell, x, y);
            v = V.value(x, y);
        }
        catch (const std::exception&)
        {
            return false;
        }
        return std::isfinite(lhs) && std::isfinite(v);
    };
    parallel_for(n, workers, [&](std::size_t i) { pv.bad[i] = lhs_at(pv.pts[i], pv.lhs[i], pv.v[i]) ? 0 : 1; });

    const int starts = std::min(sample.refine_starts, sample.directions);
    if (starts <= 0) return pv;
    const int dims = coeffs.d1 + coeffs.d2;
    const std::size_t tasks = static_cast<std::size_t>(sample.radii) * starts;
    std::vector<std::vector<double>> rpts(tasks);
    std::vector<double> rlhs(tasks), rv(tasks);
    std::vector<char> rbad(tasks, 0);
    parallel_for(tasks, workers, [&](std::size_t task) {
        const std::size_t k = task / starts, rank = task % starts;
        // Sampled directions of radius k, worst first (ties by index).
        const std::size_t first = 1 + k * sample.directions;
        std::vector<std::size_t> order(sample.directions);
        for (int j = 0; j < sample.directions; ++j) order[j] = first + j;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double la = pv.bad[a] ? -std::numeric_limits<double>::infinity() : pv.lhs[a];
            const double lb = pv.bad[b] ? -std::numeric_limits<double>::infinity() : pv.lhs[b];
            return la > lb;
        });
        const std::size_t s = order[rank];
        std::vector<double> z = pv.pts[s];
        const double r = vnorm(z);
        double f = pv.lhs[s], v = pv.v[s];
        bool ok = !pv.bad[s];
        std::vector<double> g(dims), trial(dims);
        double step = 0.25;
        constexpr double fd = 1e-6;
        for (int it = 0; ok && it < 100 && step > 1e-9; ++it)
        {
            double fp = 0.0, fm = 0.0, vp = 0.0;
            for (int a = 0; a < dims && ok; ++a)
            {
                trial = z;
                trial[a] += fd * r;
                ok = lhs_at(trial, fp, vp);
                trial[a] -= 2.0 * fd * r;
                ok = ok && lhs_at(trial, fm, vp);
                g[a] = (fp - fm) / (2.0 * fd * r);
            }
            if (!ok) break;
            const double radial = dot(g, z) / (r * r);
            for (int a = 0; a < dims; ++a) g[a] -= radial * z[a];
            const double gn = vnorm(g);
            if (!(gn > 0.0)) break;
            bool improved = false;
            while (step > 1e-9 && !improved)
            {
                for (int a = 0; a < dims; ++a) trial[a] = z[a] / r + step * g[a] / gn;
                const double tn = vnorm(trial);
                for (double& c : trial) c *= r / tn;
                double ft = 0.0, vt = 0.0;
                if (lhs_at(trial, ft, vt) && ft > f)
                {
                    z = trial;
                    f = ft;
                    v = vt;
                    improved = true;
                    step *= 2.0;
                }
                else
                    step *= 0.5;
            }
        }
        rpts[task] = std::move(z);
        rlhs[task] = f;
        rv[task] = v;
        rbad[task] = ok ? 0 : 1;
    });
    for (std::size_t t = 0; t < tasks; ++t)
    {
        pv.pts.push_back(std::move(rpts[t]));
        pv.lhs.push_back(rlhs[t]);
        pv.v.push_back(rv[t]);
        pv.bad.push_back(rbad[t]);
    }
    return pv;
}

DriftConditionReport make_report(const PointValues& pv,
                                 int d1,
                                 const PhiFamily& phi,
                                 double K,
                                 double epsilon,
                                 const SampleSpec& sample)
{
    DriftConditionReport rep;
    rep.K = K;
    rep.phi = phi;
    rep.epsilon = epsilon;
    rep.domain = sample.describe();
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pv.pts.size(); ++i)
    {
        DriftPoint p;
        p.x.assign(pv.pts[i].begin(), pv.pts[i].begin() + d1);
        p.y.assign(pv.pts[i].begin() + d1, pv.pts[i].end());
        p.flagged = pv.bad[i] != 0;
        p.v = pv.v[i];
        p.lhs = pv.lhs[i];
        const double phv = phi(pv.v[i]);
        p.rhs = K - phv;
        p.margin = K - (pv.lhs[i] + phv);
        if (p.flagged)
            ++rep.flagged;
        else if (p.margin < rep.min_margin)
        {
            rep.min_margin = p.margin;
            rep.worst = i;
        }
        rep.points.push_back(std::move(p));
    }
    rep.holds = rep.flagged == 0 && rep.min_margin >= 0.0;
    return rep;
}
}  // namespace

DriftConditionReport check_b3(const CoefficientSet& coeffs,
                              const LyapunovV& V,
                              const PhiFamily& phi,
                              double K,
                              double epsilon,
                              const SampleSpec& sample,
                              int workers)
{
    const PointValues pv = evaluate_points(coeffs, V, epsilon, sample, workers);
    return make_report(pv, coeffs.d1, phi, K, epsilon, sample);
}

ConstantSearch search_constants(const CoefficientSet& coeffs,
                                const LyapunovV& V,
                                PhiFamily::Kind kind,
                                double beta,
                                double epsilon,
                                const SampleSpec& sample,
                                const SearchOptions& opts)
{
    if (!(opts.core_fraction > 0.0 && opts.core_fraction <= 1.0))
        throw ValidationError("core_fraction must lie in (0, 1]");
    const PointValues pv = evaluate_points(coeffs, V, epsilon, sample, opts.workers);
    if (std::any_of(pv.bad.begin(), pv.bad.end(), [](char b) { return b != 0; }))
        throw NumericError("condition not certifiable on this domain: non-finite drift or derivative at a sample point");

    const double core_radius = opts.core_fraction * sample.r_max * (1.0 + 1e-12);
    std::vector<char> core(pv.pts.size());
    for (std::size_t i = 0; i < pv.pts.size(); ++i) core[i] = vnorm(pv.pts[i]) <= core_radius;

    const auto make_phi = [&](double c0) {
        return kind == PhiFamily::Kind::linear ? PhiFamily::linear(c0) : PhiFamily::superlinear(c0, beta);
    };
    const auto k_of = [&](double c0) {
        const PhiFamily phi = make_phi(c0);
        double k = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pv.pts.size(); ++i)
            if (core[i]) k = std::max(k, pv.lhs[i] + phi(pv.v[i]));
        return k;
    };
    const auto feasible = [&](double c0) {
        const PhiFamily phi = make_phi(c0);
        const double k = k_of(c0);
        for (std::size_t i = 0; i < pv.pts.size(); ++i)
            if (k - (pv.lhs[i] + phi(pv.v[i])) < 0.0) return false;
        return true;
    };

    if (!feasible(opts.c0_min))
        throw NumericError("condition not certifiable on this domain (" + sample.describe() + ")");

    ConstantSearch out;
    double lo = opts.c0_min, hi = 1.0;
    if (feasible(1.0))
    {
        lo = 1.0;
        hi = 2.0;
        while (hi <= opts.c0_cap && feasible(hi))
        {
            lo = hi;
            hi *= 2.0;
        }
        if (hi > opts.c0_cap)
        {
            if (feasible(opts.c0_cap))
            {
                lo = opts.c0_cap;
                out.at_cap = true;
            }
            hi = opts.c0_cap;
        }
    }
    if (!out.at_cap)
    {
        for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
    }
    out.c0 = lo;
    out.K = k_of(lo);
    out.report = make_report(pv, coeffs.d1, make_phi(lo), out.K, epsilon, sample);
    return out;
}

GrowthRatioReport check_growth_ratios(const LyapunovV& V,
                                      const PhiFamily& phi,
                                      std::vector<double> radii,
                                      double epsilon,
                                      int directions,
                                      int shell_points)
{
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw ValidationError("radii must be strictly increasing");
    const int d1 = V.d1(), d2 = V.d2();
    const auto shell = shell_offsets(d2, shell_points);
    GrowthRatioReport rep;
    rep.radii = radii;
    std::vector<double> yp(d2);
    for (std::size_t k = 0; k < radii.size(); ++k)
    {
        double best = 0.0;
        const int ndir = radii[k] == 0.0 ? 1 : directions;
        for (int j = 0; j < ndir; ++j)
        {
            std::vector<double> z = random_direction(0x9e37ULL, static_cast<std::uint64_t>(j), d1 + d2);
            for (double& c : z) c *= radii[k];
            const ConstVec x(z.data(), d1);
            const ConstVec y(z.data() + d1, d2);
            const double v = V.value(x, y);
            const double denom = std::min(v, phi(v));
            double sup = 0.0;
            for (const auto& u : shell)
            {
                for (int i = 0; i < d2; ++i) yp[i] = y[i] + epsilon * u[i];
                const LyapunovEval e = V.eval(x, yp);
                sup = std::max(sup, vnorm(e.grad_y) + symmetric_norm(e.hess_yy, d2));
            }
            best = std::max(best, sup / denom);
        }
        rep.shell_max.push_back(best);
    }
    const std::size_t start = radii.size() / 2;
    rep.vanishing = radii.size() >= 2;
    for (std::size_t i = start + 1; i < radii.size(); ++i)
        if (!(rep.shell_max[i] < rep.shell_max[i - 1])) rep.vanishing = false;
    return rep;
}
}  // namespace kinsde
