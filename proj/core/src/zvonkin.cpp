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

#include "kinsde/zvonkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "kinsde/errors.hpp"

namespace kinsde
{
namespace
{
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

ZvonkinSolution::ZvonkinSolution(std::vector<double> y, std::vector<double> u, double lambda, double residual)
    : y_(std::move(y)), u_(std::move(u)), lambda_(lambda), residual_(residual)
{
    const std::size_t n = y_.size();
    if (n < 3 || u_.size() != n) throw ValidationError("Zvonkin solution needs at least 3 grid points");
    const double dy = y_[1] - y_[0];
    du_.assign(n, 0.0);
    d2u_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        du_[i] = (u_[i + 1] - u_[i - 1]) / (2.0 * dy);
        d2u_[i] = (u_[i + 1] - 2.0 * u_[i] + u_[i - 1]) / (dy * dy);
    }
    du_[0] = (-3.0 * u_[0] + 4.0 * u_[1] - u_[2]) / (2.0 * dy);
    du_[n - 1] = (3.0 * u_[n - 1] - 4.0 * u_[n - 2] + u_[n - 3]) / (2.0 * dy);
    d2u_[0] = d2u_[1];
    d2u_[n - 1] = d2u_[n - 2];
    theta_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        theta_[i] = y_[i] + u_[i];
        sup_u_ = std::max(sup_u_, std::abs(u_[i]));
        sup_du_ = std::max(sup_du_, std::abs(du_[i]));
    }
}

bool ZvonkinSolution::invertible() const
{
    for (std::size_t i = 1; i < theta_.size(); ++i)
        if (!(theta_[i] > theta_[i - 1])) return false;
    return !theta_.empty();
}

std::size_t ZvonkinSolution::bracket(const std::vector<double>& nodes, double v) const
{
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
    hi = std::clamp<std::size_t>(hi, 1, nodes.size() - 1);
    return hi - 1;
}

double ZvonkinSolution::u_at(double y) const
{
    if (y_.empty() || !(y >= y_.front() && y <= y_.back())) return kNaN;
    const std::size_t i = bracket(y_, y);
    const double w = (y - y_[i]) / (y_[i + 1] - y_[i]);
    return u_[i] + w * (u_[i + 1] - u_[i]);
}

double ZvonkinSolution::du_at(double y) const
{
    if (y_.empty() || !(y >= y_.front() && y <= y_.back())) return kNaN;
    const std::size_t i = bracket(y_, y);
    const double w = (y - y_[i]) / (y_[i + 1] - y_[i]);
    return du_[i] + w * (du_[i + 1] - du_[i]);
}

double ZvonkinSolution::theta(double y) const
{
    return y + u_at(y);
}

double ZvonkinSolution::theta_inverse(double ty) const
{
    if (theta_.empty() || !(ty >= theta_.front() && ty <= theta_.back())) return kNaN;
    const std::size_t i = bracket(theta_, ty);
    const double w = (ty - theta_[i]) / (theta_[i + 1] - theta_[i]);
    // Same as interpolating the (Theta_i, y_i) table, written so that u == 0 gives ty back exactly.
    return ty - (u_[i] + w * (u_[i + 1] - u_[i]));
}

double ZvonkinSolution::theta_inverse_checked(double ty) const
{
    const double y = theta_inverse(ty);
    if (std::isnan(y))
    {
        std::ostringstream os;
        os << "out of transform domain: " << ty << " not in [" << theta_.front() << ", " << theta_.back() << "]";
        throw NumericError(os.str());
    }
    return y;
}

double ZvonkinSolution::roundtrip_error() const
{
    double err = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) err = std::max(err, std::abs(theta_inverse(theta_[i]) - y_[i]));
    return err;
}

ZvonkinSolution solve_resolvent_1d(const ScalarField& b, const ScalarField& sigma, double lambda, double L, std::size_t n)
{
    if (!(lambda > 0.0)) throw ValidationError("resolvent parameter lambda must be positive");
    if (!(L > 0.0)) throw ValidationError("half-width L must be positive");
    if (n < 5) throw NumericError("degenerate discretization: resolvent grid needs at least 5 points");
    const double dy = 2.0 * L / static_cast<double>(n - 1);
    std::vector<double> y(n), bv(n), s2(n);
    double bscale = 1.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        y[i] = i + 1 == n ? L : -L + static_cast<double>(i) * dy;
        bv[i] = b(y[i]);
        const double s = sigma(y[i]);
        s2[i] = s * s;
        if (!std::isfinite(bv[i]) || !std::isfinite(s)) throw NumericError("degenerate discretization: non-finite coefficient");
        if (!(s2[i] > 0.0)) throw NumericError("degenerate discretization: sigma vanishes on the resolvent grid");
        bscale = std::max(bscale, std::abs(bv[i]));
    }

    // Interior unknowns 1..n-2: lower l_i u_{i-1} + diag_i u_i + upper r_i u_{i+1} = -b_i.
    const std::size_t m = n - 2;
    std::vector<double> lo(m), di(m), up(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k)
    {
        const std::size_t i = k + 1;
        const double diff = 0.5 * s2[i] / (dy * dy);
        const double adv = bv[i] / (2.0 * dy);
        lo[k] = diff - adv;
        up[k] = diff + adv;
        di[k] = -2.0 * diff - lambda;
        rhs[k] = -bv[i];
    }
    // Thomas algorithm.
    std::vector<double> cp(m), dp(m);
    double piv = di[0];
    if (!(std::abs(piv) > 1e-300)) throw NumericError("degenerate discretization: zero pivot");
    cp[0] = up[0] / piv;
    dp[0] = rhs[0] / piv;
    for (std::size_t k = 1; k < m; ++k)
    {
        piv = di[k] - lo[k] * cp[k - 1];
        if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) throw NumericError("degenerate discretization: zero pivot");
        cp[k] = up[k] / piv;
        dp[k] = (rhs[k] - lo[k] * dp[k - 1]) / piv;
    }
    std::vector<double> u(n, 0.0);
    u[m] = dp[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) u[k + 1] = dp[k] - cp[k] * u[k + 2];

    double residual = 0.0;
    for (std::size_t k = 0; k < m; ++k)
    {
        const std::size_t i = k + 1;
        const double r = lo[k] * u[i - 1] + di[k] * u[i] + up[k] * u[i + 1] - rhs[k];
        residual = std::max(residual, std::abs(r));
    }
    if (!(residual < 1e-8 * bscale))
    {
        std::ostringstream os;
        os << "not converged: discrete residual " << residual << " exceeds " << 1e-8 * bscale;
        throw NumericError(os.str());
    }
    return ZvonkinSolution(std::move(y), std::move(u), lambda, residual);
}

ZvonkinSolution lambda_sweep(const ScalarField& b, const ScalarField& sigma, double eps_target, double L, std::size_t n)
{
    if (!(eps_target > 0.0 && eps_target < 1.0)) throw ValidationError("target bound must lie in (0, 1)");
    const double cap = std::ldexp(1.0, 40);
    for (double lambda = 1.0; lambda <= cap; lambda *= 2.0)
    {
        ZvonkinSolution sol = solve_resolvent_1d(b, sigma, lambda, L, n);
        if (sol.bound() < eps_target) return sol;
    }
    throw NumericError("smallness not achieved: ||u|| + ||u'|| stays above the target up to lambda = 2^40");
}

namespace
{
void require_scalar(const CoefficientSet& c)
{
    if (c.d2 != 1 || c.m != 1) throw ValidationError("the Zvonkin transform is implemented for d2 = m = 1");
}
}  // namespace

ScalarField scalar_drift(const CoefficientSet& coeffs)
{
    require_scalar(coeffs);
    if (!coeffs.b) return [](double) { return 0.0; };
    return [f = coeffs.b](double y) {
        double out = 0.0;
        f(0.0, ConstVec(&y, 1), OutVec(&out, 1));
        return out;
    };
}

ScalarField scalar_sigma(const CoefficientSet& coeffs)
{
    require_scalar(coeffs);
    return [f = coeffs.sigma](double y) {
        double out = 0.0;
        f(0.0, ConstVec(&y, 1), OutVec(&out, 1));
        return out;
    };
}

CoefficientSet transform_coefficients(const ZvonkinSolution& sol, const CoefficientSet& coeffs)
{
    require_scalar(coeffs);
    if (coeffs.interaction) throw ValidationError("the Zvonkin transform is implemented for classical coefficients only");
    if (!(sol.sup_du() < 1.0) || !sol.invertible())
        throw ValidationError("Zvonkin solution has ||u'|| >= 1; Theta is not invertible");
    if (!(sol.roundtrip_error() < 1e-8)) throw NumericError("Theta inverse roundtrip error exceeds 1e-8");

    auto s = std::make_shared<const ZvonkinSolution>(sol);
    CoefficientSet t;
    t.d1 = coeffs.d1;
    t.d2 = 1;
    t.m = 1;
    t.name = coeffs.name + "+zvonkin";
    t.growth = coeffs.growth;
    t.z1 = [s, z1 = coeffs.z1](double tt, ConstVec x, ConstVec ty, OutVec out) {
        const double y = s->theta_inverse(ty[0]);
        if (std::isnan(y))
        {
            std::fill(out.begin(), out.end(), kNaN);
            return;
        }
        z1(tt, x, ConstVec(&y, 1), out);
    };
    t.z2 = [s, z2 = coeffs.z2](double tt, ConstVec x, ConstVec ty, OutVec out) {
        const double y = s->theta_inverse(ty[0]);
        if (std::isnan(y))
        {
            out[0] = kNaN;
            return;
        }
        z2(tt, x, ConstVec(&y, 1), out);
        out[0] = (1.0 + s->du_at(y)) * out[0] + s->lambda() * s->u_at(y);
    };
    t.sigma = [s, sg = coeffs.sigma](double tt, ConstVec ty, OutVec out) {
        const double y = s->theta_inverse(ty[0]);
        if (std::isnan(y))
        {
            out[0] = kNaN;
            return;
        }
        sg(tt, ConstVec(&y, 1), out);
        out[0] *= 1.0 + s->du_at(y);
    };
    const double shrink = 1.0 - sol.sup_du();
    t.sigma_bounds = {coeffs.sigma_bounds.sigma_sup * (1.0 + sol.sup_du()),
                      coeffs.sigma_bounds.inverse_gram_sup / (shrink * shrink)};
    return t;
}

EquivalenceReport equivalence_experiment(const CoefficientSet& coeffs,
                                         const SimConfig& cfg,
                                         const InitialLaw& init,
                                         const EquivalenceOptions& opts)
{
    require_scalar(coeffs);
    const ZvonkinSolution sol =
        lambda_sweep(scalar_drift(coeffs), scalar_sigma(coeffs), opts.eps_target, opts.L, opts.grid_points);
    CoefficientSet transformed = transform_coefficients(sol, coeffs);

    SimConfig run = cfg;
    run.record_every = 0;
    run.store_increments = false;
    const Ensemble direct = simulate_ensemble(run, coeffs, init);

    // Same per-particle initial draws, mapped through Theta.
    EmpiricalLaw start;
    start.d1 = coeffs.d1;
    start.d2 = 1;
    start.x.resize(run.N * coeffs.d1);
    start.y.resize(run.N);
    for (std::size_t i = 0; i < run.N; ++i)
    {
        init.sample(run.seed, i, OutVec(start.x.data() + i * coeffs.d1, coeffs.d1), OutVec(&start.y[i], 1));
        start.y[i] = sol.theta(start.y[i]);
        if (!std::isfinite(start.y[i])) start.y[i] = 0.0;
    }
    const Ensemble tilde = simulate_ensemble(run, transformed, InitialLaw::from_cloud(start));

    EmpiricalLaw back = tilde.final_law();
    back.weights.assign(run.N, 1.0);
    EquivalenceReport rep;
    rep.lambda = sol.lambda();
    rep.bound = sol.bound();
    rep.dead_direct = direct.dead_count();
    for (std::size_t i = 0; i < run.N; ++i)
    {
        const double y = tilde.death_step[i] == kAlive ? sol.theta_inverse(back.y[i]) : kNaN;
        if (std::isnan(y))
        {
            ++rep.out_of_domain;
            back.weights[i] = 0.0;
            back.y[i] = 0.0;
        }
        else
            back.y[i] = y;
    }
    if (static_cast<double>(rep.out_of_domain) > kUnstableFraction * static_cast<double>(run.N))
    {
        std::ostringstream os;
        os << "equivalence experiment aborted: " << rep.out_of_domain << " of " << run.N
           << " particles left the transform domain; enlarge L";
        throw NumericError(os.str());
    }
    const HistogramLaw hd = histogram_of(direct.final_law(), cfg.hist, cfg.workers);
    const HistogramLaw ht = histogram_of(back, cfg.hist, cfg.workers);
    rep.tv = empirical_var_distance(hd, ht);
    rep.noise_floor =
        bootstrap_noise_floor(direct.final_law(), cfg.hist, opts.bootstrap_replicates, cfg.seed, nullptr, 0.95, cfg.workers);
    rep.equivalent = rep.tv < 3.0 * rep.noise_floor || rep.tv == 0.0;
    return rep;
}
}  // namespace kinsde
