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

#include "kinsde/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "kinsde/errors.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/parallel.hpp"

namespace kinsde
{
namespace
{
void tame(OutVec v, double h)
{
    double n2 = 0.0;
    for (double c : v) n2 += c * c;
    const double f = 1.0 / (1.0 + h * std::sqrt(n2));
    for (double& c : v) c *= f;
}

bool within_threshold(ConstVec v)
{
    for (double c : v)
        if (!(std::abs(c) <= kBlowupThreshold)) return false;
    return true;
}

PhaseState step_state(const PhaseState& s,
                      double t,
                      double h,
                      const CoefficientSet& coeffs,
                      const EmpiricalLaw* law,
                      ConstVec dW,
                      Scheme scheme)
{
    if (!(h > 0.0)) throw ValidationError("nonpositive step h");
    if (static_cast<int>(dW.size()) != coeffs.m) throw ValidationError("Brownian increment has wrong dimension");
    std::vector<double> x = s.x();
    std::vector<double> y = s.y();
    Stepper st(coeffs, scheme);
    MeanFieldInput mf;
    mf.law = law;
    if (!st.advance(t, h, x, y, dW, mf))
    {
        std::ostringstream os;
        os << "blowup at t=" << t << " (try the tamed scheme or a smaller h)";
        throw NumericError(os.str());
    }
    return PhaseState(std::move(x), std::move(y));
}
}  // namespace

Stepper::Stepper(const CoefficientSet& coeffs, Scheme scheme)
    : coeffs_(&coeffs),
      scheme_(scheme),
      vx_(coeffs.d1),
      vy_(coeffs.d2),
      tmp_(coeffs.d2),
      sig_(static_cast<std::size_t>(coeffs.d2) * coeffs.m)
{
}

void Stepper::y_drift(double t, ConstVec x, ConstVec y, const MeanFieldInput& mf, OutVec out)
{
    const CoefficientSet& c = *coeffs_;
    c.z2(t, x, y, out);
    if (c.interaction)
    {
        const MeanFieldTerm& term = *c.interaction;
        if (!mf.average.empty())
        {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += term.kappa * mf.average[i];
        }
        else
        {
            std::fill(tmp_.begin(), tmp_.end(), 0.0);
            if (mf.law != nullptr)
                kernel_average(term.kernel, x, y, *mf.law, tmp_);
            else
            {
                const std::vector<double> zx(x.size(), 0.0), zy(y.size(), 0.0);
                term.kernel.eval(x, y, zx, zy, tmp_);
            }
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += term.kappa * tmp_[i];
        }
    }
    if (c.b)
    {
        c.b(t, y, tmp_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp_[i];
    }
}

bool Stepper::advance(double t, double h, OutVec x, OutVec y, ConstVec dW, const MeanFieldInput& mf)
{
    const CoefficientSet& c = *coeffs_;
    c.z1(t, x, y, vx_);
    y_drift(t, x, y, mf, vy_);
    c.sigma(t, y, sig_);
    if (scheme_ == Scheme::tamed)
    {
        tame(vx_, h);
        tame(vy_, h);
    }
    const std::size_t m = dW.size();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * vx_[i];
    for (std::size_t i = 0; i < y.size(); ++i)
    {
        double noise = 0.0;
        for (std::size_t j = 0; j < m; ++j) noise += sig_[i * m + j] * dW[j];
        y[i] += h * vy_[i] + noise;
    }
    return within_threshold(x) && within_threshold(y);
}

PhaseState em_step(const PhaseState& s,
                   double t,
                   double h,
                   const CoefficientSet& coeffs,
                   const EmpiricalLaw* law,
                   ConstVec dW)
{
    return step_state(s, t, h, coeffs, law, dW, Scheme::euler);
}

PhaseState tamed_em_step(const PhaseState& s,
                         double t,
                         double h,
                         const CoefficientSet& coeffs,
                         const EmpiricalLaw* law,
                         ConstVec dW)
{
    return step_state(s, t, h, coeffs, law, dW, Scheme::tamed);
}

InitialLaw InitialLaw::from_cloud(EmpiricalLaw law)
{
    if (law.size() == 0) throw ValidationError("initial cloud is empty");
    InitialLaw init;
    init.kind = Kind::cloud;
    init.center = PhaseState(std::vector<double>(law.d1, 0.0), std::vector<double>(law.d2, 0.0));
    init.cloud = std::move(law);
    return init;
}

int InitialLaw::d1() const
{
    return kind == Kind::cloud ? cloud.d1 : center.d1();
}

int InitialLaw::d2() const
{
    return kind == Kind::cloud ? cloud.d2 : center.d2();
}

void InitialLaw::sample(std::uint64_t seed, std::size_t particle, OutVec x, OutVec y) const
{
    switch (kind)
    {
        case Kind::dirac:
            std::copy(center.x().begin(), center.x().end(), x.begin());
            std::copy(center.y().begin(), center.y().end(), y.begin());
            return;
        case Kind::gaussian:
        {
            NormalStream ns({seed, StreamTag::initial_law, particle});
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = center.x()[i] + spread * ns.next();
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = center.y()[i] + spread * ns.next();
            return;
        }
        case Kind::cloud:
        {
            const std::size_t j = particle % cloud.size();
            const ConstVec cx = cloud.x_of(j);
            const ConstVec cy = cloud.y_of(j);
            std::copy(cx.begin(), cx.end(), x.begin());
            std::copy(cy.begin(), cy.end(), y.begin());
            return;
        }
    }
}

std::size_t Ensemble::dead_count() const
{
    return static_cast<std::size_t>(
        std::count_if(death_step.begin(), death_step.end(), [](std::size_t s) { return s != kAlive; }));
}

double Ensemble::dead_fraction() const
{
    return size() == 0 ? 0.0 : static_cast<double>(dead_count()) / static_cast<double>(size());
}

ConstVec Ensemble::increments_of(std::size_t particle) const
{
    if (increments.empty()) return {};
    const std::size_t len = cfg.steps() * static_cast<std::size_t>(cfg.m);
    return {increments.data() + particle * len, len};
}

PathSample Ensemble::path(std::size_t particle) const
{
    PathSample p;
    p.times = times;
    p.states.reserve(slices.size());
    for (const auto& s : slices)
    {
        const ConstVec x = s.x_of(particle);
        const ConstVec y = s.y_of(particle);
        std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
        if (std::all_of(xv.begin(), xv.end(), [](double v) { return std::isfinite(v); }) &&
            std::all_of(yv.begin(), yv.end(), [](double v) { return std::isfinite(v); }))
            p.states.emplace_back(std::move(xv), std::move(yv));
        else
            break;  // path ends at blowup
    }
    p.times.resize(p.states.size());
    const ConstVec inc = increments_of(particle);
    p.increments.assign(inc.begin(), inc.end());
    return p;
}

std::vector<std::size_t> recording_steps(const SimConfig& cfg)
{
    const std::size_t K = cfg.steps();
    std::vector<std::size_t> out{0};
    if (cfg.record_every > 0)
        for (std::size_t k = cfg.record_every; k < K; k += cfg.record_every) out.push_back(k);
    if (K > 0) out.push_back(K);
    return out;
}

Ensemble simulate_ensemble(const SimConfig& cfg,
                           const CoefficientSet& coeffs,
                           const InitialLaw& init,
                           const SimulateOptions& opts)
{
    const ValidationReport report = validate_config(cfg, coeffs);
    if (!report.ok()) throw ValidationError(report.summary());
    if (init.d1() != coeffs.d1 || init.d2() != coeffs.d2)
        throw ValidationError("initial law dimension differs from the coefficient dimensions");

    const MeasureFlow* flow = opts.frozen_flow;
    if (flow != nullptr)
    {
        if (flow->times.empty() || flow->times.size() != flow->slices.size())
            throw ValidationError("frozen flow has no slices");
        const double tol = 1e-9 * std::max(1.0, cfg.T);
        if (flow->times.front() > tol || flow->times.back() < cfg.T - tol)
            throw ValidationError("frozen flow does not cover [0, T]");
    }

    const std::size_t N = cfg.N;
    const std::size_t K = cfg.steps();
    const std::size_t m = static_cast<std::size_t>(coeffs.m);
    const int d1 = coeffs.d1;
    const int d2 = coeffs.d2;

    Ensemble ens;
    ens.cfg = cfg;
    ens.coefficients = coeffs.name;
    ens.recorded_steps = recording_steps(cfg);
    for (std::size_t k : ens.recorded_steps) ens.times.push_back(static_cast<double>(k) * cfg.h);
    ens.slices.resize(ens.recorded_steps.size());
    for (auto& s : ens.slices)
    {
        s.d1 = d1;
        s.d2 = d2;
        s.x.assign(N * d1, 0.0);
        s.y.assign(N * d2, 0.0);
    }
    ens.death_step.assign(N, kAlive);
    if (cfg.store_increments) ens.increments.assign(N * K * m, 0.0);

    // Per-step flow slice, with source-only kernel averages computed once per slice.
    std::vector<std::size_t> slice_of_step;
    std::map<std::size_t, std::vector<double>> averages;
    const bool source_only = coeffs.interaction && coeffs.interaction->kernel.source_only;
    if (flow != nullptr && coeffs.interaction)
    {
        slice_of_step.resize(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            slice_of_step[k] = flow->nearest_slice(static_cast<double>(k) * cfg.h);
            if (source_only && !averages.count(slice_of_step[k]))
            {
                std::vector<double> avg(d2, 0.0);
                const std::vector<double> zx(d1, 0.0), zy(d2, 0.0);
                kernel_average(coeffs.interaction->kernel, zx, zy, flow->slices[slice_of_step[k]], avg);
                averages.emplace(slice_of_step[k], std::move(avg));
            }
        }
    }

    const double sqrt_h = std::sqrt(cfg.h);
    parallel_for(N, cfg.workers, [&](std::size_t i) {
        Stepper st(coeffs, cfg.scheme);
        std::vector<double> x(d1), y(d2), dW(m);
        init.sample(cfg.seed, i, x, y);
        const auto record = [&](std::size_t slot) {
            std::copy(x.begin(), x.end(), ens.slices[slot].x.begin() + i * d1);
            std::copy(y.begin(), y.end(), ens.slices[slot].y.begin() + i * d2);
        };
        record(0);
        if (opts.observer) opts.observer(i, 0, 0.0, x, y);
        NormalStream ns({cfg.seed, StreamTag::increments, i});
        std::size_t slot = 1;
        for (std::size_t k = 0; k < K; ++k)
        {
            for (std::size_t j = 0; j < m; ++j) dW[j] = sqrt_h * ns.next();
            if (cfg.store_increments)
                std::copy(dW.begin(), dW.end(), ens.increments.begin() + (i * K + k) * m);
            MeanFieldInput mf;
            if (!slice_of_step.empty())
            {
                if (source_only)
                    mf.average = averages.at(slice_of_step[k]);
                else
                    mf.law = &flow->slices[slice_of_step[k]];
            }
            const double t = static_cast<double>(k) * cfg.h;
            const bool ok = st.advance(t, cfg.h, x, y, dW, mf);
            if (!ok)
            {
                ens.death_step[i] = k + 1;
                for (; slot < ens.slices.size(); ++slot) record(slot);
                return;
            }
            if (opts.observer) opts.observer(i, k + 1, t + cfg.h, x, y);
            if (slot < ens.slices.size() && ens.recorded_steps[slot] == k + 1) record(slot++);
        }
    });

    for (std::size_t i = 0; i < N; ++i)
    {
        if (ens.death_step[i] == kAlive) continue;
        for (std::size_t s = 0; s < ens.slices.size(); ++s)
        {
            if (ens.recorded_steps[s] < ens.death_step[i]) continue;
            auto& w = ens.slices[s].weights;
            if (w.empty()) w.assign(N, 1.0);
            w[i] = 0.0;
        }
    }
    return ens;
}

WeightedLaw girsanov_weighted_law(const Ensemble& reference, const ShiftField& xi)
{
    const SimConfig& cfg = reference.cfg;
    const std::size_t K = cfg.steps();
    if (cfg.record_every != 1 || reference.slices.size() != K + 1)
        throw ValidationError("Girsanov reweighting needs paths recorded at every step (record_every = 1)");
    if (reference.increments.empty())
        throw ValidationError("Girsanov reweighting needs stored Brownian increments (store_increments = true)");

    const std::size_t N = reference.size();
    const std::size_t m = static_cast<std::size_t>(cfg.m);
    const double h = cfg.h;
    std::vector<double> log_r(N, 0.0), energy(N, 0.0);
    std::vector<char> alive(N, 1);

    parallel_for(N, cfg.workers, [&](std::size_t i) {
        if (reference.death_step[i] != kAlive)
        {
            alive[i] = 0;
            return;
        }
        const ConstVec inc = reference.increments_of(i);
        std::vector<double> cur(m), next(m);
        const auto eval = [&](std::size_t k, std::vector<double>& out) {
            const EmpiricalLaw& s = reference.slices[k];
            xi(static_cast<double>(k) * h, s.x_of(i), s.y_of(i), out);
        };
        eval(0, cur);
        CompensatedSum stoch, quad;
        for (std::size_t k = 0; k < K; ++k)
        {
            eval(k + 1, next);
            double dot = 0.0, a2 = 0.0, b2 = 0.0;
            for (std::size_t j = 0; j < m; ++j)
            {
                dot += cur[j] * inc[k * m + j];
                a2 += cur[j] * cur[j];
                b2 += next[j] * next[j];
            }
            stoch.add(dot);
            quad.add(0.5 * h * (a2 + b2));
            std::swap(cur, next);
        }
        energy[i] = quad.value();
        log_r[i] = stoch.value() - 0.5 * energy[i];
    });

    WeightedLaw out;
    out.law = reference.final_law();
    out.law.weights.assign(N, 0.0);
    out.log_weights = log_r;
    std::vector<double> w, w2;
    CompensatedSum sw, sw2, swe;
    for (std::size_t i = 0; i < N; ++i)
    {
        if (!alive[i]) continue;
        const double r = std::exp(log_r[i]);
        out.law.weights[i] = r;
        w.push_back(r);
        w2.push_back(r * r);
        sw.add(r);
        sw2.add(r * r);
        swe.add(r * energy[i]);
    }
    out.mean_weight = mean_estimate(w);
    out.mean_weight_squared = mean_estimate(w2);
    out.effective_sample_size = sw2.value() > 0.0 ? sw.value() * sw.value() / sw2.value() : 0.0;
    out.relative_entropy = sw.value() > 0.0 ? 0.5 * swe.value() / sw.value() : 0.0;
    out.pinsker_bound = std::sqrt(2.0 * out.relative_entropy);
    if (out.effective_sample_size < 0.01 * static_cast<double>(N))
    {
        std::ostringstream os;
        os << "degenerate reweighting: effective sample size " << out.effective_sample_size << " of " << N;
        throw DegenerateReweighting(os.str());
    }
    return out;
}

KhasminskiiEstimate khasminskii_estimate(const SimConfig& cfg,
                                         const CoefficientSet& coeffs,
                                         const InitialLaw& init,
                                         const SpaceTimeScalar& f,
                                         std::size_t bootstrap_replicates)
{
    SimConfig run = cfg;
    run.record_every = 0;
    run.store_increments = false;
    const std::size_t N = run.N;
    std::vector<double> integral(N, 0.0), prev(N, 0.0);
    SimulateOptions opts;
    opts.observer = [&](std::size_t i, std::size_t step, double t, ConstVec, ConstVec y) {
        const double v = f(t, y);
        const double cur = v * v;
        if (step > 0) integral[i] += 0.5 * run.h * (prev[i] + cur);
        prev[i] = cur;
    };
    const Ensemble ens = simulate_ensemble(run, coeffs, init, opts);

    KhasminskiiEstimate out;
    std::vector<double> used, values;
    for (std::size_t i = 0; i < N; ++i)
    {
        if (ens.death_step[i] != kAlive) continue;
        used.push_back(integral[i]);
    }
    out.integral = mean_estimate(used);
    out.max_integral = used.empty() ? 0.0 : *std::max_element(used.begin(), used.end());
    // exp overflows double above ~709.78
    if (!(out.max_integral < 709.0) || ens.dead_count() > 0)
    {
        out.overflow = true;
        out.estimate = std::numeric_limits<double>::infinity();
        out.interval = {out.estimate, out.estimate};
        return out;
    }
    values.reserve(used.size());
    for (double v : used) values.push_back(std::exp(v));
    out.estimate = mean_estimate(values).mean;
    out.interval = bootstrap_mean_interval(values, bootstrap_replicates, cfg.seed);
    return out;
}
}  // namespace kinsde
