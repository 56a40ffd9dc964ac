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

#include "kinsde/mckean_vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>
#include <omp.h>

#include "kinsde/errors.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/parallel.hpp"
#include "kinsde/rng.hpp"
#include "kinsde/stats.hpp"

namespace kinsde
{
namespace
{
int pool_size(int workers)
{
    return std::max(workers, omp_get_max_threads()) + 1;
}

void require_same_grid(const MeasureFlow& a, const MeasureFlow& b)
{
    bool same = a.times.size() == b.times.size() && a.slices.size() == b.slices.size();
    for (std::size_t k = 0; same && k < a.times.size(); ++k)
        same = std::abs(a.times[k] - b.times[k]) <= 1e-12 * std::max(1.0, std::abs(a.times[k]));
    if (!same) throw ValidationError("grid mismatch between measure flows");
}

// Source-only kernel averages for each step's nearest flow slice.
std::vector<std::vector<double>> step_averages(const CoefficientSet& coeffs, const MeasureFlow& flow, const SimConfig& cfg)
{
    const std::size_t K = cfg.steps();
    std::vector<std::vector<double>> out(K + 1);
    std::map<std::size_t, std::vector<double>> cache;
    const std::vector<double> zx(coeffs.d1, 0.0), zy(coeffs.d2, 0.0);
    for (std::size_t k = 0; k <= K; ++k)
    {
        const std::size_t s = flow.nearest_slice(static_cast<double>(k) * cfg.h);
        auto it = cache.find(s);
        if (it == cache.end())
        {
            std::vector<double> avg(coeffs.d2, 0.0);
            kernel_average(coeffs.interaction->kernel, zx, zy, flow.slices[s], avg);
            it = cache.emplace(s, std::move(avg)).first;
        }
        out[k] = it->second;
    }
    return out;
}
}  // namespace

FlowRun particle_system_run(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init)
{
    const ValidationReport report = validate_config(cfg, coeffs);
    if (!report.ok()) throw ValidationError(report.summary());
    if (!coeffs.interaction) throw ValidationError("particle system needs a measure-dependent coefficient (interaction_z2)");
    if (init.d1() != coeffs.d1 || init.d2() != coeffs.d2)
        throw ValidationError("initial law dimension differs from the coefficient dimensions");

    const std::size_t N = cfg.N;
    const std::size_t K = cfg.steps();
    const std::size_t m = static_cast<std::size_t>(coeffs.m);
    const int d1 = coeffs.d1, d2 = coeffs.d2;
    const bool source_only = coeffs.interaction->kernel.source_only;
    if (m > 16) throw ValidationError("particle system supports m <= 16 noise dimensions");

    FlowRun run;
    Ensemble& ens = run.ensemble;
    ens.cfg = cfg;
    ens.coefficients = coeffs.name;
    ens.recorded_steps = recording_steps(cfg);
    for (std::size_t k : ens.recorded_steps) ens.times.push_back(static_cast<double>(k) * cfg.h);
    ens.death_step.assign(N, kAlive);
    if (cfg.store_increments) ens.increments.assign(N * K * m, 0.0);

    EmpiricalLaw cur;
    cur.d1 = d1;
    cur.d2 = d2;
    cur.x.assign(N * d1, 0.0);
    cur.y.assign(N * d2, 0.0);
    parallel_for(N, cfg.workers, [&](std::size_t i) {
        init.sample(cfg.seed, i, OutVec(cur.x.data() + i * d1, d1), OutVec(cur.y.data() + i * d2, d2));
    });
    std::vector<double> nx = cur.x, ny = cur.y;

    std::vector<NormalStream> streams;
    streams.reserve(N);
    for (std::size_t i = 0; i < N; ++i) streams.emplace_back(StreamAddress{cfg.seed, StreamTag::increments, i});
    std::vector<Stepper> pool;
    for (int w = 0; w < pool_size(cfg.workers); ++w) pool.emplace_back(coeffs, cfg.scheme);

    std::size_t slot = 0;
    const auto record = [&](std::size_t k) {
        if (slot < ens.recorded_steps.size() && ens.recorded_steps[slot] == k)
        {
            ens.slices.push_back(cur);
            ++slot;
        }
    };
    record(0);

    const double sqrt_h = std::sqrt(cfg.h);
    std::vector<double> avg(d2, 0.0);
    const std::vector<double> zx(d1, 0.0), zy(d2, 0.0);
    for (std::size_t k = 0; k < K; ++k)
    {
        MeanFieldInput mf;
        if (source_only)
        {
            kernel_average(coeffs.interaction->kernel, zx, zy, cur, avg);
            mf.average = avg;
        }
        else
            mf.law = &cur;
        const double t = static_cast<double>(k) * cfg.h;
        bool any_death = false;
        std::vector<char> died(N, 0);
        parallel_for(N, cfg.workers, [&](std::size_t i) {
            if (ens.death_step[i] != kAlive) return;
            Stepper& st = pool[static_cast<std::size_t>(omp_get_thread_num())];
            double dw[16];
            for (std::size_t j = 0; j < m; ++j) dw[j] = sqrt_h * streams[i].next();
            if (cfg.store_increments) std::copy(dw, dw + m, ens.increments.begin() + (i * K + k) * m);
            OutVec x(nx.data() + i * d1, d1), y(ny.data() + i * d2, d2);
            if (!st.advance(t, cfg.h, x, y, ConstVec(dw, m), mf)) died[i] = 1;
        });
        for (std::size_t i = 0; i < N; ++i)
        {
            if (!died[i]) continue;
            any_death = true;
            ens.death_step[i] = k + 1;
        }
        cur.x = nx;
        cur.y = ny;
        if (any_death || !cur.weights.empty())
        {
            cur.weights.assign(N, 1.0);
            for (std::size_t i = 0; i < N; ++i)
                if (ens.death_step[i] != kAlive) cur.weights[i] = 0.0;
        }
        record(k + 1);
    }
    run.flow.times = ens.times;
    run.flow.slices = ens.slices;
    return run;
}

double rho_lambda(const MeasureFlow& a,
                  const MeasureFlow& b,
                  double lambda,
                  const HistogramSpec& spec,
                  const LyapunovV* V,
                  int workers)
{
    if (!(lambda >= 0.0)) throw ValidationError("rho weight lambda must be >= 0");
    require_same_grid(a, b);
    double best = 0.0;
    for (std::size_t k = 0; k < a.times.size(); ++k)
    {
        const HistogramLaw ha = histogram_of(a.slices[k], spec, workers);
        const HistogramLaw hb = histogram_of(b.slices[k], spec, workers);
        const double d = V != nullptr ? empirical_v_distance(ha, hb, *V) : empirical_var_distance(ha, hb);
        best = std::max(best, std::exp(-lambda * a.times[k]) * d);
    }
    return best;
}

double default_picard_lambda(const CoefficientSet& coeffs, const SimConfig& cfg)
{
    const double kappa = coeffs.interaction ? coeffs.interaction->kappa : 0.0;
    return 4.0 * kappa / cfg.T;
}

PicardState picard_init(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init, const PicardOptions& opts)
{
    if (cfg.record_every != 1) throw ValidationError("Picard iteration needs record_every = 1 (flow grid = step grid)");
    PicardState st;
    st.lambda = opts.lambda >= 0.0 ? opts.lambda : default_picard_lambda(coeffs, cfg);
    st.common_random_numbers = opts.common_random_numbers;
    EmpiricalLaw law;
    law.d1 = coeffs.d1;
    law.d2 = coeffs.d2;
    law.x.assign(cfg.N * coeffs.d1, 0.0);
    law.y.assign(cfg.N * coeffs.d2, 0.0);
    for (std::size_t i = 0; i < cfg.N; ++i)
        init.sample(cfg.seed, i, OutVec(law.x.data() + i * coeffs.d1, coeffs.d1),
                    OutVec(law.y.data() + i * coeffs.d2, coeffs.d2));
    std::vector<double> times;
    for (std::size_t k : recording_steps(cfg)) times.push_back(static_cast<double>(k) * cfg.h);
    st.flow = MeasureFlow::constant(law, std::move(times));
    return st;
}

PicardState picard_iterate(PicardState state,
                           const SimConfig& cfg,
                           const CoefficientSet& coeffs,
                           const InitialLaw& init,
                           const PicardOptions& opts)
{
    if (cfg.record_every != 1) throw ValidationError("Picard iteration needs record_every = 1 (flow grid = step grid)");
    SimConfig run = cfg;
    run.store_increments = false;
    if (!state.common_random_numbers) run.seed = cfg.seed + static_cast<std::uint64_t>(state.iteration) + 1;
    SimulateOptions so;
    so.frozen_flow = &state.flow;
    Ensemble ens = simulate_ensemble(run, coeffs, init, so);
    MeasureFlow next;
    next.times = ens.times;
    next.slices = std::move(ens.slices);
    const double rho = rho_lambda(next, state.flow, state.lambda, cfg.hist, opts.V, cfg.workers);
    if (state.noise_floor == 0.0)
        state.noise_floor =
            bootstrap_noise_floor(next.slices.back(), cfg.hist, opts.bootstrap_replicates, cfg.seed, opts.V, 0.95, cfg.workers);
    state.rho_history.push_back(rho);
    state.flow = std::move(next);
    ++state.iteration;
    state.converged = rho < opts.stop_factor * state.noise_floor;
    return state;
}

PicardState picard_solve(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init, const PicardOptions& opts)
{
    PicardState st = picard_init(cfg, coeffs, init, opts);
    while (st.iteration < opts.max_iterations)
    {
        st = picard_iterate(std::move(st), cfg, coeffs, init, opts);
        if (st.converged) break;
    }
    return st;
}

void sigma_pseudo_inverse_apply(const CoefficientSet& coeffs, double t, ConstVec y, ConstVec v, OutVec out)
{
    const int d2 = coeffs.d2, m = coeffs.m;
    std::vector<double> s(static_cast<std::size_t>(d2) * m);
    coeffs.sigma(t, y, s);
    if (d2 == 1 && m == 1)
    {
        out[0] = v[0] / s[0];
        return;
    }
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(s.data(), d2, m);
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), d2);
    const Eigen::MatrixXd G = S * S.transpose();
    const Eigen::VectorXd z = G.ldlt().solve(vv);
    Eigen::Map<Eigen::VectorXd>(out.data(), m) = S.transpose() * z;
}

FlowBoundReport girsanov_flow_bound(const SimConfig& cfg,
                                    const CoefficientSet& coeffs,
                                    const InitialLaw& init,
                                    const MeasureFlow& mu,
                                    const MeasureFlow& nu,
                                    const FlowBoundOptions& opts)
{
    if (!coeffs.interaction) throw ValidationError("flow comparison needs a measure-dependent coefficient");
    if (!(coeffs.sigma_bounds.sigma_sup > 0.0) || !std::isfinite(coeffs.sigma_bounds.inverse_gram_sup))
        throw ValidationError("Girsanov shift needs nondegenerate sigma");
    if (opts.report_every == 0) throw ValidationError("report_every must be positive");
    SimConfig run = cfg;
    run.record_every = 1;
    run.store_increments = true;
    SimulateOptions ref_opts;
    ref_opts.frozen_flow = &nu;
    const Ensemble ref = simulate_ensemble(run, coeffs, init, ref_opts);
    SimConfig trun = run;
    trun.store_increments = false;
    SimulateOptions tgt_opts;
    tgt_opts.frozen_flow = &mu;
    const Ensemble tgt = simulate_ensemble(trun, coeffs, init, tgt_opts);

    const std::size_t N = cfg.N, K = run.steps();
    const std::size_t m = static_cast<std::size_t>(coeffs.m);
    const int d2 = coeffs.d2;
    std::vector<std::size_t> report_steps;
    for (std::size_t k = 0; k < K; k += opts.report_every) report_steps.push_back(k);
    report_steps.push_back(K);
    const std::size_t R = report_steps.size();

    const bool source_only = coeffs.interaction->kernel.source_only;
    std::vector<std::vector<double>> avg_mu, avg_nu;
    if (source_only)
    {
        avg_mu = step_averages(coeffs, mu, run);
        avg_nu = step_averages(coeffs, nu, run);
    }
    const double kappa = coeffs.interaction->kappa;

    std::vector<double> weight(N * R, 0.0), energy(N * R, 0.0);
    parallel_for(N, cfg.workers, [&](std::size_t i) {
        if (ref.death_step[i] != kAlive) return;
        const ConstVec inc = ref.increments_of(i);
        std::vector<double> am(d2), an(d2), diff(d2), cur(m), next(m);
        const auto xi_at = [&](std::size_t k, std::vector<double>& out) {
            const EmpiricalLaw& s = ref.slices[k];
            const double t = static_cast<double>(k) * run.h;
            if (source_only)
            {
                am = avg_mu[k];
                an = avg_nu[k];
            }
            else
            {
                kernel_average(coeffs.interaction->kernel, s.x_of(i), s.y_of(i),
                               mu.slices[mu.nearest_slice(t)], am);
                kernel_average(coeffs.interaction->kernel, s.x_of(i), s.y_of(i),
                               nu.slices[nu.nearest_slice(t)], an);
            }
            for (int c = 0; c < d2; ++c) diff[c] = kappa * (am[c] - an[c]);
            sigma_pseudo_inverse_apply(coeffs, t, s.y_of(i), diff, out);
        };
        xi_at(0, cur);
        CompensatedSum stoch, quad;
        std::size_t r = 0;
        const auto store = [&](std::size_t k) {
            if (r < R && report_steps[r] == k)
            {
                weight[i * R + r] = std::exp(stoch.value() - 0.5 * quad.value());
                energy[i * R + r] = quad.value();
                ++r;
            }
        };
        store(0);
        for (std::size_t k = 0; k < K; ++k)
        {
            xi_at(k + 1, next);
            double dot = 0.0, a2 = 0.0, b2 = 0.0;
            for (std::size_t j = 0; j < m; ++j)
            {
                dot += cur[j] * inc[k * m + j];
                a2 += cur[j] * cur[j];
                b2 += next[j] * next[j];
            }
            stoch.add(dot);
            quad.add(0.5 * run.h * (a2 + b2));
            std::swap(cur, next);
            store(k + 1);
        }
    });

    FlowBoundReport rep;
    rep.min_effective_sample_size = static_cast<double>(N);
    for (std::size_t r = 0; r < R; ++r)
    {
        CompensatedSum w, w2, we;
        for (std::size_t i = 0; i < N; ++i)
        {
            const double wi = weight[i * R + r];
            w.add(wi);
            w2.add(wi * wi);
            we.add(wi * energy[i * R + r]);
        }
        const double ess = w2.value() > 0.0 ? w.value() * w.value() / w2.value() : 0.0;
        rep.min_effective_sample_size = std::min(rep.min_effective_sample_size, ess);
        if (ess < 0.01 * static_cast<double>(N))
        {
            std::ostringstream os;
            os << "degenerate reweighting: effective sample size " << ess << " of " << N << " at t = "
               << static_cast<double>(report_steps[r]) * run.h;
            throw DegenerateReweighting(os.str());
        }
        const std::size_t k = report_steps[r];
        rep.times.push_back(static_cast<double>(k) * run.h);
        rep.bound.push_back(std::sqrt(we.value() / w.value()));
        const HistogramLaw ha = histogram_of(tgt.slices[k], cfg.hist, cfg.workers);
        const HistogramLaw hb = histogram_of(ref.slices[k], cfg.hist, cfg.workers);
        rep.empirical.push_back(opts.V != nullptr ? empirical_v_distance(ha, hb, *opts.V) : empirical_var_distance(ha, hb));
    }
    rep.noise_floor = bootstrap_noise_floor(ref.final_law(), cfg.hist, opts.bootstrap_replicates, cfg.seed, opts.V, 0.95,
                                            cfg.workers);
    rep.respected = true;
    for (std::size_t r = 0; r < R; ++r)
        if (rep.empirical[r] > rep.bound[r] + rep.noise_floor) rep.respected = false;
    return rep;
}

SweepReport uniform_ergodicity_sweep(const CoefficientFamily& family,
                                     const InitialLaw& first,
                                     const InitialLaw& second,
                                     const SimConfig& cfg,
                                     const SweepOptions& opts)
{
    SweepReport rep;
    for (double kappa : opts.kappas)
    {
        const CoefficientSet coeffs = family(kappa);
        SimConfig cfg_b = cfg;
        cfg_b.seed = cfg.seed + opts.second_seed_offset;
        const FlowRun a = particle_system_run(cfg, coeffs, first);
        const FlowRun b = particle_system_run(cfg_b, coeffs, second);
        KappaResult res;
        res.kappa = kappa;
        res.times = a.flow.times;
        for (std::size_t k = 0; k < a.flow.times.size(); ++k)
        {
            const HistogramLaw ha = histogram_of(a.flow.slices[k], cfg.hist, cfg.workers);
            const HistogramLaw hb = histogram_of(b.flow.slices[k], cfg.hist, cfg.workers);
            res.distance.push_back(empirical_var_distance(ha, hb));
        }
        res.noise_floor = bootstrap_noise_floor(a.flow.slices.back(), cfg.hist, opts.bootstrap_replicates, cfg.seed,
                                                nullptr, 0.95, cfg.workers);
        std::vector<double> ft, fd;
        for (std::size_t k = 0; k < res.times.size(); ++k)
        {
            if (res.times[k] + 1e-12 < opts.fit_from) continue;
            ft.push_back(res.times[k]);
            fd.push_back(res.distance[k]);
        }
        res.fit = fit_exponential_decay(ft, fd, res.noise_floor);
        res.confirmed = res.fit.verdict == DecayVerdict::decay_confirmed && res.fit.r_squared > opts.min_r_squared;
        if (res.confirmed && (!rep.kappa_star || kappa > *rep.kappa_star)) rep.kappa_star = kappa;
        rep.results.push_back(std::move(res));
    }
    return rep;
}
}  // namespace kinsde
