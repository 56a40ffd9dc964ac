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
#include <gtest/gtest.h>

#include <cmath>

#include "kinsde/ergodicity.hpp"
#include "kinsde/errors.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/mckean_vlasov.hpp"

using namespace kinsde;

namespace
{
CoefficientSet base(double constant_b = 0.0)
{
    Example31Params p;
    p.drift = {1.0, 0.05, 1.0, 0.0, {}};
    p.constant_b = constant_b;
    return make_example31(p);
}

SimConfig config(std::size_t N, double T = 1.0, std::uint64_t seed = 5)
{
    SimConfig c;
    c.T = T;
    c.h = 0.01;
    c.N = N;
    c.seed = seed;
    c.record_every = 1;
    c.hist = {{-3.0, -4.0}, {3.0, 4.0}, {3, 24}};
    return c;
}

const InitialLaw kInit = InitialLaw::gaussian(PhaseState({1.0}, {1.5}), 0.5);

MeasureFlow point_flow(const std::vector<double>& times, double x, double y)
{
    return MeasureFlow::constant(EmpiricalLaw::point_mass(PhaseState({x}, {y})), times);
}
}  // namespace

TEST(ParticleSystem, ZeroCouplingMatchesDecoupledRun)
{
    const SimConfig cfg = config(300);
    const FlowRun ps = particle_system_run(cfg, interaction_z2(base(), tanh_relative_kernel(1), 0.0), kInit);
    const Ensemble e = simulate_ensemble(cfg, base(), kInit);
    ASSERT_EQ(ps.flow.slices.size(), e.slices.size());
    for (std::size_t k = 0; k < e.slices.size(); ++k)
    {
        EXPECT_EQ(ps.flow.slices[k].x, e.slices[k].x);
        EXPECT_EQ(ps.flow.slices[k].y, e.slices[k].y);
    }
}

TEST(ParticleSystem, ConstantKernelIsDriftShift)
{
    const double kappa = 0.4, w = -0.75;
    const SimConfig cfg = config(300);
    const FlowRun ps = particle_system_run(cfg, interaction_z2(base(), constant_kernel({w}), kappa), kInit);
    const Ensemble e = simulate_ensemble(cfg, base(kappa * w), kInit);
    EXPECT_EQ(ps.flow.slices.back().x, e.slices.back().x);
    EXPECT_EQ(ps.flow.slices.back().y, e.slices.back().y);
}

TEST(ParticleSystem, WorkerCountDoesNotChangeResults)
{
    SimConfig cfg = config(400);
    const CoefficientSet c = interaction_z2(base(), tanh_relative_kernel(1), 0.3);
    cfg.workers = 1;
    const FlowRun a = particle_system_run(cfg, c, kInit);
    cfg.workers = 3;
    const FlowRun b = particle_system_run(cfg, c, kInit);
    EXPECT_EQ(a.flow.slices.back().y, b.flow.slices.back().y);
}

TEST(ParticleSystem, PropagationOfChaosSanity)
{
    const CoefficientSet c = interaction_z2(base(), tanh_velocity_kernel(1), 0.5);
    SimConfig small = config(5000);
    small.record_every = 0;
    SimConfig large = small;
    large.N = 10000;
    large.seed = 6;
    const FlowRun a = particle_system_run(small, c, kInit);
    const FlowRun b = particle_system_run(large, c, kInit);
    const double tv = empirical_var_distance(histogram_of(a.flow.slices.back(), small.hist),
                                             histogram_of(b.flow.slices.back(), small.hist));
    const double floor = bootstrap_noise_floor(a.flow.slices.back(), small.hist, 100, 2);
    EXPECT_LT(tv, 3.0 * floor);
}

TEST(RhoLambda, Definitions)
{
    const std::vector<double> times{0.0, 1.0};
    const HistogramSpec spec = config(1).hist;
    const MeasureFlow a = point_flow(times, 0.5, 0.5);
    EXPECT_EQ(rho_lambda(a, a, 1.0, spec), 0.0);

    MeasureFlow at_zero = a;
    at_zero.slices[0] = EmpiricalLaw::point_mass(PhaseState({-2.5}, {-3.5}));
    EXPECT_DOUBLE_EQ(rho_lambda(a, at_zero, 1.0, spec), 2.0);

    MeasureFlow at_one = a;
    at_one.slices[1] = EmpiricalLaw::point_mass(PhaseState({-2.5}, {-3.5}));
    EXPECT_NEAR(rho_lambda(a, at_one, 1.0, spec), 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_DOUBLE_EQ(rho_lambda(a, at_one, 0.0, spec), 2.0);

    const MeasureFlow shorter = point_flow({0.0, 0.5}, 0.5, 0.5);
    EXPECT_THROW(rho_lambda(a, shorter, 1.0, spec), ValidationError);
}

TEST(RhoLambda, NonincreasingInLambdaAndSymmetric)
{
    const SimConfig cfg = config(2000);
    const Ensemble e1 = simulate_ensemble(cfg, base(), kInit);
    const Ensemble e2 = simulate_ensemble(cfg, base(0.5), kInit);
    const MeasureFlow f1{e1.times, e1.slices}, f2{e2.times, e2.slices};
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 0.5, 1.0, 4.0})
    {
        const double r = rho_lambda(f1, f2, lambda, cfg.hist);
        EXPECT_LE(r, prev);
        EXPECT_EQ(r, rho_lambda(f2, f1, lambda, cfg.hist));
        prev = r;
    }
}

TEST(Picard, ZeroCouplingStationaryAfterOneIteration)
{
    const SimConfig cfg = config(1000);
    PicardState s = picard_init(cfg, interaction_z2(base(), tanh_velocity_kernel(1), 0.0), kInit);
    const CoefficientSet c = interaction_z2(base(), tanh_velocity_kernel(1), 0.0);
    s = picard_iterate(s, cfg, c, kInit);
    s = picard_iterate(s, cfg, c, kInit);
    ASSERT_EQ(s.rho_history.size(), 2u);
    EXPECT_GT(s.rho_history[0], 0.0);
    EXPECT_EQ(s.rho_history[1], 0.0);
}

TEST(Picard, BoundedKernelContracts)
{
    const SimConfig cfg = config(10000, 1.0, 41);
    const CoefficientSet c = interaction_z2(base(), tanh_velocity_kernel(1), 0.2);
    const PicardState s = picard_solve(cfg, c, kInit);
    EXPECT_TRUE(s.converged);
    EXPECT_LE(s.iteration, 20);
    EXPECT_DOUBLE_EQ(s.lambda, 4.0 * 0.2 / cfg.T);
    for (std::size_t n = 1; n < s.rho_history.size(); ++n)
    {
        if (s.rho_history[n - 1] > s.noise_floor)
        {
            EXPECT_LT(s.rho_history[n] / s.rho_history[n - 1], 1.0);
        }
    }
    const FlowRun ps = particle_system_run(cfg, c, kInit);
    const double tv = empirical_var_distance(histogram_of(s.flow.slices.back(), cfg.hist),
                                             histogram_of(ps.flow.slices.back(), cfg.hist));
    EXPECT_LT(tv, 3.0 * s.noise_floor);
}

TEST(Picard, NeedsEveryStepRecorded)
{
    SimConfig cfg = config(10);
    cfg.record_every = 2;
    EXPECT_THROW(picard_solve(cfg, interaction_z2(base(), tanh_velocity_kernel(1), 0.1), kInit), ValidationError);
}

TEST(SigmaPseudoInverse, ScalarAndDiagonal)
{
    double out[2];
    sigma_pseudo_inverse_apply(make_linear(1, 0, 0, 0, 0, 2.0), 0.0, std::vector<double>{0.0}, std::vector<double>{3.0},
                               {out, 1});
    EXPECT_DOUBLE_EQ(out[0], 1.5);
    sigma_pseudo_inverse_apply(make_linear(2, 0, 0, 0, 0, 4.0), 0.0, std::vector<double>{0.0, 0.0},
                               std::vector<double>{1.0, -2.0}, {out, 2});
    EXPECT_NEAR(out[0], 0.25, 1e-15);
    EXPECT_NEAR(out[1], -0.5, 1e-15);
}

namespace
{
FlowBoundReport position_kernel_bound(double kappa, double a, double b)
{
    SimConfig cfg = config(4000, 1.0, 17);
    const CoefficientSet c = interaction_z2(base(), tanh_position_kernel(1), kappa);
    std::vector<double> times;
    for (std::size_t k = 0; k <= cfg.steps(); ++k) times.push_back(static_cast<double>(k) * cfg.h);
    return girsanov_flow_bound(cfg, c, kInit, point_flow(times, a, 0.0), point_flow(times, b, 0.0));
}
}  // namespace

TEST(FlowBound, EqualFlowsGiveZero)
{
    const FlowBoundReport r = position_kernel_bound(0.3, 1.0, 1.0);
    for (std::size_t i = 0; i < r.times.size(); ++i)
    {
        EXPECT_EQ(r.bound[i], 0.0);
        EXPECT_EQ(r.empirical[i], 0.0);
    }
    EXPECT_TRUE(r.respected);
}

TEST(FlowBound, ConstantShiftClosedForm)
{
    const double kappa = 0.3, a = 1.0, b = -1.0;
    const double xi = kappa * (std::tanh(a) - std::tanh(b));
    const FlowBoundReport r = position_kernel_bound(kappa, a, b);
    for (std::size_t i = 0; i < r.times.size(); ++i)
        EXPECT_NEAR(r.bound[i], xi * std::sqrt(r.times[i]), 1e-12);
    EXPECT_TRUE(r.respected);
}

TEST(FlowBound, LinearInKappa)
{
    std::vector<double> kappas{0.1, 0.2, 0.4}, bounds;
    for (double k : kappas) bounds.push_back(position_kernel_bound(k, 1.0, -1.0).bound.back());
    const LineFit f = fit_line(kappas, bounds);
    EXPECT_GT(f.r_squared, 0.99);
    EXPECT_NEAR(f.intercept, 0.0, 1e-12);
}

TEST(Sweep, IdenticalLawsStayAtFloor)
{
    SimConfig cfg = config(2000, 4.0, 3);
    cfg.h = 0.02;
    cfg.record_every = 10;
    SweepOptions o;
    o.kappas = {0.0, 0.2};
    const CoefficientFamily fam = [](double k) { return interaction_z2(base(), tanh_velocity_kernel(1), k); };
    const SweepReport r = uniform_ergodicity_sweep(fam, kInit, kInit, cfg, o);
    for (const auto& k : r.results)
    {
        EXPECT_FALSE(k.confirmed);
        for (std::size_t i = 1; i < k.distance.size(); ++i) EXPECT_LT(k.distance[i], 2.0 * k.noise_floor);
    }
    EXPECT_FALSE(r.kappa_star.has_value());
}
