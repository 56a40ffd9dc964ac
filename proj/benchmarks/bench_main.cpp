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

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "kinsde/ergodicity.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/integrators.hpp"
#include "kinsde/rng.hpp"
#include "kinsde/zvonkin.hpp"

using namespace kinsde;

namespace
{
CoefficientSet example(bool riesz)
{
    Example31Params p;
    p.drift = {1.0, 0.05, 1.0, 0.0, {}};
    if (riesz) p.riesz = RieszDrift({{{0.0}, 0.5}}, 0.5, 1e-4);
    return make_example31(p);
}

void BM_StepperAdvance(benchmark::State& state)
{
    const CoefficientSet c = example(state.range(0) != 0);
    Stepper st(c, Scheme::euler);
    std::vector<double> x{0.5}, y{-0.25};
    NormalStream noise({7, StreamTag::increments, 0});
    double t = 0.0;
    for (auto _ : state)
    {
        const double dW[] = {0.03 * noise.next()};
        st.advance(t, 1e-3, x, y, dW);
        t += 1e-3;
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepperAdvance)->Arg(0)->Arg(1);

void BM_EnsembleSteps(benchmark::State& state)
{
    const CoefficientSet c = example(false);
    SimConfig cfg;
    cfg.T = 0.1;
    cfg.h = 1e-3;
    cfg.N = static_cast<std::size_t>(state.range(0));
    cfg.workers = 1;
    const InitialLaw init = InitialLaw::gaussian(PhaseState({0.0}, {0.0}), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(cfg, c, init).final_law().y.data());
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(cfg.N * cfg.steps()));
}
BENCHMARK(BM_EnsembleSteps)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PhiloxNormals(benchmark::State& state)
{
    NormalStream s({3, StreamTag::increments, 11});
    for (auto _ : state) benchmark::DoNotOptimize(s.next());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormals);

void BM_NormalAt(benchmark::State& state)
{
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(normal_at({3, StreamTag::increments, 11}, i++));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalAt);

EmpiricalLaw gaussian_cloud(std::size_t n, std::uint64_t seed)
{
    EmpiricalLaw law;
    for (std::size_t i = 0; i < n; ++i)
    {
        law.x.push_back(normal_at({seed, StreamTag::sampling, 0}, 2 * i));
        law.y.push_back(normal_at({seed, StreamTag::sampling, 0}, 2 * i + 1));
    }
    return law;
}

void BM_HistogramVarDistance(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const EmpiricalLaw a = gaussian_cloud(n, 1), b = gaussian_cloud(n, 2);
    const HistogramSpec spec{{-3.0, -4.0}, {3.0, 4.0}, {3, 24}};
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical_var_distance(histogram_of(a, spec, 1), histogram_of(b, spec, 1)));
    state.SetItemsProcessed(state.iterations() * 2 * static_cast<long long>(n));
}
BENCHMARK(BM_HistogramVarDistance)->Arg(1000)->Arg(10000);

void BM_ResolventSolve(benchmark::State& state)
{
    const RieszDrift r({{{0.0}, 0.5}}, 0.5, 1e-4);
    const ScalarField b = [&r](double y) {
        double out = 0.0;
        const double yy[] = {y};
        r.eval(yy, {&out, 1});
        return out;
    };
    const ScalarField sigma = [](double) { return 1.0; };
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_resolvent_1d(b, sigma, 256.0, 10.0, n).bound());
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(n));
}
BENCHMARK(BM_ResolventSolve)->Arg(1001)->Arg(4001)->Unit(benchmark::kMicrosecond);
}  // namespace

BENCHMARK_MAIN();
