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
#include <functional>
#include <optional>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/ergodicity.hpp"
#include "kinsde/integrators.hpp"

namespace kinsde
{
struct FlowRun
{
    MeasureFlow flow;
    Ensemble ensemble;
};

/// N coupled particles; the measure argument at step k is the empirical law
/// of the ensemble's states at t_k (before any particle moves).
FlowRun particle_system_run(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init);

/// sup over grid times of exp(-lambda t) d(a_t, b_t), with d the histogram
/// variation distance (or the V-distance when V is given).
double rho_lambda(const MeasureFlow& a,
                  const MeasureFlow& b,
                  double lambda,
                  const HistogramSpec& spec,
                  const LyapunovV* V = nullptr,
                  int workers = 0);

struct PicardOptions
{
    /// Metric weight; negative selects 4 kappa / T.
    double lambda = -1.0;
    bool common_random_numbers = true;
    int max_iterations = 20;
    /// Stop once rho drops below stop_factor times the noise floor.
    double stop_factor = 2.0;
    std::size_t bootstrap_replicates = 100;
    const LyapunovV* V = nullptr;
};

struct PicardState
{
    int iteration = 0;
    MeasureFlow flow;
    std::vector<double> rho_history;
    double lambda = 0.0;
    bool common_random_numbers = true;
    double noise_floor = 0.0;
    bool converged = false;
};

double default_picard_lambda(const CoefficientSet& coeffs, const SimConfig& cfg);

/// mu^(0): the initial law held constant over the recording grid.
PicardState picard_init(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init, const PicardOptions& opts = {});

/// mu^(n+1) = Psi(mu^(n)) via the frozen-flow SDE; appends rho(mu^(n+1), mu^(n)).
/// Requires cfg.record_every == 1 so the flow grid is the step grid.
PicardState picard_iterate(PicardState state,
                           const SimConfig& cfg,
                           const CoefficientSet& coeffs,
                           const InitialLaw& init,
                           const PicardOptions& opts = {});

PicardState picard_solve(const SimConfig& cfg,
                         const CoefficientSet& coeffs,
                         const InitialLaw& init,
                         const PicardOptions& opts = {});

/// sigma^* (sigma sigma^*)^{-1} v at (t, y).
void sigma_pseudo_inverse_apply(const CoefficientSet& coeffs, double t, ConstVec y, ConstVec v, OutVec out);

struct FlowBoundReport
{
    std::vector<double> times;
    std::vector<double> empirical;  ///< d(Psi_t(mu), Psi_t(nu)) from two direct runs
    std::vector<double> bound;      ///< sqrt(int_0^t E_Q |xi|^2 ds)
    double noise_floor = 0.0;
    double min_effective_sample_size = 0.0;
    bool respected = false;
};

struct FlowBoundOptions
{
    std::size_t report_every = 10;
    std::size_t bootstrap_replicates = 100;
    const LyapunovV* V = nullptr;
};

/// Runs the frozen-flow SDE under nu (reference, with stored increments) and
/// under mu (same seed), and compares the direct distance with the Girsanov
/// bound built from xi = sigma^+ (Z2(., mu_s) - Z2(., nu_s)).
FlowBoundReport girsanov_flow_bound(const SimConfig& cfg,
                                    const CoefficientSet& coeffs,
                                    const InitialLaw& init,
                                    const MeasureFlow& mu,
                                    const MeasureFlow& nu,
                                    const FlowBoundOptions& opts = {});

using CoefficientFamily = std::function<CoefficientSet(double kappa)>;

struct SweepOptions
{
    std::vector<double> kappas;
    double fit_from = 1.0;  ///< fit window start; the window ends at T
    double min_r_squared = 0.9;
    std::size_t bootstrap_replicates = 100;
    /// Seed offset of the second run; 0 reuses the first seed.
    std::uint64_t second_seed_offset = 1;
};

struct KappaResult
{
    double kappa = 0.0;
    std::vector<double> times;
    std::vector<double> distance;
    double noise_floor = 0.0;
    DecayFit fit;
    bool confirmed = false;
};

struct SweepReport
{
    std::vector<KappaResult> results;
    std::optional<double> kappa_star;  ///< largest kappa with confirmed decay
};

SweepReport uniform_ergodicity_sweep(const CoefficientFamily& family,
                                     const InitialLaw& first,
                                     const InitialLaw& second,
                                     const SimConfig& cfg,
                                     const SweepOptions& opts);
}  // namespace kinsde
