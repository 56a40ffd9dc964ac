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
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/rng.hpp"
#include "kinsde/stats.hpp"

namespace kinsde
{
/// Any coordinate beyond this magnitude marks a particle dead.
inline constexpr double kBlowupThreshold = 1e12;
/// Dead fraction above which an ensemble run is flagged unstable.
inline constexpr double kUnstableFraction = 1e-3;

/// Mean-field input for one drift evaluation. A non-empty `average` is a
/// precomputed kernel average (source-only kernels); otherwise the kernel is
/// averaged over `law`, and a null law means the point mass at the origin.
struct MeanFieldInput
{
    const EmpiricalLaw* law = nullptr;
    ConstVec average;
};

/// Reusable scratch space for stepping one particle; not thread-safe.
class Stepper
{
public:
    Stepper(const CoefficientSet& coeffs, Scheme scheme);

    /// Advance (x, y) in place by one step. Returns false when the new state
    /// is non-finite or exceeds kBlowupThreshold.
    bool advance(double t, double h, OutVec x, OutVec y, ConstVec dW, const MeanFieldInput& mf = {});

    /// Total y-drift Z2 + b at (t, x, y); exposed for shift fields and checks.
    void y_drift(double t, ConstVec x, ConstVec y, const MeanFieldInput& mf, OutVec out);

private:
    const CoefficientSet* coeffs_;
    Scheme scheme_;
    std::vector<double> vx_;
    std::vector<double> vy_;
    std::vector<double> tmp_;
    std::vector<double> sig_;
};

PhaseState em_step(const PhaseState& s,
                   double t,
                   double h,
                   const CoefficientSet& coeffs,
                   const EmpiricalLaw* law,
                   ConstVec dW);

PhaseState tamed_em_step(const PhaseState& s,
                         double t,
                         double h,
                         const CoefficientSet& coeffs,
                         const EmpiricalLaw* law,
                         ConstVec dW);

struct InitialLaw
{
    enum class Kind
    {
        dirac,
        gaussian,  ///< center + spread * N(0, I), independent coordinates
        cloud,     ///< particle i starts at cloud point i mod size
    };

    Kind kind = Kind::dirac;
    PhaseState center{{0.0}, {0.0}};
    double spread = 0.0;
    EmpiricalLaw cloud;

    static InitialLaw dirac(PhaseState s) { return {Kind::dirac, std::move(s), 0.0, {}}; }
    static InitialLaw gaussian(PhaseState c, double spread) { return {Kind::gaussian, std::move(c), spread, {}}; }
    static InitialLaw from_cloud(EmpiricalLaw law);

    int d1() const;
    int d2() const;
    void sample(std::uint64_t seed, std::size_t particle, OutVec x, OutVec y) const;
};

/// Called after the initial draw (step 0) and after each completed step with
/// the particle's new state. Invoked from the worker that owns the particle.
using StepObserver =
    std::function<void(std::size_t particle, std::size_t step, double t, ConstVec x, ConstVec y)>;

struct SimulateOptions
{
    const MeasureFlow* frozen_flow = nullptr;
    StepObserver observer;
};

struct PathSample
{
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<double> increments;  ///< K * m, empty when not stored
};

inline constexpr std::size_t kAlive = std::numeric_limits<std::size_t>::max();

struct Ensemble
{
    SimConfig cfg;
    std::string coefficients;
    std::vector<std::size_t> recorded_steps;
    std::vector<double> times;
    /// One law per recorded time. Dead particles carry weight 0 from the
    /// recorded time of their death onwards.
    std::vector<EmpiricalLaw> slices;
    std::vector<std::size_t> death_step;  ///< kAlive or the step that blew up
    std::vector<double> increments;       ///< N * K * m, particle-major, when stored

    std::size_t size() const { return death_step.size(); }
    std::size_t dead_count() const;
    double dead_fraction() const;
    bool unstable() const { return dead_fraction() > kUnstableFraction; }
    const EmpiricalLaw& final_law() const { return slices.back(); }
    ConstVec increments_of(std::size_t particle) const;
    PathSample path(std::size_t particle) const;
};

std::vector<std::size_t> recording_steps(const SimConfig& cfg);

/// Throws ValidationError when validate_config reports an error.
Ensemble simulate_ensemble(const SimConfig& cfg,
                           const CoefficientSet& coeffs,
                           const InitialLaw& init,
                           const SimulateOptions& opts = {});

/// Drift shift xi(t, x, y) in R^m.
using ShiftField = std::function<void(double t, ConstVec x, ConstVec y, OutVec xi)>;

struct WeightedLaw
{
    EmpiricalLaw law;  ///< reference final states with weights R_T
    std::vector<double> log_weights;
    MeanEstimate mean_weight;
    MeanEstimate mean_weight_squared;
    double effective_sample_size = 0.0;
    /// E_P[R_T log R_T], estimated as half the R_T-weighted mean of int |xi|^2 ds.
    double relative_entropy = 0.0;
    /// sqrt(2 E[R_T log R_T]), a bound on the variation distance in [0, 2].
    double pinsker_bound = 0.0;
};

/// Throws ValidationError without stored paths and increments, and
/// DegenerateReweighting when the effective sample size drops below 1% of N.
WeightedLaw girsanov_weighted_law(const Ensemble& reference, const ShiftField& xi);

struct KhasminskiiEstimate
{
    double estimate = 0.0;  ///< +inf when any path integral overflows exp
    BootstrapInterval interval;
    MeanEstimate integral;  ///< statistics of int_0^T |f|^2 dt
    double max_integral = 0.0;
    bool overflow = false;
};

KhasminskiiEstimate khasminskii_estimate(const SimConfig& cfg,
                                         const CoefficientSet& coeffs,
                                         const InitialLaw& init,
                                         const SpaceTimeScalar& f,
                                         std::size_t bootstrap_replicates = 200);
}  // namespace kinsde
