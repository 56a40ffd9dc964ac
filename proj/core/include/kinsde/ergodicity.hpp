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
#include <span>
#include <string>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/integrators.hpp"

namespace kinsde
{
/// Binned proxy of a law on phase space (x axes first, then y axes).
struct HistogramLaw
{
    HistogramSpec spec;
    std::vector<double> mass;  ///< row-major over axes, last axis fastest
    double out_mass = 0.0;

    double total_mass() const;
    std::vector<double> bin_center(std::size_t cell) const;
};

/// Cell index of a point, or -1 when outside the box or non-finite.
long long histogram_cell(const HistogramSpec& spec, ConstVec point);

/// Normalized by total weight; zero-weight particles are ignored.
HistogramLaw histogram_of(const EmpiricalLaw& law, const HistogramSpec& spec, int workers = 0);

/// Sum of |a_i - b_i| over bins plus |a_out - b_out|; range [0, 2].
double empirical_var_distance(const HistogramLaw& a, const HistogramLaw& b);

/// V(bin center)-weighted variant. The out-of-box mass is weighted by V at the
/// box corner farthest from the origin.
double empirical_v_distance(const HistogramLaw& a, const HistogramLaw& b, const LyapunovV& V);

/// 95th percentile (by default) of the distance between two independent
/// resamples of `law`, each of the law's size.
double bootstrap_noise_floor(const EmpiricalLaw& law,
                             const HistogramSpec& spec,
                             std::size_t replicates,
                             std::uint64_t seed,
                             const LyapunovV* V = nullptr,
                             double level = 0.95,
                             int workers = 0);

/// Distance of each recorded slice of `ens` to `reference`.
std::vector<double> distance_series(const Ensemble& ens,
                                    const HistogramLaw& reference,
                                    const LyapunovV* V = nullptr,
                                    int workers = 0);

enum class DecayVerdict
{
    decay_confirmed,
    no_decay,
    insufficient_signal,
};

std::string to_string(DecayVerdict v);

struct DecayFit
{
    std::vector<double> times;
    std::vector<double> distances;
    double noise_floor = 0.0;
    std::size_t used_points = 0;
    double rate = 0.0;       ///< lambda-hat in d ~ c exp(-lambda t)
    double prefactor = 0.0;  ///< c-hat
    double r_squared = 0.0;
    double rate_std_error = 0.0;
    DecayVerdict verdict = DecayVerdict::insufficient_signal;
};

/// Least squares on (t, log d) over points strictly above `noise_floor`.
/// Fewer than 4 such points yields the insufficient_signal verdict.
DecayFit fit_exponential_decay(std::span<const double> times,
                               std::span<const double> distances,
                               double noise_floor = 0.0);

/// H(r) = int_0^r ds / Phi(s). Throws ValidationError for linear Phi.
double h_integral(const PhiFamily& phi, double r);
/// H(infinity).
double h_limit(const PhiFamily& phi);
/// Inverse of H with H^{-1}(r) = 0 for r <= 0.
double h_inverse(const PhiFamily& phi, double r);

/// k (1 + H^{-1}(H(V0) - t / k)) exp(-lambda t) at each time.
std::vector<double> h_envelope(const PhiFamily& phi, double v0, double k, double lambda, std::span<const double> times);

/// Smallest k for which the envelope dominates every distance (bisection).
double fit_envelope_k(const PhiFamily& phi,
                      double v0,
                      double lambda,
                      std::span<const double> times,
                      std::span<const double> distances);

struct MomentBoundPoint
{
    double v0 = 0.0;  ///< mean V(X_0, Y_0) over the run
    MeanEstimate ratio;  ///< E[sup_t V(X_t, Y_t) / V(X_0, Y_0)] over alive particles
    std::size_t dead = 0;
};

struct MomentBoundReport
{
    std::vector<MomentBoundPoint> points;
    double v0_spread = 0.0;   ///< max v0 / min v0
    double ratio_band = 0.0;  ///< max ratio / min ratio
    std::size_t dead = 0;
    bool bounded = false;
};

/// One ensemble per initial condition. The sup is taken over recorded slices.
/// Throws ValidationError unless the initial V values span at least 10x.
MomentBoundReport moment_bound_check(std::span<const Ensemble> runs, const LyapunovV& V);
}  // namespace kinsde
