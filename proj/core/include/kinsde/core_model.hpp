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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kinsde
{
using ConstVec = std::span<const double>;
using OutVec = std::span<double>;

/// A point (x, y) of phase space R^{d1} x R^{d2}. x carries no noise, y does.
class PhaseState
{
public:
    PhaseState() = default;
    /// Throws ValidationError on any non-finite coordinate.
    PhaseState(std::vector<double> x, std::vector<double> y);

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    int d1() const { return static_cast<int>(x_.size()); }
    int d2() const { return static_cast<int>(y_.size()); }

    friend bool operator==(const PhaseState&, const PhaseState&) = default;

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

/// Integrability exponents (p, q) with p, q > 2 and d2/p + 2/q < 1.
class AdmissiblePair
{
public:
    /// Throws ValidationError unless the pair is admissible for this d2.
    AdmissiblePair(double p, double q, int d2);

    static bool admissible(double p, double q, int d2);

    double p() const { return p_; }
    double q() const { return q_; }

private:
    double p_;
    double q_;
};

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

/// Regular drift block evaluated at (t, x, y).
using PhaseField = std::function<void(double t, ConstVec x, ConstVec y, OutVec out)>;
/// Field depending on the noise-carrying component only: the singular drift b
/// (out has d2 entries) and the diffusion sigma (out is d2 x m row-major).
using VelocityField = std::function<void(double t, ConstVec y, OutVec out)>;

/// Bounded interaction W(x, y, x', y') with values in R^{d2}; |W|_inf <= bound.
struct InteractionKernel
{
    using Fn = std::function<void(ConstVec x, ConstVec y, ConstVec xs, ConstVec ys, OutVec out)>;

    Fn eval;
    /// W does not depend on (x, y); its law average is then one vector per law.
    bool source_only = false;
    double bound = 1.0;
    std::string name;
};

struct MeanFieldTerm
{
    InteractionKernel kernel;
    double kappa = 0.0;
};

enum class GrowthClass
{
    sublinear,
    linear,
    superlinear,
};

/// Declared ||sigma||_inf and ||(sigma sigma^*)^{-1}||_inf.
struct SigmaBounds
{
    double sigma_sup = 1.0;
    double inverse_gram_sup = 1.0;
};

/// Fields of the kinetic system
///   dX = Z1(t, X, Y) dt
///   dY = (Z2(t, X, Y, law) + b(t, Y)) dt + sigma(t, Y) dW.
/// The measure-dependent part of Z2 is `interaction`; when it is absent the
/// set is classical and `classical` is true.
struct CoefficientSet
{
    int d1 = 1;
    int d2 = 1;
    int m = 1;
    PhaseField z1;
    PhaseField z2;
    std::optional<MeanFieldTerm> interaction;
    VelocityField b;  ///< empty means b == 0
    VelocityField sigma;
    SigmaBounds sigma_bounds;
    GrowthClass growth = GrowthClass::linear;
    bool classical = true;
    std::string name;
};

// ---------------------------------------------------------------------------
// Laws and configuration
// ---------------------------------------------------------------------------

/// Product grid on a box of R^{d1+d2}; axes ordered x then y.
struct HistogramSpec
{
    std::vector<double> min;
    std::vector<double> max;
    std::vector<int> bins;

    int dims() const { return static_cast<int>(bins.size()); }
    std::size_t cell_count() const;
    friend bool operator==(const HistogramSpec&, const HistogramSpec&) = default;

    /// Same box and bin count on each of `dims` axes.
    static HistogramSpec uniform(int dims, double lo, double hi, int bins_per_axis);
};

enum class Scheme
{
    euler,
    tamed,
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SimConfig
{
    double T = 1.0;
    double h = 1e-3;
    std::size_t N = 1000;
    std::uint64_t seed = 1;
    int d1 = 1;
    int d2 = 1;
    int m = 1;
    Scheme scheme = Scheme::euler;
    HistogramSpec hist = HistogramSpec::uniform(2, -5.0, 5.0, 20);
    bool store_increments = false;
    /// Record the ensemble every this many steps (0: initial and final only).
    std::size_t record_every = 0;
    /// Worker threads for ensemble loops (0: OpenMP default). Never changes results.
    int workers = 0;

    std::size_t steps() const;
};

/// Weighted particle cloud. Empty `weights` means unit weights.
struct EmpiricalLaw
{
    int d1 = 1;
    int d2 = 1;
    std::vector<double> x;  ///< size() * d1, particle-major
    std::vector<double> y;  ///< size() * d2
    std::vector<double> weights;

    std::size_t size() const { return d2 > 0 ? y.size() / static_cast<std::size_t>(d2) : 0; }
    ConstVec x_of(std::size_t i) const { return {x.data() + i * d1, static_cast<std::size_t>(d1)}; }
    ConstVec y_of(std::size_t i) const { return {y.data() + i * d2, static_cast<std::size_t>(d2)}; }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
    double total_weight() const;

    static EmpiricalLaw point_mass(const PhaseState& s);
};

/// Time-indexed sequence of laws sharing one grid.
struct MeasureFlow
{
    std::vector<double> times;
    std::vector<EmpiricalLaw> slices;

    std::size_t nearest_slice(double t) const;
    /// Same law at every time of the grid.
    static MeasureFlow constant(const EmpiricalLaw& law, std::vector<double> times);
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity
{
    error,
    warning,
};

struct Violation
{
    Severity severity;
    std::string what;
};

struct ValidationReport
{
    std::vector<Violation> items;

    bool ok() const;
    bool has(const std::string& fragment) const;
    std::string summary() const;
};

/// Structural checks on a configuration and coefficient set. Never throws.
/// `pairs` are (p, q) exponents whose admissibility should be checked.
ValidationReport validate_config(const SimConfig& cfg,
                                 const CoefficientSet& coeffs,
                                 std::span<const std::pair<double, double>> pairs = {});

// ---------------------------------------------------------------------------
// Localized integrability norm
// ---------------------------------------------------------------------------

using SpaceTimeScalar = std::function<double(double t, ConstVec y)>;

struct NormGrid
{
    double horizon = 1.0;
    int time_nodes = 16;     ///< midpoint nodes on [0, horizon]
    int cells_per_axis = 200;  ///< midpoint cells on the cube [-1, 1]^{d2}
};

/// Centers for the outer supremum: a lattice over a box plus declared atoms.
struct CenterSet
{
    std::vector<double> min;
    std::vector<double> max;
    int points_per_axis = 5;
    std::vector<std::vector<double>> atoms;

    std::vector<std::vector<double>> enumerate() const;
};

struct LocalizedNorm
{
    double value = 0.0;
    std::vector<double> argmax_center;
};

/// int_{B_1(center)} |f(t, y)|^p dy by the midpoint rule restricted to the ball.
double ball_lp_integral(const SpaceTimeScalar& f, double t, ConstVec center, double p, int cells_per_axis);

/// sup over sampled centers of (int_0^T ||1_{B_1(c)} f_t||_{L^p}^q dt)^{1/q}.
/// Throws NumericError("norm diverged at ...") on a non-finite quadrature.
LocalizedNorm localized_lpq_norm(const SpaceTimeScalar& f,
                                 const AdmissiblePair& pair,
                                 const NormGrid& grid,
                                 const CenterSet& centers,
                                 int workers = 0);
}  // namespace kinsde
