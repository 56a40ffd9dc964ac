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

#include <string>
#include <vector>

#include "kinsde/core_model.hpp"

namespace kinsde
{
/// Bounded smooth perturbation Z(x, y)_i = amplitude * sin(x_i) (d1 == d2).
/// Bounded, hence o(|(x, y)|).
struct SinePerturbation
{
    double amplitude = 0.0;

    void eval(ConstVec x, ConstVec y, OutVec out) const;
};

/// z1 = -c1 (1+|x|)^delta x + c2 y,  z2 = Z(x, y) - c3 (1+|y|)^delta y.
struct Example31Drift
{
    double c1 = 1.0;
    double c2 = 0.0;
    double c3 = 1.0;
    double delta = 0.0;
    SinePerturbation perturbation;

    void z1(ConstVec x, ConstVec y, OutVec out) const;
    void z2(ConstVec x, ConstVec y, OutVec out) const;
};

struct RieszAtom
{
    std::vector<double> location;
    double weight = 1.0;
};

/// b(x) = sum_j w_j (x - y_j) / max(|x - y_j|, floor)^{alpha + 1}: the Riesz-type
/// drift of a finite atomic measure with its singularity cut off at `floor`.
class RieszDrift
{
public:
    RieszDrift(std::vector<RieszAtom> atoms, double alpha, double floor = 1e-6);

    const std::vector<RieszAtom>& atoms() const { return atoms_; }
    double alpha() const { return alpha_; }
    double floor() const { return floor_; }
    double total_weight() const { return total_weight_; }
    int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_.front().location.size()); }

    void eval(ConstVec x, OutVec out) const;
    std::vector<double> operator()(ConstVec x) const;

private:
    std::vector<RieszAtom> atoms_;
    double alpha_;
    double floor_;
    double total_weight_ = 0.0;
};

/// Value and derivative blocks of V at a phase point. Matrices are row-major:
/// hess_xy is d1 x d2, hess_yy is d2 x d2.
struct LyapunovEval
{
    double value = 0.0;
    std::vector<double> grad_x;
    std::vector<double> grad_y;
    std::vector<double> hess_xy;
    std::vector<double> hess_yy;
};

/// V(x, y) = (1 + |x|^2 + |y|^2)^theta. theta == 0 is the constant V == 1,
/// only used to reduce the V-distance to total variation.
class LyapunovV
{
public:
    LyapunovV(double theta, int d1, int d2);
    static LyapunovV unit(int d1, int d2) { return LyapunovV(0.0, d1, d2); }

    double theta() const { return theta_; }
    int d1() const { return d1_; }
    int d2() const { return d2_; }
    bool is_unit() const { return theta_ == 0.0; }

    double value(ConstVec x, ConstVec y) const;
    LyapunovEval eval(ConstVec x, ConstVec y) const;

private:
    double theta_;
    int d1_;
    int d2_;
};

LyapunovEval lyapunov_eval(const LyapunovV& v, const PhaseState& s);

/// Rate function of the drift condition.
struct PhiFamily
{
    enum class Kind
    {
        linear,       ///< c0 r
        superlinear,  ///< c0 (1 + r^{1 + beta})
    };

    Kind kind = Kind::linear;
    double c0 = 1.0;
    double beta = 0.0;

    static PhiFamily linear(double c0) { return {Kind::linear, c0, 0.0}; }
    static PhiFamily superlinear(double c0, double beta) { return {Kind::superlinear, c0, beta}; }

    double operator()(double r) const;
};

double phi_eval(const PhiFamily& phi, double r);

// ---------------------------------------------------------------------------
// Measure-dependent drift
// ---------------------------------------------------------------------------

/// Law average of W(x, y, ., .) written to out (d2 entries). Uses a running
/// weighted mean so a constant kernel averages to exactly that constant.
void kernel_average(const InteractionKernel& kernel, ConstVec x, ConstVec y, const EmpiricalLaw& law, OutVec out);

/// Z2(x, y, mu) = base(x, y) + kappa * int W(x, y, .) dmu. `law == nullptr`
/// stands for the point mass at the origin.
void eval_measure_drift(const PhaseField& base,
                        const MeanFieldTerm& term,
                        double t,
                        ConstVec x,
                        ConstVec y,
                        const EmpiricalLaw* law,
                        OutVec out);

/// Attaches kappa * int W dmu to the base z2 of `coeffs`. The kernel bound is
/// spot-checked on sampled points; a violation throws ValidationError.
CoefficientSet interaction_z2(CoefficientSet coeffs, InteractionKernel kernel, double kappa);

/// W = (tanh(y'_1), ..., tanh(y'_{d2})) (source-only).
InteractionKernel tanh_velocity_kernel(int d2);
/// W = tanh(x'_i) componentwise, requires d1 == d2 (source-only).
InteractionKernel tanh_position_kernel(int d2);
/// W == w (source-only), |w|_inf <= 1.
InteractionKernel constant_kernel(std::vector<double> w);
/// W = tanh(y' - y) componentwise, depends on both arguments.
InteractionKernel tanh_relative_kernel(int d2);

// ---------------------------------------------------------------------------
// Shipped coefficient families
// ---------------------------------------------------------------------------

struct Example31Params
{
    int d = 1;
    Example31Drift drift;
    double sigma = 1.0;
    std::optional<RieszDrift> riesz;  ///< singular drift b
    double constant_b = 0.0;          ///< used when riesz is empty
};

/// The example31 system with sigma = s * I.
CoefficientSet make_example31(const Example31Params& params);

/// Z1 = a11 x + a12 y, Z2 = a21 x + a22 y (scalar multiples of identity), sigma = s * I.
CoefficientSet make_linear(int d, double a11, double a12, double a21, double a22, double sigma);

/// All drifts and the noise identically zero.
CoefficientSet make_zero(int d1, int d2, int m);
}  // namespace kinsde
