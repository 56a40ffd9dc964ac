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

#include "kinsde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinsde/errors.hpp"
#include "kinsde/rng.hpp"

namespace kinsde
{
namespace
{
double norm2(ConstVec v)
{
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}
}  // namespace

void SinePerturbation::eval(ConstVec x, ConstVec /*y*/, OutVec out) const
{
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = amplitude * std::sin(x[i]);
}

void Example31Drift::z1(ConstVec x, ConstVec y, OutVec out) const
{
    const double damp = c1 * (delta == 0.0 ? 1.0 : std::pow(1.0 + norm2(x), delta));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -damp * x[i] + c2 * y[i];
}

void Example31Drift::z2(ConstVec x, ConstVec y, OutVec out) const
{
    perturbation.eval(x, y, out);
    const double damp = c3 * (delta == 0.0 ? 1.0 : std::pow(1.0 + norm2(y), delta));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= damp * y[i];
}

RieszDrift::RieszDrift(std::vector<RieszAtom> atoms, double alpha, double floor)
    : atoms_(std::move(atoms)), alpha_(alpha), floor_(floor)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("Riesz exponent alpha must lie in (0, 1)");
    if (!(floor > 0.0)) throw ValidationError("Riesz singularity floor must be positive");
    if (atoms_.empty()) throw ValidationError("Riesz drift needs at least one atom");
    const auto d = atoms_.front().location.size();
    for (const auto& a : atoms_)
    {
        if (a.location.size() != d) throw ValidationError("Riesz atoms have mixed dimensions");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw ValidationError("Riesz atom weights must be positive");
        total_weight_ += a.weight;
    }
}

void RieszDrift::eval(ConstVec x, OutVec out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t d = out.size();
    for (const auto& atom : atoms_)
    {
        double r2 = 0.0;
        for (std::size_t i = 0; i < d; ++i)
        {
            const double diff = x[i] - atom.location[i];
            r2 += diff * diff;
        }
        const double r = std::max(std::sqrt(r2), floor_);
        const double scale = atom.weight / std::pow(r, alpha_ + 1.0);
        for (std::size_t i = 0; i < d; ++i) out[i] += scale * (x[i] - atom.location[i]);
    }
}

std::vector<double> RieszDrift::operator()(ConstVec x) const
{
    std::vector<double> out(x.size());
    eval(x, out);
    return out;
}

LyapunovV::LyapunovV(double theta, int d1, int d2) : theta_(theta), d1_(d1), d2_(d2)
{
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw ValidationError("Lyapunov exponent theta must be >= 0");
}

double LyapunovV::value(ConstVec x, ConstVec y) const
{
    if (theta_ == 0.0) return 1.0;
    double s = 1.0;
    for (double v : x) s += v * v;
    for (double v : y) s += v * v;
    return theta_ == 1.0 ? s : std::pow(s, theta_);
}

LyapunovEval LyapunovV::eval(ConstVec x, ConstVec y) const
{
    LyapunovEval e;
    e.grad_x.assign(d1_, 0.0);
    e.grad_y.assign(d2_, 0.0);
    e.hess_xy.assign(static_cast<std::size_t>(d1_) * d2_, 0.0);
    e.hess_yy.assign(static_cast<std::size_t>(d2_) * d2_, 0.0);
    double s = 1.0;
    for (double v : x) s += v * v;
    for (double v : y) s += v * v;
    if (theta_ == 0.0)
    {
        e.value = 1.0;
        return e;
    }
    // V = S^theta, dV = 2 theta S^{theta-1} z, d2V = 2 theta S^{theta-1} I + 4 theta (theta-1) S^{theta-2} z z^T
    e.value = std::pow(s, theta_);
    const double g = 2.0 * theta_ * std::pow(s, theta_ - 1.0);
    const double h = 4.0 * theta_ * (theta_ - 1.0) * std::pow(s, theta_ - 2.0);
    for (int i = 0; i < d1_; ++i) e.grad_x[i] = g * x[i];
    for (int j = 0; j < d2_; ++j) e.grad_y[j] = g * y[j];
    for (int i = 0; i < d1_; ++i)
        for (int j = 0; j < d2_; ++j) e.hess_xy[i * d2_ + j] = h * x[i] * y[j];
    for (int i = 0; i < d2_; ++i)
        for (int j = 0; j < d2_; ++j) e.hess_yy[i * d2_ + j] = h * y[i] * y[j] + (i == j ? g : 0.0);
    return e;
}

LyapunovEval lyapunov_eval(const LyapunovV& v, const PhaseState& s)
{
    return v.eval(s.x(), s.y());
}

double PhiFamily::operator()(double r) const
{
    switch (kind)
    {
        case Kind::linear: return c0 * r;
        case Kind::superlinear: return c0 * (1.0 + std::pow(r, 1.0 + beta));
    }
    return 0.0;
}

double phi_eval(const PhiFamily& phi, double r)
{
    return phi(r);
}

void kernel_average(const InteractionKernel& kernel, ConstVec x, ConstVec y, const EmpiricalLaw& law, OutVec out)
{
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> w(out.size());
    double seen = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i)
    {
        const double wi = law.weight(i);
        if (wi <= 0.0) continue;
        kernel.eval(x, y, law.x_of(i), law.y_of(i), w);
        seen += wi;
        const double frac = wi / seen;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += frac * (w[c] - out[c]);
    }
}

void eval_measure_drift(const PhaseField& base,
                        const MeanFieldTerm& term,
                        double t,
                        ConstVec x,
                        ConstVec y,
                        const EmpiricalLaw* law,
                        OutVec out)
{
    base(t, x, y, out);
    std::vector<double> avg(out.size());
    if (law != nullptr)
        kernel_average(term.kernel, x, y, *law, avg);
    else
    {
        const std::vector<double> zx(x.size(), 0.0), zy(y.size(), 0.0);
        term.kernel.eval(x, y, zx, zy, avg);
    }
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += term.kappa * avg[c];
}

CoefficientSet interaction_z2(CoefficientSet coeffs, InteractionKernel kernel, double kappa)
{
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("interaction strength kappa must be >= 0");
    if (!kernel.eval) throw ValidationError("interaction kernel is empty");
    if (!(kernel.bound <= 1.0)) throw ValidationError("interaction kernel must be declared with sup bound <= 1");

    // Spot check the declared bound on a deterministic sample of argument points.
    const int d1 = coeffs.d1;
    const int d2 = coeffs.d2;
    std::vector<double> x(d1), y(d2), xs(d1), ys(d2), w(d2);
    const StreamAddress addr{0x5eedULL, StreamTag::spot_check, 0};
    std::uint64_t idx = 0;
    const auto draw = [&] { return 20.0 * (uniform_at(addr, idx++) - 0.5); };
    for (int sample = 0; sample < 256; ++sample)
    {
        for (auto* v : {&x, &y, &xs, &ys})
            for (double& c : *v) c = draw();
        kernel.eval(x, y, xs, ys, w);
        for (double c : w)
        {
            if (!(std::abs(c) <= kernel.bound + 1e-12))
            {
                std::ostringstream os;
                os << "interaction kernel '" << kernel.name << "' exceeds its declared bound " << kernel.bound
                   << " (value " << c << ")";
                throw ValidationError(os.str());
            }
        }
    }
    coeffs.interaction = MeanFieldTerm{std::move(kernel), kappa};
    coeffs.classical = false;
    return coeffs;
}

InteractionKernel tanh_velocity_kernel(int /*d2*/)
{
    InteractionKernel k;
    k.name = "tanh_y";
    k.source_only = true;
    k.eval = [](ConstVec, ConstVec, ConstVec, ConstVec ys, OutVec out) {
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::tanh(ys[c]);
    };
    return k;
}

InteractionKernel tanh_position_kernel(int /*d2*/)
{
    InteractionKernel k;
    k.name = "tanh_x";
    k.source_only = true;
    k.eval = [](ConstVec, ConstVec, ConstVec xs, ConstVec, OutVec out) {
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::tanh(xs[c]);
    };
    return k;
}

InteractionKernel constant_kernel(std::vector<double> w)
{
    double sup = 0.0;
    for (double c : w) sup = std::max(sup, std::abs(c));
    if (sup > 1.0) throw ValidationError("constant kernel must satisfy |w|_inf <= 1");
    InteractionKernel k;
    k.name = "constant";
    k.source_only = true;
    k.eval = [w = std::move(w)](ConstVec, ConstVec, ConstVec, ConstVec, OutVec out) {
        std::copy(w.begin(), w.end(), out.begin());
    };
    return k;
}

InteractionKernel tanh_relative_kernel(int /*d2*/)
{
    InteractionKernel k;
    k.name = "tanh_relative";
    k.eval = [](ConstVec, ConstVec y, ConstVec, ConstVec ys, OutVec out) {
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::tanh(ys[c] - y[c]);
    };
    return k;
}

namespace
{
VelocityField identity_sigma(int d, double s)
{
    return [d, s](double, ConstVec, OutVec out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i) * d + i] = s;
    };
}

SigmaBounds identity_bounds(double s)
{
    if (s == 0.0) return {0.0, std::numeric_limits<double>::infinity()};
    return {std::abs(s), 1.0 / (s * s)};
}
}  // namespace

CoefficientSet make_example31(const Example31Params& params)
{
    const int d = params.d;
    CoefficientSet c;
    c.d1 = c.d2 = c.m = d;
    c.name = "example31";
    const Example31Drift drift = params.drift;
    c.z1 = [drift](double, ConstVec x, ConstVec y, OutVec out) { drift.z1(x, y, out); };
    c.z2 = [drift](double, ConstVec x, ConstVec y, OutVec out) { drift.z2(x, y, out); };
    if (params.riesz)
    {
        if (params.riesz->dim() != d) throw ValidationError("Riesz drift dimension differs from d");
        c.b = [r = *params.riesz](double, ConstVec y, OutVec out) { r.eval(y, out); };
    }
    else if (params.constant_b != 0.0)
    {
        c.b = [v = params.constant_b](double, ConstVec, OutVec out) { std::fill(out.begin(), out.end(), v); };
    }
    c.sigma = identity_sigma(d, params.sigma);
    c.sigma_bounds = identity_bounds(params.sigma);
    c.growth = params.drift.delta > 0.0 ? GrowthClass::superlinear : GrowthClass::linear;
    return c;
}

CoefficientSet make_linear(int d, double a11, double a12, double a21, double a22, double sigma)
{
    CoefficientSet c;
    c.d1 = c.d2 = c.m = d;
    c.name = "linear";
    c.z1 = [a11, a12](double, ConstVec x, ConstVec y, OutVec out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a11 * x[i] + a12 * y[i];
    };
    c.z2 = [a21, a22](double, ConstVec x, ConstVec y, OutVec out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a21 * x[i] + a22 * y[i];
    };
    c.sigma = identity_sigma(d, sigma);
    c.sigma_bounds = identity_bounds(sigma);
    return c;
}

CoefficientSet make_zero(int d1, int d2, int m)
{
    CoefficientSet c;
    c.d1 = d1;
    c.d2 = d2;
    c.m = m;
    c.name = "zero";
    c.z1 = [](double, ConstVec, ConstVec, OutVec out) { std::fill(out.begin(), out.end(), 0.0); };
    c.z2 = c.z1;
    c.sigma = [](double, ConstVec, OutVec out) { std::fill(out.begin(), out.end(), 0.0); };
    c.sigma_bounds = {0.0, std::numeric_limits<double>::infinity()};
    return c;
}
}  // namespace kinsde
