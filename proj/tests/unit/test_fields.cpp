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

#include "kinsde/errors.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/rng.hpp"

using namespace kinsde;

TEST(RieszDrift, UnitDistance)
{
    const RieszDrift b({{{0.0}, 1.0}}, 0.5);
    EXPECT_DOUBLE_EQ(b(std::vector<double>{1.0})[0], 1.0);
}

TEST(RieszDrift, SymmetricAtomsCancel)
{
    for (double alpha : {0.1, 0.5, 0.9})
    {
        const RieszDrift b({{{1.0}, 1.0}, {{-1.0}, 1.0}}, alpha);
        EXPECT_EQ(b(std::vector<double>{0.0})[0], 0.0);
    }
}

TEST(RieszDrift, DistanceTwo)
{
    const RieszDrift b({{{0.0}, 1.0}}, 0.5);
    EXPECT_NEAR(b(std::vector<double>{2.0})[0], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(RieszDrift, FloorCapsTheSingularity)
{
    const RieszDrift b({{{0.0}, 1.0}}, 0.5, 1e-4);
    // |b(x)| = |x| / floor^{1.5} inside the floor.
    EXPECT_NEAR(b(std::vector<double>{1e-5})[0], 1e-5 / std::pow(1e-4, 1.5), 1e-9);
    EXPECT_EQ(b(std::vector<double>{0.0})[0], 0.0);
}

TEST(RieszDrift, RejectsBadParameters)
{
    EXPECT_THROW(RieszDrift({{{0.0}, 1.0}}, 1.0), ValidationError);
    EXPECT_THROW(RieszDrift({{{0.0}, 1.0}}, 0.5, 0.0), ValidationError);
    EXPECT_THROW(RieszDrift({}, 0.5), ValidationError);
    EXPECT_THROW(RieszDrift({{{0.0}, -1.0}}, 0.5), ValidationError);
}

TEST(LyapunovV, Origin)
{
    const LyapunovEval e = LyapunovV(1.0, 1, 2).eval(std::vector<double>{0.0}, std::vector<double>{0.0, 0.0});
    EXPECT_EQ(e.value, 1.0);
    for (double g : e.grad_x) EXPECT_EQ(g, 0.0);
    for (double g : e.grad_y) EXPECT_EQ(g, 0.0);
    EXPECT_EQ(e.hess_yy, (std::vector<double>{2.0, 0.0, 0.0, 2.0}));
}

TEST(LyapunovV, LatticePoint)
{
    const LyapunovEval e = LyapunovV(1.0, 1, 1).eval(std::vector<double>{1.0}, std::vector<double>{0.0});
    EXPECT_EQ(e.value, 2.0);
    EXPECT_EQ(e.grad_x[0], 2.0);
    EXPECT_EQ(e.hess_xy[0], 0.0);
}

TEST(LyapunovV, DerivativesMatchFiniteDifferences)
{
    const int d1 = 2, d2 = 2;
    const LyapunovV V(2.0, d1, d2);
    std::vector<double> x(d1), y(d2);
    for (int i = 0; i < d1; ++i) x[i] = normal_at({5, StreamTag::sampling, 0}, i);
    for (int i = 0; i < d2; ++i) y[i] = normal_at({5, StreamTag::sampling, 1}, i);
    const LyapunovEval e = V.eval(x, y);
    constexpr double h = 1e-5;
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int i = 0; i < d1; ++i)
    {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        EXPECT_LT(rel((V.value(xp, y) - V.value(xm, y)) / (2 * h), e.grad_x[i]), 1e-6);
        for (int j = 0; j < d2; ++j)
        {
            const double fd = (V.eval(xp, y).grad_y[j] - V.eval(xm, y).grad_y[j]) / (2 * h);
            EXPECT_LT(rel(fd, e.hess_xy[i * d2 + j]), 1e-6);
        }
    }
    for (int i = 0; i < d2; ++i)
    {
        auto yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        EXPECT_LT(rel((V.value(x, yp) - V.value(x, ym)) / (2 * h), e.grad_y[i]), 1e-6);
        for (int j = 0; j < d2; ++j)
        {
            const double fd = (V.eval(x, yp).grad_y[j] - V.eval(x, ym).grad_y[j]) / (2 * h);
            EXPECT_LT(rel(fd, e.hess_yy[i * d2 + j]), 1e-6);
        }
    }
}

TEST(PhiFamily, Values)
{
    EXPECT_EQ(PhiFamily::linear(2.0)(3.0), 6.0);
    EXPECT_EQ(PhiFamily::superlinear(1.0, 1.0)(0.0), 1.0);
    EXPECT_EQ(PhiFamily::superlinear(1.0, 1.0)(2.0), 5.0);
}

namespace
{
CoefficientSet base()
{
    Example31Params p;
    p.drift.c2 = 0.05;
    return make_example31(p);
}

std::vector<double> z2_of(const CoefficientSet& c, const EmpiricalLaw* law, double x, double y)
{
    std::vector<double> out(1);
    eval_measure_drift(c.z2, *c.interaction, 0.0, std::vector<double>{x}, std::vector<double>{y}, law, out);
    return out;
}
}  // namespace

TEST(MeasureDrift, ZeroCouplingIsBase)
{
    const CoefficientSet b = base();
    const CoefficientSet c = interaction_z2(b, tanh_relative_kernel(1), 0.0);
    EmpiricalLaw law = EmpiricalLaw::point_mass(PhaseState({0.3}, {-2.0}));
    for (double x : {-1.0, 0.0, 2.0})
        for (double y : {-3.0, 0.5})
        {
            std::vector<double> ref(1);
            b.z2(0.0, std::vector<double>{x}, std::vector<double>{y}, ref);
            EXPECT_EQ(z2_of(c, &law, x, y)[0], ref[0]);
        }
}

TEST(MeasureDrift, ConstantKernelShiftsByKappaW)
{
    const CoefficientSet b = base();
    const CoefficientSet c = interaction_z2(b, constant_kernel({0.5}), 0.3);
    EmpiricalLaw law;
    law.x = {1.0, -2.0, 4.0};
    law.y = {0.0, 3.0, -1.0};
    law.weights = {0.2, 0.3, 0.5};
    std::vector<double> ref(1);
    b.z2(0.0, std::vector<double>{1.0}, std::vector<double>{2.0}, ref);
    EXPECT_DOUBLE_EQ(z2_of(c, &law, 1.0, 2.0)[0], ref[0] + 0.15);
}

TEST(MeasureDrift, OddKernelOnSymmetricLaw)
{
    const CoefficientSet b = base();
    const CoefficientSet c = interaction_z2(b, tanh_position_kernel(1), 0.7);
    EmpiricalLaw law;
    law.x = {1.3, -1.3};
    law.y = {0.4, 0.9};
    std::vector<double> ref(1);
    b.z2(0.0, std::vector<double>{0.2}, std::vector<double>{0.1}, ref);
    EXPECT_DOUBLE_EQ(z2_of(c, &law, 0.2, 0.1)[0], ref[0]);
}

TEST(MeasureDrift, UnboundedKernelRejected)
{
    InteractionKernel k;
    k.eval = [](ConstVec, ConstVec, ConstVec xs, ConstVec, OutVec out) { out[0] = xs[0]; };
    k.bound = 1.0;
    EXPECT_THROW(interaction_z2(base(), k, 0.1), ValidationError);
}

TEST(Shipped, Example31Drift)
{
    Example31Params p;
    p.drift = {1.0, 0.05, 1.0, 1.0, {}};
    const CoefficientSet c = make_example31(p);
    std::vector<double> z1(1), z2(1);
    c.z1(0.0, std::vector<double>{2.0}, std::vector<double>{1.0}, z1);
    c.z2(0.0, std::vector<double>{2.0}, std::vector<double>{-1.0}, z2);
    EXPECT_DOUBLE_EQ(z1[0], -3.0 * 2.0 + 0.05);
    EXPECT_DOUBLE_EQ(z2[0], 2.0);
    EXPECT_EQ(c.growth, GrowthClass::superlinear);
}
