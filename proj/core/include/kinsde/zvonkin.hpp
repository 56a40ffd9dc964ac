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
#include <string>
#include <vector>

#include "kinsde/core_model.hpp"
#include "kinsde/ergodicity.hpp"
#include "kinsde/integrators.hpp"

namespace kinsde
{
using ScalarField = std::function<double(double)>;

/// Grid solution of (1/2) sigma^2 u'' + b u' - lambda u = -b on [-L, L] with
/// u(-L) = u(L) = 0, and the map Theta(y) = y + u(y).
class ZvonkinSolution
{
public:
    ZvonkinSolution() = default;
    ZvonkinSolution(std::vector<double> y, std::vector<double> u, double lambda, double residual);

    const std::vector<double>& grid() const { return y_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& du() const { return du_; }
    const std::vector<double>& d2u() const { return d2u_; }
    const std::vector<double>& theta_table() const { return theta_; }
    double lambda() const { return lambda_; }
    double residual() const { return residual_; }
    double sup_u() const { return sup_u_; }
    double sup_du() const { return sup_du_; }
    /// ||u||_inf + ||u'||_inf
    double bound() const { return sup_u_ + sup_du_; }
    double half_width() const { return y_.back(); }
    bool invertible() const;

    /// Linear interpolation of u and u' at y in [-L, L]; NaN outside.
    double u_at(double y) const;
    double du_at(double y) const;
    double theta(double y) const;
    /// NaN when ty lies outside Theta([-L, L]).
    double theta_inverse(double ty) const;
    /// As theta_inverse but throws NumericError "out of transform domain".
    double theta_inverse_checked(double ty) const;
    /// max_i |Theta^{-1}(Theta(y_i)) - y_i|
    double roundtrip_error() const;

private:
    std::size_t bracket(const std::vector<double>& nodes, double v) const;

    std::vector<double> y_;
    std::vector<double> u_;
    std::vector<double> du_;
    std::vector<double> d2u_;
    std::vector<double> theta_;
    double lambda_ = 0.0;
    double residual_ = 0.0;
    double sup_u_ = 0.0;
    double sup_du_ = 0.0;
};

/// n grid points including both ends. Throws NumericError with
/// "degenerate discretization" or "not converged".
ZvonkinSolution solve_resolvent_1d(const ScalarField& b, const ScalarField& sigma, double lambda, double L, std::size_t n);

/// Doubles lambda from 1 until bound() < eps_target; throws NumericError
/// "smallness not achieved" past 2^40.
ZvonkinSolution lambda_sweep(const ScalarField& b,
                             const ScalarField& sigma,
                             double eps_target,
                             double L,
                             std::size_t n);

/// Scalar views of b(0, .) and sigma(0, .) for a set with d2 = m = 1.
ScalarField scalar_drift(const CoefficientSet& coeffs);
ScalarField scalar_sigma(const CoefficientSet& coeffs);

/// Coefficients of (Theta(Y)) with the singular drift absorbed:
/// Z1(x, Theta^{-1} y~), (1 + u') Z2 + lambda u, and (1 + u') sigma, all
/// evaluated at Theta^{-1}(y~). Outside the transform domain the fields are NaN.
CoefficientSet transform_coefficients(const ZvonkinSolution& sol, const CoefficientSet& coeffs);

struct EquivalenceReport
{
    double tv = 0.0;
    double noise_floor = 0.0;
    double lambda = 0.0;
    double bound = 0.0;
    std::size_t out_of_domain = 0;
    std::size_t dead_direct = 0;
    bool equivalent = false;
};

struct EquivalenceOptions
{
    double eps_target = 0.5;
    double L = 10.0;
    std::size_t grid_points = 4001;
    std::size_t bootstrap_replicates = 100;
};

/// Simulates the original system and the transformed one with common random
/// numbers, maps the latter back through Theta^{-1}, and compares terminal laws.
EquivalenceReport equivalence_experiment(const CoefficientSet& coeffs,
                                         const SimConfig& cfg,
                                         const InitialLaw& init,
                                         const EquivalenceOptions& opts = {});
}  // namespace kinsde
