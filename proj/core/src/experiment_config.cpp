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

#include "kinsde/experiment_config.hpp"

#include <cmath>
#include <limits>

#include "kinsde/errors.hpp"

namespace kinsde
{
const std::set<std::string>& known_config_keys()
{
    static const std::set<std::string> keys = {
        // simulation
        "T", "h", "N", "seed", "d1", "d2", "m", "scheme", "hist.min", "hist.max", "hist.bins", "store_increments",
        "record_every", "workers",
        // initial laws
        "init.kind", "init.x", "init.y", "init.spread", "init2.kind", "init2.x", "init2.y", "init2.spread",
        // fields
        "drift", "c1", "c2", "c3", "delta", "pert.s", "linear.a11", "linear.a12", "linear.a21", "linear.a22",
        "noise.sigma", "singular", "riesz.alpha", "riesz.atoms", "riesz.floor", "constant.b", "interaction", "kappa",
        "interaction.w",
        // lyapunov-check
        "lyap.theta", "lyap.epsilon", "lyap.K", "lyap.mode", "lyap.r_min", "lyap.r_max", "lyap.radii",
        "lyap.directions", "lyap.shell", "lyap.sample_seed", "lyap.core_fraction", "phi.kind", "phi.c0", "phi.beta",
        // zvonkin
        "zvonkin.eps", "zvonkin.L", "zvonkin.n", "zvonkin.equivalence", "zvonkin.replicates",
        // khasminskii
        "khas.f", "khas.a", "khas.alpha", "khas.floor", "khas.p", "khas.q", "khas.replicates", "khas.centers.min",
        "khas.centers.max", "khas.centers.points", "khas.cells",
        // ergodicity
        "erg.replicates", "erg.fit_from", "erg.use_v",
        // mckean-vlasov
        "mkv.lambda", "mkv.crn", "mkv.max_iter", "mkv.kappas", "mkv.fit_from", "mkv.replicates",
        // h-bound
        "hbound.c0", "hbound.beta", "hbound.v0", "hbound.k", "hbound.lambda", "hbound.t_max", "hbound.points"};
    return keys;
}

std::vector<RieszAtom> parse_atoms(const std::string& text, int d)
{
    std::vector<RieszAtom> atoms;
    std::size_t pos = 0;
    while ((pos = text.find('(', pos)) != std::string::npos)
    {
        const std::size_t end = text.find(')', pos);
        if (end == std::string::npos) throw ValidationError("riesz.atoms: unbalanced parenthesis in '" + text + "'");
        std::vector<double> nums;
        std::string part;
        const std::string inner = text.substr(pos + 1, end - pos - 1) + ",";
        for (char c : inner)
        {
            if (c == ',')
            {
                nums.push_back(parse_double(part));
                part.clear();
            }
            else
                part.push_back(c);
        }
        if (static_cast<int>(nums.size()) != d + 1)
            throw ValidationError("riesz.atoms: each atom needs " + std::to_string(d) + " coordinates and a weight");
        atoms.push_back({std::vector<double>(nums.begin(), nums.end() - 1), nums.back()});
        pos = end + 1;
    }
    if (atoms.empty()) throw ValidationError("riesz.atoms: no atoms in '" + text + "'");
    return atoms;
}

namespace
{
VelocityField scaled_identity(int d2, int m, double s)
{
    return [d2, m, s](double, ConstVec, OutVec out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < std::min(d2, m); ++i) out[static_cast<std::size_t>(i) * m + i] = s;
    };
}

InteractionKernel build_kernel(const KvConfig& kv, int d2)
{
    const std::string kind = kv.str("interaction", "none");
    if (kind == "tanh_y") return tanh_velocity_kernel(d2);
    if (kind == "tanh_x") return tanh_position_kernel(d2);
    if (kind == "tanh_relative") return tanh_relative_kernel(d2);
    if (kind == "constant")
    {
        std::vector<double> w = kv.list("interaction.w", {0.0});
        if (w.size() == 1) w.assign(d2, w[0]);
        if (static_cast<int>(w.size()) != d2) throw ValidationError("interaction.w needs 1 or d2 values");
        return constant_kernel(std::move(w));
    }
    throw ValidationError("unknown interaction '" + kind + "' (none, tanh_y, tanh_x, tanh_relative, constant)");
}
}  // namespace

CoefficientSet build_coefficients(const KvConfig& kv, int d1, int d2, int m)
{
    const std::string drift = kv.str("drift", "zero");
    const double sigma = kv.num("noise.sigma", 1.0);
    CoefficientSet c;
    if (drift == "zero")
    {
        c = make_zero(d1, d2, m);
        c.sigma = scaled_identity(d2, m, sigma);
        c.sigma_bounds = sigma != 0.0 && d2 == m ? SigmaBounds{std::abs(sigma), 1.0 / (sigma * sigma)}
                                                 : SigmaBounds{std::abs(sigma), std::numeric_limits<double>::infinity()};
    }
    else if (drift == "example31" || drift == "linear")
    {
        if (d1 != d2 || d2 != m) throw ValidationError(drift + " drift needs d1 = d2 = m");
        if (drift == "linear")
        {
            c = make_linear(d1, kv.num("linear.a11", 0.0), kv.num("linear.a12", 1.0), kv.num("linear.a21", -1.0),
                            kv.num("linear.a22", -1.0), sigma);
        }
        else
        {
            Example31Params p;
            p.d = d1;
            p.drift.c1 = kv.num("c1", 1.0);
            p.drift.c2 = kv.num("c2", 0.05);
            p.drift.c3 = kv.num("c3", 1.0);
            p.drift.delta = kv.num("delta", 0.0);
            p.drift.perturbation.amplitude = kv.num("pert.s", 0.0);
            p.sigma = sigma;
            c = make_example31(p);
        }
    }
    else
        throw ValidationError("unknown drift '" + drift + "' (zero, example31, linear)");

    const std::string singular = kv.str("singular", "none");
    if (singular == "riesz")
    {
        const RieszDrift r(parse_atoms(kv.str("riesz.atoms", "[(0,1.0)]"), d2), kv.num("riesz.alpha", 0.5),
                           kv.num("riesz.floor", 1e-6));
        c.b = [r](double, ConstVec y, OutVec out) { r.eval(y, out); };
    }
    else if (singular == "constant")
    {
        const double v = kv.num("constant.b", 0.0);
        c.b = [v](double, ConstVec, OutVec out) { std::fill(out.begin(), out.end(), v); };
    }
    else if (singular != "none")
        throw ValidationError("unknown singular drift '" + singular + "' (none, riesz, constant)");

    if (kv.str("interaction", "none") != "none") c = interaction_z2(std::move(c), build_kernel(kv, d2), kv.num("kappa", 0.0));
    return c;
}

InitialLaw build_initial_law(const KvConfig& kv, const std::string& prefix, int d1, int d2)
{
    std::vector<double> x = kv.list(prefix + ".x", {0.0});
    std::vector<double> y = kv.list(prefix + ".y", {0.0});
    if (x.size() == 1) x.assign(d1, x[0]);
    if (y.size() == 1) y.assign(d2, y[0]);
    if (static_cast<int>(x.size()) != d1 || static_cast<int>(y.size()) != d2)
        throw ValidationError(prefix + ".x / " + prefix + ".y need 1 or d1 / d2 values");
    PhaseState s(std::move(x), std::move(y));
    const std::string kind = kv.str(prefix + ".kind", "dirac");
    if (kind == "dirac") return InitialLaw::dirac(std::move(s));
    if (kind == "gaussian")
    {
        const double spread = kv.num(prefix + ".spread", 1.0);
        if (!(spread >= 0.0)) throw ValidationError(prefix + ".spread must be >= 0");
        return InitialLaw::gaussian(std::move(s), spread);
    }
    throw ValidationError("unknown " + prefix + ".kind '" + kind + "' (dirac, gaussian)");
}

Experiment build_experiment(const KvConfig& kv)
{
    Experiment e;
    e.kv = kv;
    e.sim = sim_config_from(kv);
    e.coeffs = build_coefficients(kv, e.sim.d1, e.sim.d2, e.sim.m);
    e.init = build_initial_law(kv, "init", e.sim.d1, e.sim.d2);
    if (kv.has("init2.x") || kv.has("init2.y") || kv.has("init2.kind"))
        e.init2 = build_initial_law(kv, "init2", e.sim.d1, e.sim.d2);
    e.config_hash = hex64(kv.hash());
    return e;
}

Experiment load_experiment(const std::filesystem::path& path)
{
    return build_experiment(KvConfig::load(path, &known_config_keys()));
}
}  // namespace kinsde
