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

// Acceptance runner. Drives the shipped configs through the CLI command
// layer plus a few in-process oracles, and prints one PASS/FAIL line per
// criterion. Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "kinsde/ergodicity.hpp"
#include "kinsde/errors.hpp"
#include "kinsde/experiment_config.hpp"
#include "kinsde/fields.hpp"
#include "kinsde/integrators.hpp"
#include "kinsde/io.hpp"
#include "kinsde/lyapunov_verifier.hpp"
#include "kinsde/mckean_vlasov.hpp"
#include "kinsde/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kinsde;

namespace
{
const fs::path kConfigs = KINSDE_CONFIG_DIR;

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) pass = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << (ok ? "" : "!") << what;
    }
};

struct CliRun
{
    std::string command;
    fs::path dir;
};

class Runner
{
public:
    Runner(fs::path out, int workers) : out_(std::move(out)), workers_(workers) {}

    /// Runs a subcommand on a config (optionally modified) into out/<label>.
    fs::path cli(const std::string& command,
                 const std::string& config,
                 const std::string& label,
                 const std::function<void(KvConfig&)>& edit = {})
    {
        const fs::path dir = out_ / label;
        fs::remove_all(dir);
        fs::create_directories(dir);
        fs::path cfg = kConfigs / config;
        if (edit)
        {
            KvConfig kv = KvConfig::load(cfg);
            edit(kv);
            cfg = dir / (label + ".cfg");
            std::ofstream(cfg) << kv.canonical();
        }
        cli::Options o;
        o.config = cfg;
        o.out_dir = dir;
        o.workers = workers_;
        const int rc = dispatch(command, o);
        if (rc != 0) throw NumericError(command + " on " + config + " exited with " + std::to_string(rc));
        runs_.push_back({command, dir});
        return dir;
    }

    const std::vector<CliRun>& runs() const { return runs_; }
    const fs::path& out() const { return out_; }

private:
    static int dispatch(const std::string& command, const cli::Options& o)
    {
        for (const auto& c : cli::command_table())
            if (command == c.name) return c.fn(o);
        throw ValidationError("unknown command " + command);
    }

    fs::path out_;
    int workers_;
    std::vector<CliRun> runs_;
};

json read_json(const fs::path& p)
{
    std::ifstream f(p);
    if (!f) throw ValidationError("cannot read " + p.string());
    return json::parse(f);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

bool close_rel(double a, double b, double tol)
{
    if (a == b) return true;
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------------------

Outcome langevin_stationarity(Runner& r)
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = r.cli("simulate", "langevin.cfg", "c1_langevin");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const EmpiricalLaw law = read_snapshot(dir / "simulate_final");

    // A Sigma + Sigma A^T + Q = 0 via the Kronecker form.
    Eigen::Matrix2d A;
    A << 0.0, 1.0, -1.0, -1.0;
    const double sigma = std::sqrt(2.0);
    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(1, 1) = sigma * sigma;
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    Eigen::Matrix4d K;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) K.block<2, 2>(2 * i, 2 * j) = I(i, j) * A + A(i, j) * I;
    const Eigen::Vector4d vecQ = Eigen::Map<const Eigen::Vector4d>(Q.data());
    const Eigen::Vector4d vecS = K.fullPivLu().solve(-vecQ);
    const Eigen::Matrix2d Sigma = Eigen::Map<const Eigen::Matrix2d>(vecS.data());

    const std::size_t n = law.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        xs[i] = law.x_of(i)[0];
        ys[i] = law.y_of(i)[0];
    }
    const double mx = mean_estimate(xs).mean, my = mean_estimate(ys).mean;
    const std::vector<double>* cols[2] = {&xs, &ys};
    const double means[2] = {mx, my};
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j)
        {
            std::vector<double> prod(n);
            for (std::size_t k = 0; k < n; ++k) prod[k] = ((*cols[i])[k] - means[i]) * ((*cols[j])[k] - means[j]);
            const MeanEstimate e = mean_estimate(prod);
            const double z = std::abs(e.mean - Sigma(i, j)) / e.std_error;
            o.check(z < 3.0, "cov(" + std::to_string(i) + "," + std::to_string(j) + ")=" + fmt(e.mean) + " vs " +
                                 fmt(Sigma(i, j)) + " (" + fmt(z) + " SE)");
        }
    o.check((Sigma - I).norm() < 1e-12, "Sigma = I");
    o.check(secs < 120.0, "runtime " + fmt(secs) + " s");
    return o;
}

Outcome ergodicity_decay(Runner& r)
{
    Outcome o;
    const json fit = read_json(r.cli("ergodicity", "example31_ergodicity.cfg", "c2_decay") / "ergodicity_fit.json")["fit"];
    const double rate = fit["rate"], r2 = fit["r_squared"];
    o.check(rate > 0.0, "rate " + fmt(rate));
    o.check(r2 > 0.9, "R^2 " + fmt(r2));
    o.check(fit["verdict"] == "decay_confirmed", "verdict " + fit["verdict"].get<std::string>());

    const fs::path null_dir = r.cli("ergodicity", "example31_ergodicity.cfg", "c2_null", [](KvConfig& kv) {
        kv.set("init2.x", kv.str("init.x", "0"));
        kv.set("init2.y", kv.str("init.y", "0"));
    });
    const CsvTable t = read_csv(null_dir / "ergodicity_distance.csv");
    double worst = 0.0;
    for (const auto& row : t.rows) worst = std::max(worst, row[1] / row[2]);
    o.check(worst < 2.0, "null max distance/floor " + fmt(worst));
    const json nfit = read_json(null_dir / "ergodicity_fit.json")["fit"];
    o.check(nfit["verdict"] != "decay_confirmed", "null verdict " + nfit["verdict"].get<std::string>());
    return o;
}

Outcome lyapunov_verifier(Runner& r)
{
    Outcome o;
    const json pos = read_json(r.cli("lyapunov-check", "example31_lyapunov.cfg", "c3_search") / "lyapunov_report.json");
    o.check(pos["verdict"] == "holds", "verdict " + pos["verdict"].get<std::string>());
    const double c0 = pos.value("c0", 0.0), K = pos.value("K", 0.0);
    if (pos.contains("min_margin"))
        o.check(pos["min_margin"].get<double>() >= 0.0, "min margin " + fmt(pos["min_margin"]));
    o.check(pos["domain"].get<std::string>().find("50") != std::string::npos, "domain " + pos["domain"].get<std::string>());

    const json neg = read_json(r.cli("lyapunov-check", "example31_lyapunov_c3zero.cfg", "c3_c3zero") / "lyapunov_report.json");
    o.check(neg["verdict"] == "fails", "c3=0 verdict " + neg["verdict"].get<std::string>());

    const SampleSpec defaults;
    const json dbl = read_json(r.cli("lyapunov-check", "example31_lyapunov.cfg", "c3_doubled", [&](KvConfig& kv) {
                                   kv.set("lyap.radii", std::to_string(2 * defaults.radii));
                                   kv.set("lyap.directions", std::to_string(2 * defaults.directions));
                                   kv.set("lyap.shell", std::to_string(2 * defaults.shell_points));
                               }) /
                               "lyapunov_report.json");
    o.check(dbl["verdict"] == "holds", "doubled verdict " + dbl["verdict"].get<std::string>());
    const double c0d = dbl.value("c0", 0.0), Kd = dbl.value("K", 0.0);
    const double dc = std::abs(c0d - c0) / c0, dK = std::abs(Kd - K) / K;
    o.check(dc <= 0.05, "c0 " + fmt(c0) + " -> " + fmt(c0d));
    o.check(dK <= 0.05, "K " + fmt(K) + " -> " + fmt(Kd));
    return o;
}

Outcome zvonkin_pipeline(Runner& r)
{
    Outcome o;
    const json c = read_json(r.cli("zvonkin", "zvonkin_constant.cfg", "c4_constant") / "zvonkin_report.json");
    const double bc = c["bound"], lambda = c["lambda"], center = c["u_center"];
    o.check(bc < 0.1, "constant bound " + fmt(bc) + " at lambda " + fmt(lambda));
    const double err = std::abs(center - 1.0 / lambda);
    o.check(err < 1e-3, "|u(0) - c/lambda| " + fmt(err));
    const json ce = c["equivalence"];
    o.check(ce["tv"].get<double>() < 3.0 * ce["noise_floor"].get<double>(),
            "constant TV " + fmt(ce["tv"]) + " floor " + fmt(ce["noise_floor"]));

    const json z = read_json(r.cli("zvonkin", "zvonkin_riesz.cfg", "c4_riesz") / "zvonkin_report.json");
    o.check(z["bound"].get<double>() < 0.1, "Riesz bound " + fmt(z["bound"]) + " at lambda " + fmt(z["lambda"]));
    const json ze = z["equivalence"];
    o.check(ze["tv"].get<double>() < 3.0 * ze["noise_floor"].get<double>(),
            "Riesz TV " + fmt(ze["tv"]) + " floor " + fmt(ze["noise_floor"]));
    return o;
}

// ---------------------------------------------------------------------------

SimConfig ou_config(std::uint64_t seed, int workers)
{
    SimConfig c;
    c.T = 1.0;
    c.h = 0.01;
    c.N = 10000;
    c.seed = seed;
    c.hist = HistogramSpec::uniform(2, -4.0, 4.0, 16);
    c.store_increments = true;
    c.record_every = 1;
    c.workers = workers;
    return c;
}

CoefficientSet ou(double shift = 0.0)
{
    CoefficientSet c = make_linear(1, -1.0, 0.0, 0.0, -1.0, 1.0);
    if (shift != 0.0) c.b = [shift](double, ConstVec, OutVec out) { out[0] = shift; };
    return c;
}

constexpr double kShift = 0.5;

WeightedLaw ou_reweighted(int workers)
{
    const Ensemble e = simulate_ensemble(ou_config(3, workers), ou(), InitialLaw::dirac(PhaseState({0.0}, {0.0})));
    return girsanov_weighted_law(e, [](double, ConstVec, ConstVec, OutVec xi) { xi[0] = kShift; });
}

FlowBoundReport picard_flow_bound(int workers)
{
    Experiment e = load_experiment(kConfigs / "mkv_picard.cfg");
    e.sim.workers = workers;
    const FlowRun ps = particle_system_run(e.sim, e.coeffs, e.init);
    const PicardState p0 = picard_init(e.sim, e.coeffs, e.init);
    FlowBoundOptions fo;
    fo.report_every = 1;
    return girsanov_flow_bound(e.sim, e.coeffs, e.init, ps.flow, p0.flow, fo);
}

Outcome girsanov_suite(int workers)
{
    Outcome o;
    const double T = 1.0;
    const WeightedLaw w = ou_reweighted(workers);
    const double z1 = std::abs(w.mean_weight.mean - 1.0) / w.mean_weight.std_error;
    o.check(z1 < 3.0, "E[R]=" + fmt(w.mean_weight.mean) + " (" + fmt(z1) + " SE)");
    const double m2 = std::exp(kShift * kShift * T);
    const double z2 = std::abs(w.mean_weight_squared.mean - m2) / w.mean_weight_squared.std_error;
    o.check(z2 < 3.0, "E[R^2]=" + fmt(w.mean_weight_squared.mean) + " vs " + fmt(m2) + " (" + fmt(z2) + " SE)");

    SimConfig direct_cfg = ou_config(4, workers);
    direct_cfg.store_increments = false;
    const Ensemble direct = simulate_ensemble(direct_cfg, ou(kShift), InitialLaw::dirac(PhaseState({0.0}, {0.0})));
    const double tv = empirical_var_distance(histogram_of(w.law, direct_cfg.hist),
                                             histogram_of(direct.final_law(), direct_cfg.hist));
    const double floor = bootstrap_noise_floor(direct.final_law(), direct_cfg.hist, 100, 5);
    o.check(tv < 3.0 * floor, "reweighted TV " + fmt(tv) + " floor " + fmt(floor));

    const FlowBoundReport fb = picard_flow_bound(workers);
    double worst = -1e300;
    for (std::size_t i = 0; i < fb.times.size(); ++i)
        worst = std::max(worst, fb.empirical[i] - fb.bound[i] - fb.noise_floor);
    o.check(fb.respected, "flow bound respected at " + std::to_string(fb.times.size()) + " times, worst excess " +
                              fmt(worst) + ", final " + fmt(fb.empirical.back()) + " <= " + fmt(fb.bound.back()));
    return o;
}

// ---------------------------------------------------------------------------

json chart_at(const json& report, double scale)
{
    for (const auto& row : report["chart"])
        if (std::abs(row["scale"].get<double>() - scale) < 1e-12) return row;
    throw ValidationError("chart has no scale " + fmt(scale));
}

Outcome khasminskii(Runner& r)
{
    Outcome o;
    const json c = read_json(r.cli("khasminskii", "khasminskii_constant.cfg", "c6_constant") / "khasminskii_report.json");
    const KvConfig ckv = KvConfig::load(kConfigs / "khasminskii_constant.cfg");
    const double a = ckv.num("khas.a", 1.0), T = ckv.num("T", 1.0);
    const double exact = std::exp(a * a * T);
    const json row = chart_at(c, 1.0);
    const double est = row["estimate"].is_number() ? row["estimate"].get<double>() : NAN;
    const double rel = std::abs(est - exact) / exact;
    o.check(rel < 5e-5, "constant estimate " + fmt(est) + " vs e^{a^2 T}, rel err " + fmt(rel));

    struct Variant
    {
        std::string label;
        std::function<void(KvConfig&)> edit;
    };
    const std::vector<Variant> variants{
        {"c6_riesz", {}},
        {"c6_riesz_2N", [](KvConfig& kv) { kv.set("N", std::to_string(2 * kv.integer("N", 0))); }},
        {"c6_riesz_half_floor", [](KvConfig& kv) { kv.set("khas.floor", format_double(0.5 * kv.num("khas.floor", 1e-6))); }},
    };
    std::vector<std::pair<double, double>> cis;
    for (const auto& v : variants)
    {
        const json rep = read_json(r.cli("khasminskii", "khasminskii_riesz.cfg", v.label, v.edit) / "khasminskii_report.json");
        const json rr = chart_at(rep, 1.0);
        const bool finite = rr["estimate"].is_number() && rr["ci"][0].is_number() && rr["ci"][1].is_number();
        o.check(finite, v.label + " finite");
        if (!finite) return o;
        cis.emplace_back(rr["ci"][0].get<double>(), rr["ci"][1].get<double>());
        o.check(true, v.label + " " + fmt(rr["estimate"]) + " [" + fmt(cis.back().first) + ", " + fmt(cis.back().second) + "]");
    }
    double lo = -1e300, hi = 1e300;
    for (const auto& [l, h] : cis)
    {
        lo = std::max(lo, l);
        hi = std::min(hi, h);
    }
    o.check(lo <= hi, "CIs overlap");
    return o;
}

Outcome picard(Runner& r, int workers)
{
    Outcome o;
    const json p = read_json(r.cli("mkv-picard", "mkv_picard.cfg", "c7_picard") / "mkv_picard_report.json");
    const int it = p["iterations"];
    const double floor = p["noise_floor"];
    const std::vector<double> rho = p["rho_history"];
    o.check(p["converged"] == true && it <= 20, "converged in " + std::to_string(it) + " iterations");
    o.check(p["common_random_numbers"] == true, "common random numbers");
    bool ratios_ok = true;
    std::string ratios;
    for (std::size_t i = 1; i < rho.size(); ++i)
    {
        if (rho[i - 1] <= floor) continue;
        const double q = rho[i] / rho[i - 1];
        ratios += (ratios.empty() ? "" : ",") + fmt(q);
        if (!(q < 1.0)) ratios_ok = false;
    }
    o.check(ratios_ok, "ratios above floor [" + ratios + "] rho [" + fmt(rho.front()) + " .. " + fmt(rho.back()) + "]");
    const double tv = p["particle_system_tv"];
    o.check(tv < 3.0 * floor, "fixed point vs particle system TV " + fmt(tv) + " floor " + fmt(floor));

    KvConfig kv = KvConfig::load(kConfigs / "mkv_picard.cfg");
    kv.set("kappa", "0");
    Experiment e = build_experiment(kv);
    e.sim.workers = workers;
    PicardState st = picard_init(e.sim, e.coeffs, e.init);
    st = picard_iterate(std::move(st), e.sim, e.coeffs, e.init);
    st = picard_iterate(std::move(st), e.sim, e.coeffs, e.init);
    o.check(st.rho_history.size() == 2 && st.rho_history[1] == 0.0,
            "kappa=0 second-iterate rho " + fmt(st.rho_history.size() == 2 ? st.rho_history[1] : NAN));
    return o;
}

Outcome sweep(Runner& r)
{
    Outcome o;
    const json s = read_json(r.cli("mkv-sweep", "mkv_sweep.cfg", "c8_sweep") / "mkv_sweep_report.json");
    for (const auto& k : s["results"])
    {
        const double kappa = k["kappa"];
        if (kappa > 0.2 + 1e-12) continue;
        o.check(k["confirmed"] == true, "kappa " + fmt(kappa) + " rate " + fmt(k["rate"]) + " R^2 " + fmt(k["r_squared"]));
    }
    const json st = read_json(r.cli("mkv-sweep", "mkv_sweep_strong.cfg", "c8_strong") / "mkv_sweep_report.json");
    for (const auto& k : st["results"])
        o.check(k["confirmed"] == false, "control kappa " + fmt(k["kappa"]) + " not confirmed (slope test " +
                                             k["verdict"].get<std::string>() + ", R^2 " + fmt(k["r_squared"]) + ")");
    return o;
}

Outcome h_envelope_check(Runner& r)
{
    Outcome o;
    const json hb = read_json(r.cli("h-bound", "h_bound.cfg", "c9_h") / "h_bound_report.json");
    const double err = std::abs(hb["H_v0"].get<double>() - std::numbers::pi / 4.0);
    o.check(err < 1e-8, "|H(1) - pi/4| " + fmt(err));

    double worst_rt = 0.0;
    for (const PhiFamily& phi : {PhiFamily::superlinear(1.0, 1.0), PhiFamily::superlinear(0.7, 0.5)})
        for (double v : {1e-3, 0.1, 1.0, 5.0, 100.0, 1e4})
            worst_rt = std::max(worst_rt, std::abs(h_inverse(phi, h_integral(phi, v)) - v) / std::max(1.0, v));
    o.check(worst_rt < 1e-8, "roundtrip error " + fmt(worst_rt));

    const fs::path erg = r.cli("ergodicity", "example31_superlinear.cfg", "c9_superlinear");
    const json fit = read_json(erg / "ergodicity_fit.json")["fit"];
    const json lyap =
        read_json(r.cli("lyapunov-check", "example31_lyapunov_superlinear.cfg", "c9_lyapunov") / "lyapunov_report.json");
    o.check(lyap["verdict"] == "holds", "superlinear drift condition " + lyap["verdict"].get<std::string>());
    const double lambda = fit["rate"];
    o.check(lambda > 0.0, "fitted lambda " + fmt(lambda));
    if (!(lambda > 0.0) || !lyap.contains("c0")) return o;

    const KvConfig ekv = KvConfig::load(kConfigs / "example31_superlinear.cfg");
    const LyapunovV V(ekv.num("lyap.theta", 1.0), 1, 1);
    const std::vector<double> x0{ekv.num("init.x", 0.0)}, y0{ekv.num("init.y", 0.0)};
    const double v0 = V.value(x0, y0);
    const double beta = KvConfig::load(kConfigs / "example31_lyapunov_superlinear.cfg").num("phi.beta", 0.5);
    const PhiFamily phi = PhiFamily::superlinear(lyap["c0"].get<double>(), beta);

    const CsvTable d = read_csv(erg / "ergodicity_distance.csv");
    std::vector<double> times, dist;
    for (const auto& row : d.rows)
    {
        times.push_back(row[0]);
        dist.push_back(row[1]);
    }
    const double k = fit_envelope_k(phi, v0, lambda, times, dist);
    const fs::path env_dir = r.cli("h-bound", "h_bound.cfg", "c9_envelope", [&](KvConfig& kv) {
        kv.set("hbound.c0", format_double(phi.c0));
        kv.set("hbound.beta", format_double(phi.beta));
        kv.set("hbound.v0", format_double(v0));
        kv.set("hbound.k", format_double(k));
        kv.set("hbound.lambda", format_double(lambda));
        kv.set("hbound.t_max", format_double(times.back()));
        kv.set("hbound.points", std::to_string(times.size()));
    });
    const CsvTable env = read_csv(env_dir / "h_envelope.csv");
    bool dominates = env.rows.size() == times.size();
    std::size_t checked = 0;
    for (std::size_t i = 0; dominates && i < times.size(); ++i)
    {
        if (std::abs(env.rows[i][0] - times[i]) > 1e-9 || env.rows[i][1] < dist[i]) dominates = false;
        ++checked;
    }
    o.check(dominates, "envelope (k=" + fmt(k) + ", lambda=" + fmt(lambda) + ", c0=" + fmt(phi.c0) + ", V0=" + fmt(v0) +
                           ") dominates at " + std::to_string(checked) + "/" + std::to_string(times.size()) + " times");
    return o;
}

// ---------------------------------------------------------------------------

bool json_close(const json& a, const json& b, double tol)
{
    if (a.is_number() && b.is_number()) return close_rel(a.get<double>(), b.get<double>(), tol);
    if (a.type() != b.type() || a.size() != b.size()) return false;
    if (a.is_object())
    {
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key()) || !json_close(it.value(), b[it.key()], tol)) return false;
        return true;
    }
    if (a.is_array())
    {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!json_close(a[i], b[i], tol)) return false;
        return true;
    }
    return a == b;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// 0: byte-equal, 1: equal within tolerance, 2: different.
int compare_output(const fs::path& a, const fs::path& b, double tol)
{
    if (slurp(a) == slurp(b)) return 0;
    const std::string ext = a.extension().string();
    try
    {
        if (ext == ".json") return json_close(read_json(a), read_json(b), tol) ? 1 : 2;
        if (ext == ".csv")
        {
            const CsvTable x = read_csv(a), y = read_csv(b);
            if (x.header != y.header || x.rows.size() != y.rows.size()) return 2;
            for (std::size_t i = 0; i < x.rows.size(); ++i)
            {
                if (x.rows[i].size() != y.rows[i].size()) return 2;
                for (std::size_t j = 0; j < x.rows[i].size(); ++j)
                    if (!close_rel(x.rows[i][j], y.rows[i][j], tol)) return 2;
            }
            return 1;
        }
    }
    catch (const std::exception&)
    {
        return 2;
    }
    return 2;
}

Outcome reproducibility(Runner& r, int rerun_workers, int workers)
{
    constexpr double kTol = 1e-12;
    Outcome o;
    std::size_t exact = 0, tolerant = 0, files = 0;
    std::vector<std::string> bad;
    for (const CliRun& run : r.runs())
    {
        const fs::path manifest = run.dir / (run.command + "_manifest.json");
        const fs::path redo = run.dir / "rerun";
        fs::remove_all(redo);
        cli::Options opts;
        opts.out_dir = redo;
        opts.workers = rerun_workers;
        const int rc = cli::run_rerun(manifest, opts);
        if (rc != 0)
        {
            bad.push_back(run.dir.filename().string() + " exit " + std::to_string(rc));
            continue;
        }
        for (const std::string& name : read_manifest(manifest).outputs)
        {
            ++files;
            switch (compare_output(run.dir / name, redo / name, kTol))
            {
                case 0: ++exact; break;
                case 1: ++tolerant; break;
                default: bad.push_back(run.dir.filename().string() + "/" + name);
            }
        }
    }
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ",") + b;
    o.check(bad.empty(), std::to_string(r.runs().size()) + " manifests rerun with " + std::to_string(rerun_workers) +
                             " workers: " + std::to_string(exact) + "/" + std::to_string(files) + " byte-equal, " +
                             std::to_string(tolerant) + " within 1e-12" + (list.empty() ? "" : ", mismatched " + list));

    // in-process pieces
    const WeightedLaw a = ou_reweighted(workers), b = ou_reweighted(rerun_workers);
    bool same = a.law.y == b.law.y && a.law.x == b.law.x && a.log_weights.size() == b.log_weights.size();
    for (std::size_t i = 0; same && i < a.log_weights.size(); ++i) same = close_rel(a.log_weights[i], b.log_weights[i], kTol);
    o.check(same, "Girsanov weights");
    const FlowBoundReport fa = picard_flow_bound(workers), fb = picard_flow_bound(rerun_workers);
    bool fsame = fa.empirical.size() == fb.empirical.size();
    for (std::size_t i = 0; fsame && i < fa.empirical.size(); ++i)
        fsame = close_rel(fa.empirical[i], fb.empirical[i], kTol) && close_rel(fa.bound[i], fb.bound[i], kTol);
    o.check(fsame, "flow bound");
    return o;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"kinsde acceptance suite"};
    fs::path out = "acceptance_runs";
    int workers = 1, rerun_workers = 4;
    std::vector<int> only;
    app.add_option("--out", out, "Directory for run outputs");
    app.add_option("--workers", workers, "Worker threads for the primary runs");
    app.add_option("--rerun-workers", rerun_workers, "Worker threads for the reproducibility reruns");
    app.add_option("--only", only, "Run only these criteria (reproducibility covers whatever ran)");
    CLI11_PARSE(app, argc, argv);

    Runner runner(out, workers);
    struct Criterion
    {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "linear Langevin stationary covariance", [&] { return langevin_stationarity(runner); }},
        {2, "log-linear decay of TV between two flows, null at floor", [&] { return ergodicity_decay(runner); }},
        {3, "drift condition verifier", [&] { return lyapunov_verifier(runner); }},
        {4, "Zvonkin pipeline", [&] { return zvonkin_pipeline(runner); }},
        {5, "Girsanov suite", [&] { return girsanov_suite(workers); }},
        {6, "Khasminskii estimator", [&] { return khasminskii(runner); }},
        {7, "Picard fixed point", [&] { return picard(runner, workers); }},
        {8, "uniform ergodicity sweep", [&] { return sweep(runner); }},
        {9, "H-envelope", [&] { return h_envelope_check(runner); }},
        {10, "reproducibility across worker counts", [&] { return reproducibility(runner, rerun_workers, workers); }},
    };

    std::vector<std::string> lines;
    bool all = true;
    for (const auto& c : criteria)
    {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string line;
        bool pass = false;
        try
        {
            const Outcome o = c.fn();
            pass = o.pass;
            line = o.detail.str();
        }
        catch (const std::exception& e)
        {
            line = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && pass;
        std::ostringstream os;
        os << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << line << " (" << fmt(secs) << " s)";
        lines.push_back(os.str());
        std::cout << lines.back() << std::endl;
    }
    std::cout << "\n==== acceptance summary ====\n";
    for (const auto& l : lines) std::cout << l << "\n";
    std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    return all ? 0 : 1;
}
