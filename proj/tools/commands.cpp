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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include "json.hpp"
#include "kinsde/ergodicity.hpp"
#include "kinsde/errors.hpp"
#include "kinsde/experiment_config.hpp"
#include "kinsde/integrators.hpp"
#include "kinsde/io.hpp"
#include "kinsde/lyapunov_verifier.hpp"
#include "kinsde/mckean_vlasov.hpp"
#include "kinsde/zvonkin.hpp"

namespace kinsde::cli
{
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(format_double(v));
}

class Run
{
public:
    Run(const Options& opts, std::string command)
        : exp_(load_experiment(opts.config)), out_(opts.out_dir), command_(std::move(command)),
          start_(std::chrono::steady_clock::now())
    {
        if (opts.workers >= 0) exp_.sim.workers = opts.workers;
        const ValidationReport rep = validate_config(exp_.sim, exp_.coeffs);
        for (const auto& v : rep.items)
            if (v.severity == Severity::warning) std::cerr << "kinsde: warning: " << v.what << "\n";
        if (!rep.ok()) throw ValidationError(rep.summary());
        fs::create_directories(out_);
    }

    Experiment& exp() { return exp_; }
    const KvConfig& kv() const { return exp_.kv; }
    const std::string& hash() const { return exp_.config_hash; }
    void add_steps(std::size_t n) { steps_ += n; }

    fs::path file(const std::string& name)
    {
        outputs_.push_back(name);
        return out_ / name;
    }

    CsvWriter csv(const std::string& name, std::vector<std::string> header)
    {
        return CsvWriter(file(name), hash(), std::move(header));
    }

    void json_out(const std::string& name, json j)
    {
        j["config_hash"] = hash();
        j["command"] = command_;
        std::ofstream f(file(name), std::ios::binary | std::ios::trunc);
        f << j.dump(2) << "\n";
        if (!f) throw NumericError("cannot write " + name);
    }

    void snapshot(const std::string& base, const EmpiricalLaw& law, double t)
    {
        SnapshotMeta meta{hash(), exp_.sim.seed, t, law.size(), law.d1, law.d2};
        write_snapshot(out_ / base, law, meta);
        outputs_.push_back(base + ".bin");
        outputs_.push_back(base + ".json");
    }

    void finish()
    {
        Manifest m;
        m.config_text = exp_.kv.canonical();
        m.config_hash = hash();
        m.seed = exp_.sim.seed;
        m.version = KINSDE_VERSION;
        m.command = command_;
        m.outputs = outputs_;
        m.steps = steps_;
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_manifest(out_ / (command_ + "_manifest.json"), m);
    }

private:
    Experiment exp_;
    fs::path out_;
    std::string command_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
    std::size_t steps_ = 0;
};

Ensemble run_dynamics(const SimConfig& cfg, const CoefficientSet& coeffs, const InitialLaw& init)
{
    if (coeffs.interaction) return particle_system_run(cfg, coeffs, init).ensemble;
    return simulate_ensemble(cfg, coeffs, init);
}

json fit_json(const DecayFit& fit)
{
    return {{"rate", fit.rate},
            {"prefactor", fit.prefactor},
            {"r_squared", fit.r_squared},
            {"rate_std_error", fit.rate_std_error},
            {"noise_floor", fit.noise_floor},
            {"used_points", fit.used_points},
            {"verdict", to_string(fit.verdict)}};
}

std::optional<LyapunovV> distance_weight(const Experiment& e)
{
    if (!e.kv.boolean("erg.use_v", false)) return std::nullopt;
    return LyapunovV(e.kv.num("lyap.theta", 1.0), e.sim.d1, e.sim.d2);
}

PhiFamily phi_from(const KvConfig& kv, double default_beta)
{
    const std::string kind = kv.str("phi.kind", "linear");
    const double c0 = kv.num("phi.c0", 1.0);
    if (kind == "linear") return PhiFamily::linear(c0);
    if (kind == "superlinear") return PhiFamily::superlinear(c0, kv.num("phi.beta", default_beta));
    throw ValidationError("unknown phi.kind '" + kind + "' (linear, superlinear)");
}
}  // namespace

int run_simulate(const Options& opts)
{
    Run run(opts, "simulate");
    const Experiment& e = run.exp();
    const Ensemble ens = run_dynamics(e.sim, e.coeffs, e.init);
    run.add_steps(e.sim.steps() * e.sim.N);
    run.snapshot("simulate_final", ens.final_law(), e.sim.T);

    std::vector<std::string> header{"t", "alive"};
    for (int i = 0; i < e.sim.d1; ++i) header.push_back("mean_x" + std::to_string(i + 1));
    for (int i = 0; i < e.sim.d2; ++i) header.push_back("mean_y" + std::to_string(i + 1));
    {
        CsvWriter csv = run.csv("simulate_moments.csv", header);
        for (std::size_t k = 0; k < ens.slices.size(); ++k)
        {
            const EmpiricalLaw& s = ens.slices[k];
            std::vector<double> mx(e.sim.d1, 0.0), my(e.sim.d2, 0.0);
            double w = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
            {
                const double wi = s.weight(i);
                if (!(wi > 0.0)) continue;
                w += wi;
                for (int c = 0; c < e.sim.d1; ++c) mx[c] += wi * s.x_of(i)[c];
                for (int c = 0; c < e.sim.d2; ++c) my[c] += wi * s.y_of(i)[c];
            }
            std::vector<double> row{ens.times[k], w};
            for (double v : mx) row.push_back(w > 0 ? v / w : 0.0);
            for (double v : my) row.push_back(w > 0 ? v / w : 0.0);
            csv.row(row);
        }
        csv.close();
    }
    run.json_out("simulate_summary.json", {{"N", e.sim.N},
                                           {"steps", e.sim.steps()},
                                           {"scheme", to_string(e.sim.scheme)},
                                           {"dead", ens.dead_count()},
                                           {"dead_fraction", ens.dead_fraction()},
                                           {"unstable", ens.unstable()}});
    run.finish();
    if (ens.unstable())
    {
        std::cerr << "kinsde: run unstable: " << ens.dead_count() << " of " << ens.size()
                  << " particles blew up (try scheme = tamed or a smaller h)\n";
        return 3;
    }
    return 0;
}

int run_ergodicity(const Options& opts)
{
    Run run(opts, opts.replay.empty() ? "ergodicity" : "ergodicity-replay");
    const Experiment& e = run.exp();
    const double fit_from = e.kv.num("erg.fit_from", 1.0);
    if (!opts.replay.empty())
    {
        const CsvTable table = read_csv(opts.replay);
        const std::vector<double> t = table.column("t");
        const std::vector<double> d = table.column("distance");
        double floor = 0.0;
        if (std::find(table.header.begin(), table.header.end(), "noise_floor") != table.header.end())
            for (double v : table.column("noise_floor")) floor = std::max(floor, v);
        const DecayFit fit = fit_exponential_decay(t, d, floor);
        run.json_out("ergodicity_fit.json", {{"mode", "replay"}, {"source", opts.replay.string()}, {"fit", fit_json(fit)}});
        run.finish();
        return 0;
    }
    if (!e.init2) throw ValidationError("ergodicity needs a second initial law (init2.*)");
    SimConfig cfg_b = e.sim;
    cfg_b.seed = e.sim.seed + 1;
    const Ensemble a = run_dynamics(e.sim, e.coeffs, e.init);
    const Ensemble b = run_dynamics(cfg_b, e.coeffs, *e.init2);
    run.add_steps(2 * e.sim.steps() * e.sim.N);
    const std::optional<LyapunovV> V = distance_weight(e);
    const LyapunovV* vp = V ? &*V : nullptr;
    const std::size_t reps = static_cast<std::size_t>(e.kv.integer("erg.replicates", 100));
    const double floor = bootstrap_noise_floor(a.final_law(), e.sim.hist, reps, e.sim.seed, vp, 0.95, e.sim.workers);
    std::vector<double> ft, fd;
    {
        CsvWriter csv = run.csv("ergodicity_distance.csv", {"t", "distance", "noise_floor"});
        for (std::size_t k = 0; k < a.slices.size(); ++k)
        {
            const HistogramLaw ha = histogram_of(a.slices[k], e.sim.hist, e.sim.workers);
            const HistogramLaw hb = histogram_of(b.slices[k], e.sim.hist, e.sim.workers);
            const double d = vp ? empirical_v_distance(ha, hb, *vp) : empirical_var_distance(ha, hb);
            csv.row({a.times[k], d, floor});
            if (a.times[k] + 1e-12 >= fit_from)
            {
                ft.push_back(a.times[k]);
                fd.push_back(d);
            }
        }
        csv.close();
    }
    const DecayFit fit = fit_exponential_decay(ft, fd, floor);
    run.json_out("ergodicity_fit.json", {{"mode", "simulate"},
                                         {"distance", vp ? "V" : "var"},
                                         {"fit_from", fit_from},
                                         {"dead", a.dead_count() + b.dead_count()},
                                         {"fit", fit_json(fit)}});
    run.finish();
    return 0;
}

int run_lyapunov_check(const Options& opts)
{
    Run run(opts, "lyapunov-check");
    const Experiment& e = run.exp();
    const KvConfig& kv = e.kv;
    const double theta = kv.num("lyap.theta", 1.0);
    const LyapunovV V(theta, e.sim.d1, e.sim.d2);
    const double eps = kv.num("lyap.epsilon", 0.1);
    SampleSpec sample;
    sample.r_min = kv.num("lyap.r_min", sample.r_min);
    sample.r_max = kv.num("lyap.r_max", sample.r_max);
    sample.radii = static_cast<int>(kv.integer("lyap.radii", sample.radii));
    sample.directions = static_cast<int>(kv.integer("lyap.directions", sample.directions));
    sample.shell_points = static_cast<int>(kv.integer("lyap.shell", sample.shell_points));
    sample.seed = static_cast<std::uint64_t>(kv.integer("lyap.sample_seed", static_cast<long long>(sample.seed)));
    const double default_beta = kv.num("delta", 0.0) / (2.0 * theta);
    const PhiFamily phi_cfg = phi_from(kv, default_beta);
    const std::string mode = kv.str("lyap.mode", "search");

    json j{{"mode", mode}, {"domain", sample.describe()}, {"theta", theta}, {"epsilon", eps}};
    std::optional<DriftConditionReport> report;
    if (mode == "search")
    {
        SearchOptions so;
        so.core_fraction = kv.num("lyap.core_fraction", so.core_fraction);
        so.workers = e.sim.workers;
        try
        {
            const ConstantSearch cs = search_constants(e.coeffs, V, phi_cfg.kind, phi_cfg.beta, eps, sample, so);
            j["c0"] = cs.c0;
            j["K"] = cs.K;
            j["at_cap"] = cs.at_cap;
            report = cs.report;
        }
        catch (const NumericError& err)
        {
            j["verdict"] = "fails";
            j["reason"] = err.what();
        }
    }
    else if (mode == "check")
    {
        if (!kv.has("lyap.K") || !kv.has("phi.c0")) throw ValidationError("lyap.mode = check needs lyap.K and phi.c0");
        report = check_b3(e.coeffs, V, phi_cfg, kv.num("lyap.K", 0.0), eps, sample, e.sim.workers);
        j["c0"] = phi_cfg.c0;
        j["K"] = report->K;
    }
    else
        throw ValidationError("unknown lyap.mode '" + mode + "' (search, check)");

    if (report)
    {
        j["verdict"] = report->holds ? "holds" : "fails";
        j["statement"] = report->verdict();
        j["min_margin"] = report->min_margin;
        j["flagged"] = report->flagged;
        j["points"] = report->points.size();
        const DriftPoint& w = report->points[report->worst];
        j["worst"] = {{"x", w.x}, {"y", w.y}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"margin", w.margin}};
        std::vector<std::string> header;
        for (int i = 0; i < e.sim.d1; ++i) header.push_back("x" + std::to_string(i + 1));
        for (int i = 0; i < e.sim.d2; ++i) header.push_back("y" + std::to_string(i + 1));
        for (const char* h : {"V", "lhs", "rhs", "margin", "flagged"}) header.push_back(h);
        CsvWriter csv = run.csv("lyapunov_margins.csv", header);
        for (const auto& p : report->points)
        {
            std::vector<double> row(p.x);
            row.insert(row.end(), p.y.begin(), p.y.end());
            row.insert(row.end(), {p.v, p.lhs, p.rhs, p.margin, p.flagged ? 1.0 : 0.0});
            csv.row(row);
        }
        csv.close();
    }
    run.json_out("lyapunov_report.json", j);
    run.finish();
    return 0;
}

int run_zvonkin(const Options& opts)
{
    Run run(opts, "zvonkin");
    const Experiment& e = run.exp();
    const KvConfig& kv = e.kv;
    const double eps = kv.num("zvonkin.eps", 0.1);
    const double L = kv.num("zvonkin.L", 10.0);
    const auto n = static_cast<std::size_t>(kv.integer("zvonkin.n", 4001));
    const ZvonkinSolution sol = lambda_sweep(scalar_drift(e.coeffs), scalar_sigma(e.coeffs), eps, L, n);
    {
        CsvWriter csv = run.csv("zvonkin_solution.csv", {"y", "u", "du", "d2u", "theta"});
        for (std::size_t i = 0; i < sol.grid().size(); ++i)
            csv.row({sol.grid()[i], sol.u()[i], sol.du()[i], sol.d2u()[i], sol.theta_table()[i]});
        csv.close();
    }
    const double center = sol.u()[sol.u().size() / 2];
    json j{{"lambda", sol.lambda()},
           {"bound", sol.bound()},
           {"sup_u", sol.sup_u()},
           {"sup_du", sol.sup_du()},
           {"residual", sol.residual()},
           {"roundtrip_error", sol.roundtrip_error()},
           {"u_center", center},
           {"target", eps}};
    if (kv.boolean("zvonkin.equivalence", false))
    {
        EquivalenceOptions eo;
        eo.eps_target = eps;
        eo.L = L;
        eo.grid_points = n;
        eo.bootstrap_replicates = static_cast<std::size_t>(kv.integer("zvonkin.replicates", 100));
        const EquivalenceReport rep = equivalence_experiment(e.coeffs, e.sim, e.init, eo);
        run.add_steps(2 * e.sim.steps() * e.sim.N);
        j["equivalence"] = {{"tv", rep.tv},
                            {"noise_floor", rep.noise_floor},
                            {"out_of_domain", rep.out_of_domain},
                            {"verdict", rep.equivalent ? "equivalent" : "not_equivalent"}};
    }
    run.json_out("zvonkin_report.json", j);
    run.finish();
    return 0;
}

int run_khasminskii(const Options& opts)
{
    Run run(opts, "khasminskii");
    const Experiment& e = run.exp();
    const KvConfig& kv = e.kv;
    const int d2 = e.sim.d2;
    SpaceTimeScalar f;
    std::vector<std::vector<double>> atoms;
    const std::string kind = kv.str("khas.f", "constant");
    if (kind == "constant")
    {
        const double a = kv.num("khas.a", 1.0);
        f = [a](double, ConstVec) { return a; };
    }
    else if (kind == "riesz")
    {
        const RieszDrift r(parse_atoms(kv.str("riesz.atoms", "[(0,1.0)]"), d2), kv.num("khas.alpha", 0.25),
                           kv.num("khas.floor", 1e-6));
        for (const auto& a : r.atoms()) atoms.push_back(a.location);
        f = [r](double, ConstVec y) {
            std::vector<double> out(y.size());
            r.eval(y, out);
            double s = 0.0;
            for (double c : out) s += c * c;
            return std::sqrt(s);
        };
    }
    else
        throw ValidationError("unknown khas.f '" + kind + "' (constant, riesz)");

    const AdmissiblePair pair(kv.num("khas.p", 3.0), kv.num("khas.q", 8.0), d2);
    NormGrid grid;
    grid.horizon = e.sim.T;
    grid.cells_per_axis = static_cast<int>(kv.integer("khas.cells", 400));
    CenterSet centers;
    centers.min = std::vector<double>(d2, kv.num("khas.centers.min", -2.0));
    centers.max = std::vector<double>(d2, kv.num("khas.centers.max", 2.0));
    centers.points_per_axis = static_cast<int>(kv.integer("khas.centers.points", 9));
    centers.atoms = atoms;
    const LocalizedNorm base_norm = localized_lpq_norm(f, pair, grid, centers, e.sim.workers);
    const auto reps = static_cast<std::size_t>(kv.integer("khas.replicates", 200));

    json rows = json::array();
    bool monotone = true;
    double prev = 0.0;
    {
        CsvWriter csv = run.csv("khasminskii_chart.csv", {"scale", "norm", "estimate", "ci_lo", "ci_hi", "overflow"});
        for (double s : {0.25, 0.5, 0.75, 1.0})
        {
            const SpaceTimeScalar fs = [f, s](double t, ConstVec y) { return s * f(t, y); };
            const KhasminskiiEstimate est = khasminskii_estimate(e.sim, e.coeffs, e.init, fs, reps);
            run.add_steps(e.sim.steps() * e.sim.N);
            const double norm = s * base_norm.value;
            csv.row({s, norm, est.estimate, est.interval.lo, est.interval.hi, est.overflow ? 1.0 : 0.0});
            if (est.estimate < prev) monotone = false;
            prev = est.estimate;
            rows.push_back({{"scale", s},
                            {"norm", norm},
                            {"estimate", finite_or_null(est.estimate)},
                            {"ci", {finite_or_null(est.interval.lo), finite_or_null(est.interval.hi)}},
                            {"overflow", est.overflow}});
        }
        csv.close();
    }
    run.json_out("khasminskii_report.json", {{"f", kind},
                                             {"p", pair.p()},
                                             {"q", pair.q()},
                                             {"norm", base_norm.value},
                                             {"argmax_center", base_norm.argmax_center},
                                             {"chart", rows},
                                             {"monotone_in_norm", monotone}});
    run.finish();
    return 0;
}

int run_mkv_picard(const Options& opts)
{
    Run run(opts, "mkv-picard");
    const Experiment& e = run.exp();
    if (!e.coeffs.interaction) throw ValidationError("mkv-picard needs an interaction (interaction = ...)");
    PicardOptions po;
    po.lambda = e.kv.num("mkv.lambda", -1.0);
    po.common_random_numbers = e.kv.boolean("mkv.crn", true);
    po.max_iterations = static_cast<int>(e.kv.integer("mkv.max_iter", 20));
    po.bootstrap_replicates = static_cast<std::size_t>(e.kv.integer("mkv.replicates", 100));
    const PicardState st = picard_solve(e.sim, e.coeffs, e.init, po);
    run.add_steps(static_cast<std::size_t>(st.iteration) * e.sim.steps() * e.sim.N);
    const FlowRun ps = particle_system_run(e.sim, e.coeffs, e.init);
    run.add_steps(e.sim.steps() * e.sim.N);
    const double tv = empirical_var_distance(histogram_of(st.flow.slices.back(), e.sim.hist, e.sim.workers),
                                             histogram_of(ps.flow.slices.back(), e.sim.hist, e.sim.workers));
    {
        CsvWriter csv = run.csv("mkv_picard_rho.csv", {"iteration", "rho"});
        for (std::size_t i = 0; i < st.rho_history.size(); ++i) csv.row({static_cast<double>(i + 1), st.rho_history[i]});
        csv.close();
    }
    run.json_out("mkv_picard_report.json", {{"iterations", st.iteration},
                                            {"converged", st.converged},
                                            {"lambda", st.lambda},
                                            {"common_random_numbers", st.common_random_numbers},
                                            {"noise_floor", st.noise_floor},
                                            {"rho_history", st.rho_history},
                                            {"particle_system_tv", tv},
                                            {"matches_particle_system", tv < 3.0 * st.noise_floor}});
    run.finish();
    return 0;
}

int run_mkv_sweep(const Options& opts)
{
    Run run(opts, "mkv-sweep");
    const Experiment& e = run.exp();
    if (!e.init2) throw ValidationError("mkv-sweep needs a second initial law (init2.*)");
    if (e.kv.str("interaction", "none") == "none") throw ValidationError("mkv-sweep needs an interaction kernel");
    SweepOptions so;
    so.kappas = e.kv.list("mkv.kappas", {0.0, 0.1, 0.2});
    so.fit_from = e.kv.num("mkv.fit_from", 1.0);
    so.bootstrap_replicates = static_cast<std::size_t>(e.kv.integer("mkv.replicates", 100));
    const KvConfig base = e.kv;
    const SimConfig sim = e.sim;
    const CoefficientFamily family = [&base, &sim](double kappa) {
        KvConfig kv = base;
        kv.set("kappa", format_double(kappa));
        return build_coefficients(kv, sim.d1, sim.d2, sim.m);
    };
    const SweepReport rep = uniform_ergodicity_sweep(family, e.init, *e.init2, e.sim, so);
    run.add_steps(2 * so.kappas.size() * e.sim.steps() * e.sim.N);
    json results = json::array();
    {
        CsvWriter csv = run.csv("mkv_sweep_distance.csv", {"kappa", "t", "distance", "noise_floor"});
        for (const auto& r : rep.results)
        {
            for (std::size_t k = 0; k < r.times.size(); ++k) csv.row({r.kappa, r.times[k], r.distance[k], r.noise_floor});
            json fj = fit_json(r.fit);
            fj["kappa"] = r.kappa;
            fj["confirmed"] = r.confirmed;
            results.push_back(fj);
        }
        csv.close();
    }
    run.json_out("mkv_sweep_report.json",
                 {{"results", results}, {"kappa_star", rep.kappa_star ? json(*rep.kappa_star) : json(nullptr)}});
    run.finish();
    return 0;
}

int run_h_bound(const Options& opts)
{
    Run run(opts, "h-bound");
    const KvConfig& kv = run.kv();
    KvConfig phi_kv = kv;
    if (!kv.has("phi.kind")) phi_kv.set("phi.kind", "superlinear");
    if (kv.has("hbound.c0")) phi_kv.set("phi.c0", kv.str("hbound.c0", "1"));
    const PhiFamily phi = phi_from(phi_kv, kv.num("hbound.beta", 1.0));
    const double v0 = kv.num("hbound.v0", 1.0);
    const double k = kv.num("hbound.k", 1.0);
    const double lambda = kv.num("hbound.lambda", 1.0);
    const double t_max = kv.num("hbound.t_max", 10.0);
    const auto points = static_cast<std::size_t>(kv.integer("hbound.points", 101));
    if (points < 2) throw ValidationError("hbound.points must be >= 2");
    std::vector<double> times(points);
    for (std::size_t i = 0; i < points; ++i) times[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const std::vector<double> env = h_envelope(phi, v0, k, lambda, times);
    {
        CsvWriter csv = run.csv("h_envelope.csv", {"t", "envelope"});
        for (std::size_t i = 0; i < points; ++i) csv.row({times[i], env[i]});
        csv.close();
    }
    const double hv = h_integral(phi, v0);
    run.json_out("h_bound_report.json", {{"c0", phi.c0},
                                         {"beta", phi.beta},
                                         {"v0", v0},
                                         {"k", k},
                                         {"lambda", lambda},
                                         {"H_v0", hv},
                                         {"H_inf", h_limit(phi)},
                                         {"clamp_time", k * hv}});
    run.finish();
    return 0;
}

std::span<const Command> command_table()
{
    static const Command table[] = {
        {"simulate", "Simulate an ensemble and write a snapshot of the final law", run_simulate},
        {"ergodicity", "Distance decay between two initial laws, with a log-linear fit", run_ergodicity},
        {"lyapunov-check", "Check or search constants for the drift condition on a sampled domain", run_lyapunov_check},
        {"zvonkin", "Resolvent solve, lambda sweep, and optional equivalence experiment", run_zvonkin},
        {"khasminskii", "Exponential moment estimates charted against the localized norm", run_khasminskii},
        {"mkv-picard", "Picard iteration of the law-flow map to its fixed point", run_mkv_picard},
        {"mkv-sweep", "Decay fits across interaction strengths kappa", run_mkv_sweep},
        {"h-bound", "Envelope curve k(1 + H^-1(H(V0) - t/k)) exp(-lambda t)", run_h_bound},
    };
    return table;
}

int run_rerun(const fs::path& manifest, const Options& opts)
{
    const Manifest m = read_manifest(manifest);
    for (const Command& c : command_table())
    {
        if (m.command != c.name) continue;
        fs::create_directories(opts.out_dir);
        Options o = opts;
        o.config = opts.out_dir / (m.command + "_rerun.cfg");
        {
            std::ofstream f(o.config, std::ios::binary | std::ios::trunc);
            f << m.config_text;
            if (!f) throw NumericError("cannot write " + o.config.string());
        }
        return c.fn(o);
    }
    throw ValidationError("manifest command '" + m.command + "' cannot be rerun from its config alone");
}

int run_verify(const fs::path& manifest)
{
    const VerifyResult r = verify_manifest(manifest);
    if (r.ok)
    {
        std::cout << "verify: OK (" << manifest.string() << ")\n";
        return 0;
    }
    for (const auto& p : r.problems) std::cerr << "verify: " << p << "\n";
    return 2;
}
}  // namespace kinsde::cli
