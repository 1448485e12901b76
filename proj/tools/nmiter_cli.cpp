// Command-line front door: scheduler queries, instance runs, eps sweeps with
// slope fitting, smoothing self-tests, trace export.

#include "nmiter/hyperb.hpp"
#include "nmiter/io.hpp"
#include "nmiter/relax.hpp"
#include "nmiter/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using json = nlohmann::ordered_json;
using namespace nmiter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStalled = 3;
constexpr int kExitDiverged = 4;

struct ParamFlags {
    scheduler::NmParams p;
    std::string config_path;

    void attach(CLI::App* app, bool relax_defaults = true) {
        if (relax_defaults) p = relax::default_params(0.1);
        app->add_option("--k", p.k, "accuracy exponent of the approximate solution");
        app->add_option("--kappa", p.kappa, "loss exponent of the right inverse");
        app->add_option("--gamma0", p.gamma0, "smallness exponent in the size bounds");
        app->add_option("--gamma", p.gamma, "smallness exponent in the inverse condition");
        app->add_option("--m", p.m, "derivative loss of the map");
        app->add_option("--r", p.r, "tame index of the inverse");
        app->add_option("--rprime", p.rprime, "tame index on the data side");
        app->add_option("--s0", p.s0, "base regularity");
        app->add_option("--sbar", p.sbar, "top regularity");
        app->add_option("--s", p.s, "working index");
        app->add_option("--alpha", p.alpha, "corrector decay exponent");
        app->add_option("--N", p.N, "high-norm growth exponent");
        app->add_option("--p", p.p, "high-norm offset");
        app->add_option("--zeta", p.zeta, "schedule exponent");
        app->add_option("--theta0", p.theta0, "explicit start value (0: eps^-k)");
        app->add_option("--eps", p.eps, "perturbation parameter");
        app->add_option("--margin", p.margin, "multiplier on the step inequalities");
        app->add_option("--config", config_path, "JSON config file (v1)");
    }

    // Config values load first; explicit flags already sit in p and win only
    // if the file omits them, so the file is applied before re-parsing.
    void load_config() {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
        json j = json::parse(in);
        static const std::set<std::string> allowed = {
            "version", "k", "kappa", "gamma0", "gamma", "m", "r", "rprime", "s0",
            "sbar", "s", "alpha", "N", "p", "zeta", "theta0", "eps", "margin"};
        if (!j.contains("version") || j["version"] != "v1")
            throw CLI::ValidationError("--config", "config must declare version v1");
        for (auto& [key, val] : j.items())
            if (!allowed.count(key))
                throw CLI::ValidationError("--config", "unknown key '" + key + "'");
        auto get = [&](const char* k, double& slot) {
            if (j.contains(k)) slot = j[k].get<double>();
        };
        get("k", p.k); get("kappa", p.kappa); get("gamma0", p.gamma0); get("gamma", p.gamma);
        get("m", p.m); get("r", p.r); get("rprime", p.rprime);
        get("s0", p.s0); get("sbar", p.sbar); get("s", p.s);
        get("alpha", p.alpha); get("N", p.N); get("p", p.p); get("zeta", p.zeta);
        get("theta0", p.theta0); get("eps", p.eps); get("margin", p.margin);
    }

    json echo() const {
        json j;
        j["k"] = p.k; j["kappa"] = p.kappa; j["gamma0"] = p.gamma0; j["gamma"] = p.gamma;
        j["m"] = p.m; j["r"] = p.r; j["rprime"] = p.rprime;
        j["s0"] = p.s0; j["sbar"] = p.sbar; j["s"] = p.s;
        j["alpha"] = p.alpha; j["N"] = p.N; j["p"] = p.p; j["zeta"] = p.zeta;
        j["theta0"] = p.theta0; j["eps"] = p.eps; j["margin"] = p.margin;
        return j;
    }
};

int max_threads() {
    if (const char* env = std::getenv("NM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_file(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << body;
    }
    std::rename(tmp.c_str(), path.c_str());
}

int status_exit(engine::SolveStatus s) {
    switch (s) {
        case engine::SolveStatus::converged: return kExitOk;
        case engine::SolveStatus::stalled: return kExitStalled;
        case engine::SolveStatus::budget: return kExitStalled;
        case engine::SolveStatus::diverged: return kExitDiverged;
    }
    return kExitUsage;
}

struct RunArtifacts {
    json result;
    std::string trace_csv;
    std::string profile_csv;
    int exit_code = kExitOk;
};

RunArtifacts run_relax(const scheduler::NmParams& par, const std::string& preset, int grid_n,
                       int jmax, double floor, bool newton) {
    auto model = relax::make_model(preset);
    auto shock = relax::shock_endpoints(model, par.eps);
    auto grid = relax::default_grid(par.eps, grid_n);
    auto prof = relax::ce_profile(model, shock, grid, 0.1);
    auto inst = std::make_shared<relax::RelaxInstance>(model, prof, par);
    engine::EngineOptions opt;
    opt.jmax = jmax;
    opt.floor = floor > 0 ? floor : inst->default_floor();
    auto res = newton ? engine::run_newton(*inst, opt) : engine::run_nash_moser(*inst, opt);
    auto ubar = prof.base() + res.u;

    RunArtifacts art;
    art.exit_code = status_exit(res.status);
    std::ostringstream tcsv;
    res.trace.to_csv(tcsv);
    art.trace_csv = tcsv.str();
    std::ostringstream pcsv;
    io::write_profile_csv(pcsv, ubar, {"u", "v"});
    art.profile_csv = pcsv.str();

    json r;
    r["instance"] = "relax";
    r["preset"] = preset;
    r["method"] = newton ? "newton" : "nash-moser";
    r["status"] = engine::to_string(res.status);
    r["final_res"] = res.final_res;
    r["steps"] = res.trace.steps.size();
    r["floor"] = opt.floor;
    r["corrector_sup"] = res.u.linf();
    r["shock"] = {{"u_minus", shock.u_minus}, {"u_plus", shock.u_plus},
                  {"flux", shock.flux_value}};
    if (res.status == engine::SolveStatus::converged) {
        auto fit = relax::decay_fit(res.u, par.eps, 0.1);
        r["corrector_decay_rate"] = fit.rate();
    }
    art.result = r;
    return art;
}

RunArtifacts run_hyperb(const scheduler::NmParams& par, int k_order, const std::string& form,
                        int nx, int nt, bool rough, double rough_amp, std::uint64_t seed,
                        int jmax, double floor, bool newton) {
    hyperb::HypProblem prob;
    scheduler::NmParams p2 = par;
    if (rough) {
        prob = hyperb::rough_problem(par.eps, rough_amp, seed);
        p2 = hyperb::rough_params(par.eps);
    } else {
        auto f = form == "conservative" ? hyperb::HypProblem::Form::conservative
                                        : hyperb::HypProblem::Form::nonconservative;
        prob = hyperb::default_problem(par.eps, k_order, f, nx, nt);
        p2 = hyperb::default_params(par.eps, k_order);
    }
    hyperb::HypInstance inst(prob, p2);
    engine::EngineOptions opt;
    opt.jmax = jmax;
    opt.floor = floor > 0 ? floor : inst.default_floor();
    opt.override_feasibility = rough;
    auto res = newton ? engine::run_newton(inst, opt) : engine::run_nash_moser(inst, opt);

    RunArtifacts art;
    art.exit_code = status_exit(res.status);
    std::ostringstream tcsv;
    res.trace.to_csv(tcsv);
    art.trace_csv = tcsv.str();
    std::ostringstream scsv;
    io::write_spacetime_csv(scsv, res.u);
    art.profile_csv = scsv.str();

    json r;
    r["instance"] = "hyperb";
    r["form"] = rough ? "conservative" : form;
    r["rough"] = rough;
    r["method"] = newton ? "newton" : "nash-moser";
    r["status"] = engine::to_string(res.status);
    r["final_res"] = res.final_res;
    r["steps"] = res.trace.steps.size();
    r["floor"] = opt.floor;
    art.result = r;
    return art;
}

struct SweepRow {
    std::string observable;
    double slope = 0.0;
    double theoretical = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

double relax_observable(const std::string& name, const std::string& preset, double eps,
                        std::uint64_t seed) {
    auto model = relax::make_model(preset);
    auto shock = relax::shock_endpoints(model, eps);
    auto grid = relax::default_grid(eps);
    auto prof = relax::ce_profile(model, shock, grid, 0.1);
    if (name == "corrector" || name == "decay") {
        auto par = relax::default_params(eps);
        engine::EngineOptions opt;
        relax::RelaxInstance probe(model, prof, par);
        opt.floor = probe.default_floor();
        opt.jmax = 10;
        auto sol = relax::solve_profile(model, eps, par, opt);
        if (sol.result.status != engine::SolveStatus::converged)
            throw std::runtime_error("sweep member did not converge");
        if (name == "decay") return relax::decay_fit(sol.corrector, eps, 0.1).rate();
        return sol.corrector.linf();
    }
    if (name.rfind("ru_d", 0) == 0 || name.rfind("rv_d", 0) == 0) {
        const int k = name.back() - '0';
        const int comp = name[1] == 'u' ? 0 : 1;
        auto R = relax::ce_residual(model, prof);
        fnspace::GridFunction row(grid, 1);
        row.values().row(0) = R.values().row(comp);
        return fnspace::derivative(row, k).linf();
    }
    if (name == "opnorm") {
        relax::RelaxInstance inst(model, prof, relax::default_params(eps));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        double worst = 0;
        for (int trial = 0; trial < 12; ++trial) {
            fnspace::GridFunction F(grid, 2);
            for (int c = 0; c < 2; ++c) {
                const double a1 = gauss(rng), a2 = gauss(rng), ph = gauss(rng);
                const double w1 = 0.4 + std::abs(gauss(rng)), w2 = 0.4 + std::abs(gauss(rng));
                for (int i = 0; i < grid.n; ++i) {
                    const double xs = eps * grid.x(i);
                    const double env = std::exp(-0.25 * std::sqrt(xs * xs + 1.0));
                    F(c, i) = (a1 * std::cos(w1 * xs + ph) + a2 * std::sin(w2 * xs)) * env;
                }
            }
            auto U = relax::solve_linearized(model, prof, fnspace::GridFunction(grid, 2), F, 0.1);
            relax::RelaxInstance& ri = inst;
            worst = std::max(worst, ri.e_norm(U, 2.0) / ri.f_norm(F, 2.0));
        }
        return worst;
    }
    throw std::runtime_error("unknown observable '" + name + "'");
}

double hyperb_observable(const std::string& name, int k_order, double eps) {
    auto prob = hyperb::default_problem(eps, k_order);
    hyperb::HypInstance inst(prob, hyperb::default_params(eps, k_order));
    if (name == "residual0") return inst.f_norm(inst.residual(inst.zero()), 3.0);
    if (name == "final_error") {
        engine::EngineOptions opt;
        opt.floor = inst.default_floor();
        opt.jmax = 12;
        auto res = engine::run_nash_moser(inst, opt);
        if (res.status != engine::SolveStatus::converged)
            throw std::runtime_error("sweep member did not converge");
        double err = 0;
        const double epsk = std::pow(eps, k_order);
        for (int i = 0; i <= prob.nt; ++i)
            for (int j = 0; j < prob.xgrid.n; ++j)
                err = std::max(err,
                               std::abs(res.u.v(i, j) + epsk * std::cos(prob.xgrid.x(j))));
        return err;
    }
    throw std::runtime_error("unknown observable '" + name + "'");
}

std::pair<double, double> observable_theory(const std::string& name, int k_order) {
    if (name == "corrector") return {2.0, 0.3};
    if (name.rfind("ru_d", 0) == 0) return {4.0 + (name.back() - '0'), 0.4};
    if (name.rfind("rv_d", 0) == 0) return {3.0 + (name.back() - '0'), 0.4};
    if (name == "opnorm") return {-1.0, 0.3};
    if (name == "residual0") return {k_order + 1.0, 0.3};
    if (name == "final_error") return {k_order - 1.0, 0.5};
    return {0.0, 1e9};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nash-Moser iteration engine for singular-perturbation problems"};
    app.require_subcommand(1);

    // ---- schedule ----
    auto* sched = app.add_subcommand("schedule", "parameter ledger queries");
    sched->require_subcommand(1);
    ParamFlags sp;
    int jmax_thetas = 8;
    auto* sc_check = sched->add_subcommand("check", "feasibility verdict (exit 0 iff feasible)");
    sp.attach(sc_check);
    auto* sc_barp = sched->add_subcommand("barp", "minimal high-norm offset");
    sp.attach(sc_barp);
    auto* sc_window = sched->add_subcommand("window", "admissible alpha interval");
    sp.attach(sc_window);
    auto* sc_thetas = sched->add_subcommand("thetas", "cutoff schedule");
    sp.attach(sc_thetas);
    sc_thetas->add_option("--jmax", jmax_thetas, "schedule length");

    // ---- run ----
    auto* run = app.add_subcommand("run", "solve one instance");
    run->require_subcommand(1);
    ParamFlags rp;
    std::string preset = "generic", out_prefix, form = "nonconservative";
    int grid_n = 4097, jmax = 10, k_order = 4, nx = 128, nt = 100;
    double floor = 0.0, rough_amp = 0.25;
    std::uint64_t seed = 1;
    bool newton = false, rough = false;
    auto* run_relax_cmd = run->add_subcommand("relax", "relaxation shock profile");
    rp.attach(run_relax_cmd);
    run_relax_cmd->add_option("--preset", preset, "exact-jinxin or generic");
    run_relax_cmd->add_option("--grid-n", grid_n, "line grid points (odd)");
    run_relax_cmd->add_option("--jmax", jmax, "iteration budget");
    run_relax_cmd->add_option("--floor", floor, "residual floor (0: instance default)");
    run_relax_cmd->add_flag("--newton", newton, "plain iteration, no smoothing");
    run_relax_cmd->add_option("--out", out_prefix, "artifact path prefix");
    auto* run_hyp_cmd = run->add_subcommand("hyperb", "scaled quasilinear transport");
    ParamFlags hp;
    hp.attach(run_hyp_cmd, false);
    hp.p = hyperb::default_params(0.1, 4);
    run_hyp_cmd->add_option("--korder", k_order, "accuracy order of the approximate solution");
    run_hyp_cmd->add_option("--form", form, "nonconservative or conservative");
    run_hyp_cmd->add_option("--nx", nx, "spatial points");
    run_hyp_cmd->add_option("--nt", nt, "time steps");
    run_hyp_cmd->add_flag("--rough", rough, "rough-data variant");
    run_hyp_cmd->add_option("--rough-amp", rough_amp, "rough amplitude");
    run_hyp_cmd->add_option("--seed", seed, "rough-data seed");
    run_hyp_cmd->add_option("--jmax", jmax, "iteration budget");
    run_hyp_cmd->add_option("--floor", floor, "residual floor (0: instance default)");
    run_hyp_cmd->add_flag("--newton", newton, "plain iteration, no smoothing");
    run_hyp_cmd->add_option("--out", out_prefix, "artifact path prefix");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "eps sweep with slope fit");
    sweep->require_subcommand(1);
    std::string eps_list, observables = "corrector";
    std::string sweep_out;
    auto* sweep_relax_cmd = sweep->add_subcommand("relax", "relaxation observables");
    sweep_relax_cmd->add_option("--preset", preset, "model preset");
    sweep_relax_cmd->add_option("--eps", eps_list, "comma-separated eps values")->required();
    sweep_relax_cmd->add_option("--observable", observables, "comma-separated observables");
    sweep_relax_cmd->add_option("--seed", seed, "probe seed");
    sweep_relax_cmd->add_option("--out", sweep_out, "CSV output path");
    auto* sweep_hyp_cmd = sweep->add_subcommand("hyperb", "transport observables");
    sweep_hyp_cmd->add_option("--korder", k_order, "accuracy order");
    sweep_hyp_cmd->add_option("--eps", eps_list, "comma-separated eps values")->required();
    sweep_hyp_cmd->add_option("--observable", observables, "comma-separated observables");
    sweep_hyp_cmd->add_option("--out", sweep_out, "CSV output path");

    // ---- selftest ----
    auto* selftest = app.add_subcommand("selftest", "smoothing and interpolation report");
    int st_trials = 100, st_n = 2048;
    selftest->add_option("--trials", st_trials, "sample count");
    selftest->add_option("--n", st_n, "grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitUsage : kExitOk;
    }

    try {
        if (sched->parsed()) {
            sp.load_config();
            json out;
            out["config"] = sp.echo();
            if (sc_check->parsed()) {
                auto rep = scheduler::feasibility_report(sp.p);
                out["report"] = json::parse(rep.to_json());
                std::cout << out.dump(2) << "\n";
                return rep.feasible() ? kExitOk : kExitInfeasible;
            }
            if (sc_barp->parsed()) {
                auto pb = scheduler::pbar(sp.p);
                out["pbar"] = pb.pbar;
                out["n_star"] = pb.n_star;
                out["pbar_real"] = pb.pbar_real;
                out["n_star_real"] = pb.n_star_real;
            } else if (sc_window->parsed()) {
                auto w = scheduler::alpha_window(sp.p);
                out["lo"] = w.lo;
                out["hi"] = w.hi;
                out["empty"] = w.empty();
                out["alpha_in_window"] = w.contains(sp.p.alpha);
            } else if (sc_thetas->parsed()) {
                auto sch = scheduler::theta_schedule(sp.p, jmax_thetas);
                out["thetas"] = sch.thetas;
                out["start_ok"] = sch.cond10_ok;
                out["summable_ok"] = sch.summable_ok;
                out["truncated"] = sch.truncated;
                out["sum_ratio"] = sch.sum_ratio;
            }
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (run->parsed()) {
            RunArtifacts art;
            json cfg;
            if (run_relax_cmd->parsed()) {
                rp.load_config();
                cfg = rp.echo();
                cfg["preset"] = preset;
                cfg["grid_n"] = grid_n;
                cfg["jmax"] = jmax;
                cfg["newton"] = newton;
                art = run_relax(rp.p, preset, grid_n, jmax, floor, newton);
            } else {
                hp.load_config();
                cfg = hp.echo();
                cfg["korder"] = k_order;
                cfg["form"] = form;
                cfg["nx"] = nx;
                cfg["nt"] = nt;
                cfg["rough"] = rough;
                cfg["rough_amp"] = rough_amp;
                cfg["seed"] = seed;
                cfg["newton"] = newton;
                art = run_hyperb(hp.p, k_order, form, nx, nt, rough, rough_amp, seed, jmax,
                                 floor, newton);
            }
            art.result["config"] = cfg;
            if (!out_prefix.empty()) {
                write_file(out_prefix + "_trace.csv", art.trace_csv);
                write_file(out_prefix + "_profile.csv", art.profile_csv);
                write_file(out_prefix + "_result.json", art.result.dump(2) + "\n");
            }
            std::cout << art.result.dump(2) << "\n";
            return art.exit_code;
        }

        if (sweep->parsed()) {
            std::vector<double> epss;
            {
                std::stringstream ss(eps_list);
                std::string tok;
                while (std::getline(ss, tok, ',')) epss.push_back(std::stod(tok));
            }
            if (epss.size() < 3) {
                std::cerr << "sweep: need at least three eps values\n";
                return kExitUsage;
            }
            std::vector<std::string> names;
            {
                std::stringstream ss(observables);
                std::string tok;
                while (std::getline(ss, tok, ',')) names.push_back(tok);
            }
            const bool is_relax = sweep_relax_cmd->parsed();

            // parallel map over (observable, eps) members, capped by NM_THREADS
            const int cap = max_threads();
            std::map<std::pair<std::string, double>, double> values;
            std::vector<std::pair<std::string, double>> jobs;
            for (const auto& nm : names)
                for (double e : epss) jobs.emplace_back(nm, e);
            std::atomic<size_t> next{0};
            std::mutex mu;
            std::atomic<bool> failed{false};
            std::string fail_msg;
            auto worker = [&]() {
                for (;;) {
                    const size_t idx = next.fetch_add(1);
                    if (idx >= jobs.size()) return;
                    const auto& [nm, e] = jobs[idx];
                    try {
                        const double v = is_relax ? relax_observable(nm, preset, e, seed)
                                                  : hyperb_observable(nm, k_order, e);
                        std::lock_guard<std::mutex> lock(mu);
                        values[{nm, e}] = v;
                    } catch (const std::exception& ex) {
                        failed = true;
                        std::lock_guard<std::mutex> lock(mu);
                        fail_msg = ex.what();
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int t = 0; t < std::min<int>(cap, static_cast<int>(jobs.size())); ++t)
                pool.emplace_back(worker);
            for (auto& t : pool) t.join();

            std::ostringstream csv;
            csv << "observable,slope,theoretical,tolerance,pass\n";
            bool all_pass = true;
            for (const auto& nm : names) {
                std::vector<double> xs, ys;
                for (double e : epss) {
                    auto it = values.find({nm, e});
                    if (it == values.end()) continue;
                    xs.push_back(e);
                    ys.push_back(it->second);
                }
                if (xs.size() != epss.size()) { all_pass = false; continue; }
                const double slope = io::loglog_slope(xs, ys);
                auto [theory, tol] = observable_theory(nm, k_order);
                const bool pass = std::abs(slope - theory) <= tol;
                all_pass = all_pass && pass;
                csv << nm << "," << io::fmt(slope) << "," << io::fmt(theory) << ","
                    << io::fmt(tol) << "," << (pass ? 1 : 0) << "\n";
            }
            std::cout << csv.str();
            if (!sweep_out.empty()) write_file(sweep_out, csv.str());
            if (failed) {
                std::cerr << "sweep: member failed: " << fail_msg << "\n";
                return kExitStalled;
            }
            return all_pass ? kExitOk : kExitStalled;
        }

        if (selftest->parsed()) {
            auto grid = fnspace::Grid::periodic(st_n);
            auto rep = fnspace::smoothing_selftest(grid, fnspace::CutoffProfile{}, st_trials);
            json out;
            out["max_approx_const"] = rep.max_approx_const;
            out["max_gain_const"] = rep.max_gain_const;
            out["trials"] = rep.trials;
            out["pass"] = rep.pass;
            std::cout << out.dump(2) << "\n";
            return rep.pass ? kExitOk : kExitStalled;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStalled;
    }
    return kExitUsage;
}
