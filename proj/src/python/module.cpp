#include "nmiter/hyperb.hpp"
#include "nmiter/io.hpp"
#include "nmiter/relax.hpp"
#include "nmiter/selftest.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nmiter;

namespace {

scheduler::NmParams params_from_kwargs(const py::kwargs& kw) {
    auto p = relax::default_params(0.1);
    auto set = [&](const char* name, double& slot) {
        if (kw.contains(name)) slot = kw[name].cast<double>();
    };
    set("k", p.k); set("kappa", p.kappa); set("gamma0", p.gamma0); set("gamma", p.gamma);
    set("m", p.m); set("r", p.r); set("rprime", p.rprime);
    set("s0", p.s0); set("sbar", p.sbar); set("s", p.s);
    set("alpha", p.alpha); set("N", p.N); set("p", p.p); set("zeta", p.zeta);
    set("theta0", p.theta0); set("eps", p.eps); set("margin", p.margin);
    return p;
}

py::array_t<double> to_numpy(const Eigen::ArrayXd& a) {
    py::array_t<double> out(a.size());
    std::copy(a.data(), a.data() + a.size(), out.mutable_data());
    return out;
}

py::array_t<double> row_to_numpy(const fnspace::GridFunction& f, int comp) {
    py::array_t<double> out(f.n());
    for (int i = 0; i < f.n(); ++i) out.mutable_data()[i] = f(comp, i);
    return out;
}

py::dict trace_to_dict(const engine::IterationTrace& tr) {
    py::list steps;
    for (const auto& r : tr.steps) {
        py::dict s;
        s["j"] = r.j;
        s["theta"] = r.theta;
        s["res_s"] = r.res_s;
        s["v_sq"] = r.v_sq;
        s["u_sq"] = r.u_sq;
        s["u_sp"] = r.u_sp;
        s["c1"] = r.c1;
        s["c2"] = py::make_tuple(r.c2i, r.c2ii, r.c2iii);
        steps.append(s);
    }
    py::dict out;
    out["steps"] = steps;
    out["q_index"] = tr.q_index;
    out["p_index"] = tr.p_index;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nash-Moser iteration engine for singular-perturbation problems";

    m.def("check_feasibility", [](const py::kwargs& kw) {
        auto rep = scheduler::feasibility_report(params_from_kwargs(kw));
        py::dict out;
        out["feasible"] = rep.feasible();
        out["ass_k_ok"] = rep.ass_k_ok;
        out["alpha_lo"] = rep.window.lo;
        out["alpha_hi"] = rep.window.hi;
        out["alpha_in_window"] = rep.alpha_in_window;
        out["beta"] = rep.beta;
        out["N0"] = rep.N0;
        if (rep.pbar) {
            out["pbar"] = rep.pbar->pbar;
            out["n_star"] = rep.pbar->n_star;
        }
        return out;
    });

    m.def("pbar", [](const py::kwargs& kw) {
        auto res = scheduler::pbar(params_from_kwargs(kw));
        py::dict out;
        out["pbar"] = res.pbar;
        out["n_star"] = res.n_star;
        out["pbar_real"] = res.pbar_real;
        out["n_star_real"] = res.n_star_real;
        return out;
    });

    m.def("alpha_window", [](const py::kwargs& kw) {
        auto w = scheduler::alpha_window(params_from_kwargs(kw));
        return py::make_tuple(w.lo, w.hi);
    });

    m.def(
        "theta_schedule",
        [](int jmax, const py::kwargs& kw) {
            auto sch = scheduler::theta_schedule(params_from_kwargs(kw), jmax);
            py::dict out;
            out["thetas"] = sch.thetas;
            out["start_ok"] = sch.cond10_ok;
            out["summable_ok"] = sch.summable_ok;
            out["truncated"] = sch.truncated;
            return out;
        },
        py::arg("jmax"));

    m.def(
        "smoothing_selftest",
        [](int n, int trials, double eps, std::uint64_t seed) {
            auto rep = fnspace::smoothing_selftest(fnspace::Grid::periodic(n),
                                                   fnspace::CutoffProfile{}, trials, eps, seed);
            py::dict out;
            out["max_approx_const"] = rep.max_approx_const;
            out["max_gain_const"] = rep.max_gain_const;
            out["pass"] = rep.pass;
            out["trials"] = rep.trials;
            return out;
        },
        py::arg("n") = 2048, py::arg("trials") = 100, py::arg("eps") = 0.5,
        py::arg("seed") = 0);

    m.def(
        "ce_profile",
        [](const std::string& preset, double eps, int grid_n) {
            auto model = relax::make_model(preset);
            auto sd = relax::shock_endpoints(model, eps);
            auto grid = relax::default_grid(eps, grid_n);
            auto prof = relax::ce_profile(model, sd, grid, 0.1);
            auto R = relax::ce_residual(model, prof);
            py::dict out;
            Eigen::ArrayXd xs(grid.n);
            for (int i = 0; i < grid.n; ++i) xs[i] = grid.x(i);
            out["x"] = to_numpy(xs);
            out["u"] = to_numpy(prof.u);
            out["v"] = to_numpy(prof.v);
            out["residual_u"] = row_to_numpy(R, 0);
            out["residual_v"] = row_to_numpy(R, 1);
            out["u_minus"] = sd.u_minus;
            out["u_plus"] = sd.u_plus;
            return out;
        },
        py::arg("preset") = "generic", py::arg("eps") = 0.1, py::arg("grid_n") = 4097);

    m.def(
        "solve_relax",
        [](const std::string& preset, double eps, int grid_n, int jmax, bool newton,
           double floor) {
            auto model = relax::make_model(preset);
            auto sd = relax::shock_endpoints(model, eps);
            auto grid = relax::default_grid(eps, grid_n);
            auto prof = relax::ce_profile(model, sd, grid, 0.1);
            auto par = relax::default_params(eps);
            auto inst = std::make_shared<relax::RelaxInstance>(model, prof, par);
            engine::EngineOptions opt;
            opt.jmax = jmax;
            opt.floor = floor > 0 ? floor : inst->default_floor();
            auto res = newton ? engine::run_newton(*inst, opt)
                              : engine::run_nash_moser(*inst, opt);
            auto ubar = prof.base() + res.u;
            py::dict out;
            out["status"] = engine::to_string(res.status);
            out["final_res"] = res.final_res;
            out["floor"] = opt.floor;
            out["corrector_sup"] = res.u.linf();
            Eigen::ArrayXd xs(grid.n);
            for (int i = 0; i < grid.n; ++i) xs[i] = grid.x(i);
            out["x"] = to_numpy(xs);
            out["u"] = row_to_numpy(ubar, 0);
            out["v"] = row_to_numpy(ubar, 1);
            out["corrector_u"] = row_to_numpy(res.u, 0);
            out["corrector_v"] = row_to_numpy(res.u, 1);
            out["trace"] = trace_to_dict(res.trace);
            return out;
        },
        py::arg("preset") = "generic", py::arg("eps") = 0.1, py::arg("grid_n") = 4097,
        py::arg("jmax") = 10, py::arg("newton") = false, py::arg("floor") = 0.0);

    m.def(
        "solve_transport",
        [](double eps, int k_order, const std::string& form, int nx, int nt, bool newton,
           bool rough, double rough_amp, std::uint64_t seed) {
            hyperb::HypProblem prob;
            scheduler::NmParams par;
            if (rough) {
                prob = hyperb::rough_problem(eps, rough_amp, seed);
                par = hyperb::rough_params(eps);
            } else {
                auto f = form == "conservative" ? hyperb::HypProblem::Form::conservative
                                                : hyperb::HypProblem::Form::nonconservative;
                prob = hyperb::default_problem(eps, k_order, f, nx, nt);
                par = hyperb::default_params(eps, k_order);
            }
            hyperb::HypInstance inst(prob, par);
            engine::EngineOptions opt;
            opt.jmax = rough ? 16 : 12;
            opt.floor = rough ? 5e-9 : inst.default_floor();
            opt.override_feasibility = rough;
            auto res =
                newton ? engine::run_newton(inst, opt) : engine::run_nash_moser(inst, opt);
            py::dict out;
            out["status"] = engine::to_string(res.status);
            out["final_res"] = res.final_res;
            out["residual0"] = inst.f_norm(inst.residual(inst.zero()), par.s);
            out["trace"] = trace_to_dict(res.trace);
            py::array_t<double> u({res.u.v.rows(), res.u.v.cols()});
            for (long i = 0; i < res.u.v.rows(); ++i)
                for (long j = 0; j < res.u.v.cols(); ++j)
                    u.mutable_at(i, j) = res.u.v(i, j);
            out["corrector"] = u;
            return out;
        },
        py::arg("eps") = 0.1, py::arg("k_order") = 4, py::arg("form") = "nonconservative",
        py::arg("nx") = 128, py::arg("nt") = 100, py::arg("newton") = false,
        py::arg("rough") = false, py::arg("rough_amp") = 0.25, py::arg("seed") = 1);

    m.def("loglog_slope", [](const std::vector<double>& x, const std::vector<double>& y) {
        return io::loglog_slope(x, y);
    });
}
