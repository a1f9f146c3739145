#include "mlnl/runner.hpp"

#include "mlnl/barriers.hpp"
#include "mlnl/nonlocal.hpp"
#include "mlnl/overdetermined.hpp"
#include "mlnl/regularity.hpp"
#include "mlnl/runtime.hpp"
#include "mlnl/solver.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mlnl {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << content;
}

namespace {

std::string solution_csv(const GridFunction& u, const Domain& dom) {
    std::ostringstream os;
    os.precision(17);
    os << "x,y,value\n";
    const auto& lat = u.lat;
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt p = lat.point(i, j);
            if (dom.signed_distance(p) <= 0.0) continue;
            os << p.x << "," << p.y << "," << u.at(i, j) << "\n";
        }
    }
    return os.str();
}

json solve_report_json(const SolveReport& rep) {
    json j;
    j["schema_version"] = 1;
    j["max_interior_residual"] = rep.max_interior_residual;
    j["iterations"] = rep.iterations;
    j["max_principle_certificate"] = rep.max_principle_certificate;
    j["certificate_witness"] = rep.certificate_witness;
    j["damping_history"] = rep.damping_history;
    j["residual_history"] = rep.residual_history;
    if (!rep.normal_trace.empty()) {
        j["mean_normal_derivative"] = rep.mean_normal_derivative;
        j["normal_derivative_dev"] = rep.normal_derivative_dev;
    }
    return j;
}

} // namespace

int run_kernel_check(const ExperimentConfig& c) {
    auto k = c.make_kernel();
    if (!k) throw ConfigError({"check-kernel requires kernel.family != none"});
    auto rep = check_assumption(*k, 10000, c.seed);
    write_file(c.output_dir + "/kernel_check.json", rep.to_json() + "\n");
    json s;
    s["schema_version"] = 1;
    s["name"] = c.name;
    s["max_ratio_a"] = rep.max_ratio_a;
    s["rho_estimate"] = rep.rho_estimate;
    s["violations"] = rep.violations;
    s["flags"] = {{"assumption_a", rep.violations == 0 ? "pass" : "fail"}};
    write_file(c.output_dir + "/summary.json", s.dump(2) + "\n");
    return rep.violations == 0 ? 0 : 1;
}

int run(const ExperimentConfig& c) {
    set_worker_count(c.workers);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["completed"] = json::array();
    auto note = [&](const std::string& stage) {
        manifest["completed"].push_back(stage);
    };

    json summary;
    summary["schema_version"] = 1;
    summary["name"] = c.name;
    json flags;

    try {
        Domain dom = c.make_domain();
        auto kernel = c.make_kernel();
        const Kernel* kp = kernel ? &*kernel : nullptr;
        DiscreteOperator A =
            DiscreteOperator::assemble(dom, kp, c.a, c.h, c.C0, c.A0);
        note("assemble");

        double fc = c.f_const, fl = c.f_linear, Hc = c.H_coeff;
        auto Hfun = [Hc](double s) { return Hc * s; };
        auto ffun = [fc, fl](double u) { return fc + fl * u; };

        SolveReport rep;
        if (c.problem == "linear") {
            GridFunction f(A.lattice(), 0.0);
            for (int r = 0; r < A.rows(); ++r)
                f.v[static_cast<size_t>(
                    A.nodes().interior[static_cast<size_t>(r)])] = fc;
            rep = solve_linear(A, f);
        } else if (c.problem == "semilinear") {
            rep = solve_semilinear(A, Hfun, ffun);
        } else if (c.problem == "hjb") {
            HJBProblem prob;
            for (Pt b : c.hjb_drifts) {
                HJBControl ctl;
                ctl.b = [b](Pt) { return b; };
                ctl.f = [fc](Pt) { return fc; };
                prob.controls.push_back({ctl});
            }
            rep = solve_hjb(A, prob);
        } else { // serrin
            rep = serrin_solve(A, Hfun, ffun);
        }
        note("solve");

        write_file(c.output_dir + "/solution.csv", solution_csv(rep.u, dom));
        write_file(c.output_dir + "/solve_report.json",
                   solve_report_json(rep).dump(2) + "\n");
        note("solution.csv");

        double u0 = rep.u.interp(dom.center());
        summary["u0"] = u0;
        summary["umax"] = rep.u.max_abs();
        summary["residual"] = rep.max_interior_residual;
        summary["iterations"] = rep.iterations;

        if (c.problem == "serrin" || c.diag_overdetermined) {
            SolveReport* sr = &rep;
            SolveReport serrin_rep;
            if (c.problem != "serrin") {
                serrin_rep = serrin_solve(A, Hfun, ffun);
                sr = &serrin_rep;
            }
            summary["normal_dev"] = sr->normal_derivative_dev;
            summary["normal_mean"] = sr->mean_normal_derivative;

            // moving-plane scan along e1 and the symmetry report
            std::vector<double> lambdas;
            double l_max = dom.diameter() / 2.0;
            for (double l = l_max; l > -1e-12; l -= c.h) lambdas.push_back(l);
            auto scan = moving_plane_scan(sr->u, dom, {1.0, 0.0}, lambdas);
            write_file(c.output_dir + "/scan.csv", scan.to_csv());
            auto sym = symmetry_report(sr->u, dom);
            sym.normal_derivative_dev = sr->normal_derivative_dev;
            write_file(c.output_dir + "/symmetry.json", sym.to_json() + "\n");
            summary["lambda0"] = scan.lambda0;
            summary["scan_min_v"] = scan.worst_min_v;
            summary["angular_max_dev"] = sym.angular_max_dev;
            summary["radial_monotone_violations"] = sym.monotonicity_violations;
            if (c.expectations.count("normal_dev_max"))
                flags["serrin_constancy"] =
                    sr->normal_derivative_dev <=
                            c.expectations.at("normal_dev_max")
                        ? "pass"
                        : "fail";
            note("overdetermined");
        }

        if (c.diag_regularity) {
            RegularitySuiteOptions opt;
            opt.seed = c.seed;
            opt.kappa_param = c.kappa;
            auto reg = regularity_suite(rep.u, dom, opt);
            write_file(c.output_dir + "/regularity.json", reg.to_json() + "\n");
            write_file(c.output_dir + "/scales.csv", reg.harnack_csv());
            summary["tau_fit"] = reg.tau_fit;
            summary["tau_r2"] = reg.tau_r2;
            summary["kappa_fit"] = reg.kappa_fit;
            summary["gamma_fit"] = reg.gamma_fit;
            summary["gamma_r2"] = reg.gamma_r2;
            summary["harnack_max_ratio"] = reg.harnack_max_ratio;
            summary["osc_monotone"] = reg.osc_monotone;
            summary["sigma_exponent"] = reg.sigma_exponent;
            summary["lipschitz_estimate"] = reg.lipschitz_estimate;
            if (c.expectations.count("tau_min"))
                flags["tau_positive"] =
                    reg.tau_fit > c.expectations.at("tau_min") ? "pass" : "fail";
            if (c.expectations.count("kappa_min"))
                flags["kappa_positive"] = reg.kappa_fit > c.expectations.at("kappa_min")
                                              ? "pass"
                                              : "fail";
            if (c.expectations.count("gamma_min"))
                flags["gamma_positive"] = reg.gamma_fit > c.expectations.at("gamma_min")
                                              ? "pass"
                                              : "fail";
            if (c.expectations.count("harnack_max"))
                flags["harnack_bounded"] =
                    reg.harnack_max_ratio <= c.expectations.at("harnack_max")
                        ? "pass"
                        : "fail";
            note("regularity");
        }

        if (c.diag_barriers && kernel) {
            LDeltaOptions lo;
            auto prof = l_delta_profile(dom, *kernel, std::max(c.a, 1.0), lo);
            write_file(c.output_dir + "/ldelta.csv", prof.to_csv());
            summary["ldelta_exponent"] = prof.fitted_exponent;
            summary["ldelta_r2"] = prof.fit_r2;
            summary["ldelta_log_r2"] = prof.log_r2;

            double rb = 0.25;
            auto barrier = build_exp_barrier(rb, dom.dim(), c.A0, *kernel);
            auto brep = verify_supersolution(barrier, *kernel,
                                             std::max(c.a, 1.0), rb / 64.0);
            write_file(c.output_dir + "/barrier_report.json",
                       brep.to_json() + "\n");
            summary["barrier_max_violation"] = brep.max_violation;
            note("barriers");
        }

        if (c.expectations.count("u0") && c.expectations.count("u0_tol"))
            flags["u0_ok"] = std::abs(u0 - c.expectations.at("u0")) <=
                                     c.expectations.at("u0_tol")
                                 ? "pass"
                                 : "fail";

        summary["flags"] = flags;
        write_file(c.output_dir + "/summary.json", summary.dump(2) + "\n");
        note("summary.json");
        manifest["status"] = "complete";
        write_file(c.output_dir + "/MANIFEST.json", manifest.dump(2) + "\n");

        for (auto it = flags.begin(); it != flags.end(); ++it)
            if (it.value() == "fail") return 2;
        return 0;
    } catch (const std::exception& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        write_file(c.output_dir + "/MANIFEST.json", manifest.dump(2) + "\n");
        return 1;
    }
}

} // namespace mlnl
