#include "mlnl/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace mlnl {

using nlohmann::json;

std::string ConfigError::join(const std::vector<std::string>& list) {
    std::ostringstream os;
    os << "config validation failed:";
    for (const auto& s : list) os << "\n  - " << s;
    return os.str();
}

Domain ExperimentConfig::make_domain() const {
    if (shape == "ball") return Domain::ball(dim, center, radius);
    if (shape == "ellipse") return Domain::ellipse(semi_a, semi_b);
    return Domain::star(star_r0, star_eps);
}

std::optional<Kernel> ExperimentConfig::make_kernel() const {
    if (kernel_family == "none") return std::nullopt;
    if (kernel_family == "fractional") {
        if (truncation) return make_fractional(alpha, lambda, *truncation, dim);
        return make_fractional(alpha, lambda, dim);
    }
    return make_subordinate(mu1, mu2, dim);
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where, std::vector<std::string>& issues) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            issues.push_back("unknown key '" + it.key() + "' in " + where);
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> issues;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }

    ExperimentConfig c;
    check_keys(j,
               {"schema_version", "name", "domain", "kernel", "a", "A0", "C0",
                "problem", "grid", "diagnostics", "output_dir", "seed",
                "workers", "expect"},
               "top level", issues);

    if (j.contains("schema_version")) c.schema_version = j["schema_version"];
    if (j.contains("name")) c.name = j["name"];

    if (!j.contains("domain")) {
        issues.push_back("missing section 'domain'");
    } else {
        const json& d = j["domain"];
        check_keys(d,
                   {"shape", "dim", "center", "radius", "semi_axes", "r0",
                    "eps"},
                   "domain", issues);
        if (d.contains("shape")) c.shape = d["shape"];
        if (c.shape != "ball" && c.shape != "ellipse" && c.shape != "star")
            issues.push_back("domain.shape must be ball, ellipse or star");
        if (d.contains("dim")) c.dim = d["dim"];
        if (c.dim != 1 && c.dim != 2)
            issues.push_back("domain.dim must be 1 or 2");
        if (d.contains("center")) {
            auto v = d["center"].get<std::vector<double>>();
            c.center = {v.size() > 0 ? v[0] : 0.0, v.size() > 1 ? v[1] : 0.0};
        }
        if (d.contains("radius")) c.radius = d["radius"];
        if (c.radius <= 0.0) issues.push_back("domain.radius must be positive");
        if (d.contains("semi_axes")) {
            auto v = d["semi_axes"].get<std::vector<double>>();
            if (v.size() != 2) {
                issues.push_back("domain.semi_axes must have 2 entries");
            } else {
                c.semi_a = v[0];
                c.semi_b = v[1];
            }
        }
        if (d.contains("r0")) c.star_r0 = d["r0"];
        if (d.contains("eps")) c.star_eps = d["eps"].get<std::vector<double>>();
    }

    bool needs_kernel = true;
    if (j.contains("a")) c.a = j["a"];
    if (j.contains("A0")) c.A0 = j["A0"];
    if (j.contains("C0")) c.C0 = j["C0"];
    if (c.a == 0.0) needs_kernel = false;
    if (!(c.a >= 0.0 && c.a <= c.A0))
        issues.push_back("a must lie in [0, A0]");

    if (!j.contains("kernel")) {
        if (needs_kernel) issues.push_back("missing section 'kernel' (a > 0)");
    } else {
        const json& k = j["kernel"];
        check_keys(k, {"family", "alpha", "lambda", "truncation", "mu1", "mu2"},
                   "kernel", issues);
        if (k.contains("family")) c.kernel_family = k["family"];
        if (c.kernel_family != "none" && c.kernel_family != "fractional" &&
            c.kernel_family != "subordinate")
            issues.push_back("kernel.family must be none, fractional or subordinate");
        if (k.contains("alpha")) c.alpha = k["alpha"];
        if (c.kernel_family == "fractional" &&
            !(c.alpha > 0.0 && c.alpha < 2.0))
            issues.push_back("alpha must lie in (0,2)");
        if (k.contains("lambda")) c.lambda = k["lambda"];
        if (c.kernel_family == "fractional" && c.lambda <= 0.0)
            issues.push_back("kernel.lambda must be positive");
        if (k.contains("truncation") && !k["truncation"].is_null())
            c.truncation = k["truncation"].get<double>();
        if (k.contains("mu1")) c.mu1 = k["mu1"];
        if (k.contains("mu2")) c.mu2 = k["mu2"];
        if (c.kernel_family == "subordinate" &&
            !(c.mu1 > 0.0 && c.mu1 <= c.mu2 && c.mu2 < 1.0))
            issues.push_back("subordinate kernel needs 0 < mu1 <= mu2 < 1");
    }
    if (needs_kernel && c.kernel_family == "none")
        issues.push_back("a > 0 requires kernel.family != none");

    if (j.contains("problem")) {
        const json& p = j["problem"];
        check_keys(p, {"type", "f_const", "f_linear", "H_coeff", "drifts"},
                   "problem", issues);
        if (p.contains("type")) c.problem = p["type"];
        if (c.problem != "linear" && c.problem != "semilinear" &&
            c.problem != "hjb" && c.problem != "serrin")
            issues.push_back("problem.type must be linear, semilinear, hjb or serrin");
        if (p.contains("f_const")) c.f_const = p["f_const"];
        if (p.contains("f_linear")) c.f_linear = p["f_linear"];
        if (p.contains("H_coeff")) c.H_coeff = p["H_coeff"];
        if (p.contains("drifts")) {
            for (const auto& b : p["drifts"]) {
                auto v = b.get<std::vector<double>>();
                c.hjb_drifts.push_back(
                    {v.size() > 0 ? v[0] : 0.0, v.size() > 1 ? v[1] : 0.0});
            }
        }
        if (c.problem == "hjb" && c.hjb_drifts.empty())
            issues.push_back("problem.type hjb requires a nonempty drifts list");
        for (Pt b : c.hjb_drifts)
            if (norm(b) > c.C0 + 1e-12)
                issues.push_back("hjb drift exceeds the bound C0");
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, {"h", "kappa"}, "grid", issues);
        if (g.contains("h")) c.h = g["h"];
        if (g.contains("kappa")) c.kappa = g["kappa"];
    }
    if (!(c.h > 0.0)) issues.push_back("grid.h must be positive");
    if (!(c.kappa > 0.0 && c.kappa < 1.0 / 16.0))
        issues.push_back("grid.kappa must lie in (0, 1/16)");

    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        check_keys(d, {"regularity", "barriers", "overdetermined"},
                   "diagnostics", issues);
        if (d.contains("regularity")) c.diag_regularity = d["regularity"];
        if (d.contains("barriers")) c.diag_barriers = d["barriers"];
        if (d.contains("overdetermined"))
            c.diag_overdetermined = d["overdetermined"];
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"];
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j["workers"];
    if (c.workers < 1) issues.push_back("workers must be >= 1");
    if (j.contains("expect"))
        for (auto it = j["expect"].begin(); it != j["expect"].end(); ++it)
            c.expectations[it.key()] = it.value().get<double>();

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return c;
}

std::string render(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["name"] = c.name;
    json d;
    d["shape"] = c.shape;
    d["dim"] = c.dim;
    d["center"] = {c.center.x, c.center.y};
    d["radius"] = c.radius;
    d["semi_axes"] = {c.semi_a, c.semi_b};
    d["r0"] = c.star_r0;
    d["eps"] = c.star_eps;
    j["domain"] = d;
    json k;
    k["family"] = c.kernel_family;
    k["alpha"] = c.alpha;
    k["lambda"] = c.lambda;
    if (c.truncation)
        k["truncation"] = *c.truncation;
    else
        k["truncation"] = nullptr;
    k["mu1"] = c.mu1;
    k["mu2"] = c.mu2;
    j["kernel"] = k;
    j["a"] = c.a;
    j["A0"] = c.A0;
    j["C0"] = c.C0;
    json p;
    p["type"] = c.problem;
    p["f_const"] = c.f_const;
    p["f_linear"] = c.f_linear;
    p["H_coeff"] = c.H_coeff;
    json drifts = json::array();
    for (Pt b : c.hjb_drifts) drifts.push_back({b.x, b.y});
    p["drifts"] = drifts;
    j["problem"] = p;
    j["grid"] = {{"h", c.h}, {"kappa", c.kappa}};
    j["diagnostics"] = {{"regularity", c.diag_regularity},
                        {"barriers", c.diag_barriers},
                        {"overdetermined", c.diag_overdetermined}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    json e;
    for (const auto& [key, val] : c.expectations) e[key] = val;
    j["expect"] = e;
    return j.dump(2) + "\n";
}

} // namespace mlnl
