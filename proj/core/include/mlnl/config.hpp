#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/kernels.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlnl {

struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;
    explicit ConfigError(std::vector<std::string> list)
        : std::runtime_error(join(list)), issues(std::move(list)) {}
    static std::string join(const std::vector<std::string>& list);
};

/// One experiment: a domain, a kernel, a problem, a grid, and diagnostic
/// toggles. Parsed from a JSON document; every numeric range is validated at
/// parse time and all violations are reported together.
struct ExperimentConfig {
    int schema_version = 1;
    std::string name = "experiment";

    // domain
    std::string shape = "ball"; // ball | ellipse | star
    int dim = 2;
    Pt center{0.0, 0.0};
    double radius = 1.0;
    double semi_a = 1.3, semi_b = 1.0;
    double star_r0 = 1.0;
    std::vector<double> star_eps;

    // kernel
    std::string kernel_family = "none"; // none | fractional | subordinate
    double alpha = 1.5;
    double lambda = 1.0;
    std::optional<double> truncation;
    double mu1 = 0.3, mu2 = 0.7;

    // operator
    double a = 0.0;
    double A0 = 1.0;
    double C0 = 1.0;

    // problem
    std::string problem = "linear"; // linear | semilinear | hjb | serrin
    double f_const = -1.0;
    double f_linear = 0.0;  // f(u) = f_const + f_linear * u
    double H_coeff = 0.0;   // H(s) = H_coeff * s
    std::vector<Pt> hjb_drifts;

    // grid and diagnostics
    double h = 1.0 / 64.0;
    double kappa = 0.05;
    bool diag_regularity = false;
    bool diag_barriers = false;
    bool diag_overdetermined = false;

    std::string output_dir = "out";
    std::uint64_t seed = 12345;
    int workers = 1;

    // optional expectations checked into summary.json pass/fail flags
    std::map<std::string, double> expectations;

    Domain make_domain() const;
    std::optional<Kernel> make_kernel() const;
};

/// Parse the JSON document; throws ConfigError carrying every validation
/// issue (unknown keys, range violations, missing sections).
ExperimentConfig parse_config(const std::string& text);

/// Render back to JSON; parse_config(render(c)) round-trips.
std::string render(const ExperimentConfig& c);

} // namespace mlnl
