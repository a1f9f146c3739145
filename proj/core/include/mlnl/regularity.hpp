#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/grid.hpp"
#include "mlnl/quadrature.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mlnl {

/// Max difference quotient over axis-neighbor pairs plus a sampled set of
/// long-range pairs.
double lipschitz_norm(const GridFunction& u, std::uint64_t seed = 12345);

/// v = u/delta at nodes with delta >= h; nodes with 0 < delta < h get a
/// one-sided 2-point linear extrapolation along the inward normal and are
/// flagged. Exterior nodes stay 0.
struct QuotientField {
    GridFunction v;
    std::vector<int> extrapolated; // lattice linear indices
};
QuotientField quotient_field(const GridFunction& u, const Domain& dom);

/// sup-inf oscillation of v over the dyadic boxes D_{R_k}(x0), R_k = rho1/4^k,
/// and the fitted decay exponent tau.
struct OscillationDecay {
    std::vector<double> radii;
    std::vector<double> osc;
    std::vector<int> node_counts;
    double tau_fit = 0.0;
    double r2 = 0.0;
    bool monotone = true;  // osc_k non-increasing
    bool constant_field = false; // all osc 0: tau reported as +inf sentinel
    int levels_used = 0;
    bool truncated = false; // deepest levels dropped for lack of nodes
};
OscillationDecay oscillation_decay(const GridFunction& v, const Domain& dom,
                                   Pt x0, double rho1, int levels,
                                   int min_nodes = 20);

/// sup/inf of v over the D+ nodes of a collar region. Requires v > 0 there;
/// otherwise the flagged infinite ratio is returned.
struct HarnackRatio {
    double ratio = 1.0;
    double sup = 0.0;
    double inf = 0.0;
    bool positive = true;
    int nodes = 0;
};
HarnackRatio boundary_harnack(const GridFunction& v, const CollarRegion& region,
                              const GridFunction& delta, double min_delta);

/// Pairwise Holder analysis: bucket |g(x)-g(y)| by dyadic distance and fit
/// the slope of log(max quotient) against log(distance). Buckets with fewer
/// than `min_pairs` samples are dropped.
struct HolderFit {
    double exponent = 0.0;
    double r2 = 0.0;
    bool saturated = false; // all quotients ~ 0 (affine data)
    std::vector<double> bucket_dist;
    std::vector<double> bucket_max;
};

/// Gradient Holder exponent: central differences at nodes with
/// delta >= 2h, then the pairwise fit above on Du.
HolderFit gradient_holder_fit(const GridFunction& u, const Domain& dom,
                              std::uint64_t seed = 12345, int pair_samples = 200000,
                              int min_pairs = 30);

/// Same machinery applied to a scalar field (used for the global u/delta
/// Holder exponent kappa).
HolderFit field_holder_fit(const GridFunction& v, const Domain& dom,
                           double min_delta, std::uint64_t seed = 12345,
                           int pair_samples = 200000, int min_pairs = 30);

/// max |Dv| over Omega_sigma = {delta >= sigma} for a ladder of sigma and
/// the fitted exponent of the growth law.
struct GradientScaling {
    std::vector<double> sigma;
    std::vector<double> max_grad;
    double exponent = 0.0;
    double r2 = 0.0;
    bool all_zero = false;
    std::string to_csv() const;
};
GradientScaling interior_gradient_scaling(const GridFunction& v,
                                          const Domain& dom,
                                          const std::vector<double>& sigmas);

/// Aggregate report for the regularity suite.
struct RegularityReport {
    double lipschitz_estimate = 0.0;
    double tau_fit = 0.0;
    double tau_r2 = 0.0;
    bool osc_monotone = true;
    double kappa_fit = 0.0;
    double kappa_r2 = 0.0;
    double gamma_fit = 0.0;
    double gamma_r2 = 0.0;
    struct HarnackRow {
        double scale;
        double sup;
        double inf;
        double ratio;
    };
    std::vector<HarnackRow> harnack_table;
    double harnack_max_ratio = 0.0;
    GradientScaling sigma_scaling;
    double sigma_exponent = 0.0;
    std::string to_json() const;
    std::string harnack_csv() const; // columns scale, sup, inf, osc, ratio
};

/// Runs the full ladder of diagnostics on a solved field: quotient field,
/// pooled oscillation decay over several boundary anchors, Harnack ratios
/// across a dyadic scale ladder, Holder fits, and the interior gradient
/// scaling.
struct RegularitySuiteOptions {
    int anchors = 8;
    double rho1 = -1.0;          // default: min(0.5, collar radius)
    int levels = 4;
    double harnack_R0 = 0.24;
    int harnack_scales = 4;
    double kappa_param = 0.05;
    std::vector<double> sigmas;  // default {4h, 8h, 16h, 32h}
    std::uint64_t seed = 12345;
};
RegularityReport regularity_suite(const GridFunction& u, const Domain& dom,
                                  const RegularitySuiteOptions& opt = {});

} // namespace mlnl
