#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/grid.hpp"
#include "mlnl/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mlnl {

/// Reflection across the hyperplane T = {x.e = lambda}:
/// x -> x - 2(x.e)e + 2 lambda e. Fixes T pointwise; an involution.
struct ReflectionFrame {
    Pt e{1.0, 0.0}; // unit direction
    double lambda = 0.0;

    Pt reflect(Pt x) const {
        double c = dot(x, e);
        return x - (2.0 * c) * e + (2.0 * lambda) * e;
    }
    bool in_halfspace(Pt x) const { return dot(x, e) > lambda; }
};

Pt reflect(const ReflectionFrame& f, Pt x);

/// Solve the overdetermined-candidate problem L u + H(|Du|) = f(u) and
/// measure the constancy of the inward normal derivative over the boundary.
/// Rejects kernels that are not radial and strictly decreasing (the symmetry
/// theorem's hypothesis) and solutions that fail u > 0 inside.
SolveReport serrin_solve(const DiscreteOperator& A,
                         const std::function<double(double)>& H,
                         const std::function<double(double)>& f,
                         int boundary_samples = 256, double tol = 1e-8);

/// Full state of the plane at one lambda: the reflected cap, the
/// anti-symmetric difference v(x) = u(x) - u(xbar) on it, and the detected
/// geometric situation.
struct MovingPlaneState {
    double lambda = 0.0;
    Pt e{1.0, 0.0};
    std::vector<int> cap_nodes; // lattice indices of D_lambda
    GridFunction v;             // u(x) - u(xbar), zero off the cap
    double min_v = 0.0;
    enum class Situation { None, InternalTouch, OrthogonalTangency };
    Situation situation = Situation::None;
};

MovingPlaneState moving_plane_state(const GridFunction& u, const Domain& dom,
                                    Pt e, double lambda);

/// One lambda step of the moving-plane scan.
struct ScanRow {
    double lambda = 0.0;
    double min_v = 0.0;
    bool situation_a = false;
    bool situation_b = false;
    int cap_nodes = 0;
};

struct MovingPlaneScan {
    std::vector<ScanRow> rows;
    double lambda0 = 0.0;      // first lambda where a situation triggers
    bool triggered = false;
    bool min_v_nonneg = true;  // min v >= -tol for all lambda > lambda0
    double worst_min_v = 0.0;
    std::string to_csv() const; // columns lambda, min_v, situation_a, situation_b
};

/// Scan descending lambda values: build the anti-symmetric difference
/// v(x) = u(x) - u(xbar) on the reflected cap D_lambda and run the
/// situation detectors. Situation A fires when a reflected boundary point of
/// the deep half of the cap comes within h of the boundary; B when the plane
/// is orthogonal to the boundary at a point of T cap dOmega (|n.e| <= h).
MovingPlaneScan moving_plane_scan(const GridFunction& u, const Domain& dom,
                                  Pt e, const std::vector<double>& lambdas,
                                  double tol = 1e-3);

/// Anti-symmetric narrow-domain positivity check: given v >= 0 on H \ D,
/// verify v >= -tol on H and compare sup v^- against the ABP-type bound
/// ||c+||_inf ||v^-||_{L^n(D)}.
struct NarrowDomainCertificate {
    bool premise_ok = true; // v >= -tol on H \ D
    bool pass = true;       // v >= -tol on H
    double sup_neg = 0.0;
    double ln_norm_neg = 0.0;
    double rhs_bound = 0.0;
    double fitted_C = 0.0;
    int h_nodes = 0;
};
NarrowDomainCertificate narrow_domain_check(const GridFunction& v,
                                            const ReflectionFrame& frame,
                                            const std::vector<int>& d_nodes,
                                            double c_plus_sup, double beta,
                                            double tol = 1e-9);

/// Hopf quotient v(x0 + t n_in)/t on a decreasing t grid; the liminf
/// estimate is the minimum over the last three resolved levels. t below 2h
/// is truncated with a warning flag.
struct HopfEstimate {
    double liminf = 0.0;
    std::vector<double> t_used;
    std::vector<double> quotients;
    bool truncated = false;
};
HopfEstimate hopf_ratio(const GridFunction& v, const Domain& dom, Pt x0,
                        std::vector<double> t_grid);

/// Corner growth at a Situation-B configuration (recentred: p0 = 0, e = e1,
/// e2 the interior tangent): fit v(t etabar) ~ A t^p along etabar = e2 - e1.
struct CornerGrowth {
    double exponent = 0.0;
    double coefficient = 0.0;
    double r2 = 0.0;
    std::vector<double> t_used;
    std::vector<double> values;
    bool truncated = false;
    bool degenerate = false; // |v| below tol everywhere: symmetric case
};
CornerGrowth corner_growth(const GridFunction& v,
                           const std::vector<double>& t_grid,
                           double degenerate_tol = 1e-9);

/// Radial-symmetry diagnostics: best-fit center (u-weighted centroid),
/// angular max deviation across circles, and monotonicity violations of the
/// angular-mean radial profile.
struct SymmetryReport {
    Pt center{};
    double angular_max_dev = 0.0;
    int monotonicity_violations = 0;
    bool trivial = false;
    double normal_derivative_dev = 0.0; // copied from serrin_solve when run
    std::string to_json() const;
};
SymmetryReport symmetry_report(const GridFunction& u, const Domain& dom);

} // namespace mlnl
