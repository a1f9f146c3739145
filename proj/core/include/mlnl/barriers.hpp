#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/kernels.hpp"
#include "mlnl/nonlocal.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mlnl {

/// Exponential annulus barrier: v_r(x) = exp(-eta q(x)) - exp(-eta (4r)^2)
/// with q(x) = |x|^2 ^ 2(4r)^2 and eta = (n + A0 kappa_L)/r^2, where kappa_L
/// collects the three kernel integrals of the construction. phi_r = v_r / r
/// is a subsolution on the annulus B_4r \ B_r. The raw values span thousands
/// of e-folds, so signed log evaluation is provided alongside.
struct ExpBarrier {
    double r = 1.0;
    double eta = 0.0;
    double kappa_L = 0.0;   // quadrature constant of the construction
    double kappa_tilde = 0.0; // eta (4r)^2 / r, bound constant for phi_r
    int n = 2;

    double q(Pt x) const;
    double v(Pt x) const;      // plain doubles; underflows far out
    double phi(Pt x) const { return v(x) / r; }

    struct SignedLog {
        int sign = 0;       // -1, 0, +1
        double log_mag = 0; // natural log of |v|
    };
    SignedLog log_v(Pt x) const;
};

ExpBarrier build_exp_barrier(double r, int n, double A0, const Kernel& k);

/// Concave profile psi_tilde(s) = int_0^s 2 exp(-q l - q A(l)) dl - s with
/// A(l) = int_0^l Theta, realized through the closed-form antiderivative of
/// Theta. s_of_q solves psi_tilde'(s) = 1/2.
class PsiBarrier {
public:
    PsiBarrier(double q, const DominatingKernel& dom, double upsilon_gamma);

    double q() const { return q_; }
    double s_of_q() const { return s_q_; }
    double sigma1() const { return sigma1_; }

    double psi(double s) const;      // tabulated, linear interpolation
    double psi_d1(double s) const;   // closed form
    double psi_d2(double s) const;   // closed form
    double theta_at(double s) const { return theta(dom_, s); }
    const DominatingKernel& dominating() const { return dom_; }

    /// Phi_r(x) = psi(delta(x)/r) capped at psi(sigma1).
    std::function<double(Pt)> field(const Domain& dom, double r) const;

private:
    double q_ = 1.0;
    DominatingKernel dom_;
    double s_q_ = 1.0;
    double sigma1_ = 0.125;
    std::vector<double> table_; // psi on a uniform grid over [0, table_hi_]
    double table_hi_ = 1.0;
};

PsiBarrier build_psi_barrier(double q, const DominatingKernel& dom,
                             double upsilon_gamma);

/// Outcome of a barrier verification. max_violation is how far the claimed
/// inequality failed (0 when it held everywhere); nodes closer than 4h to
/// the boundary of validity are excluded and counted.
struct ViolationReport {
    std::string region;
    std::string claim;
    double max_violation = 0.0;
    Pt worst_node{};
    int excluded_nodes = 0;
    int checked_nodes = 0;
    std::string to_json() const;
};

/// Generic lattice check of a sign claim for L_h(field) at sample points.
/// `lower_bound` true verifies L_h f >= bound(x) - slack, false verifies
/// L_h f <= bound(x) + slack.
ViolationReport check_lattice_operator_sign(
    const std::function<double(Pt)>& field, double far_value, const Kernel& k,
    double a, int dim, double h, Pt box_lo, Pt box_hi, double band,
    const std::vector<Pt>& sample_points,
    const std::function<double(Pt)>& bound, bool lower_bound, double slack,
    const std::string& region_name, const std::string& claim_name);

/// Discrete check of L_h phi_r >= 0 on the annulus B_4r \ B_r at spacing h,
/// on a deterministic stratified node sample.
ViolationReport verify_supersolution(const ExpBarrier& b, const Kernel& k,
                                     double a, double h, int samples = 400);

/// Continuum check of L Phi_r <= -(1/r^2) Theta(delta/r) at points of the
/// collar D_{eta r}(x0), eta = sigma1/8, by nested quadrature. `slack_rel`
/// loosens the bound multiplicatively to absorb quadrature error.
ViolationReport verify_supersolution(const PsiBarrier& b, const Domain& dom,
                                     const Kernel& k, double a, double r,
                                     int samples = 8, double slack_rel = 1e-3);

/// Verification of log(r z) >= r^zeta log(z) for z >= 1/(theta r) and
/// r below r_theta, the solution of log(theta)/log(r theta) = r^zeta.
struct LogInequalityReport {
    double r_theta = 1.0;
    int violations = 0;
    int checked = 0;
    struct Entry {
        double r, z, lhs, rhs;
        bool ok;
    };
    std::vector<Entry> entries;
};

LogInequalityReport log_inequality_check(double theta_const, double zeta,
                                         const std::vector<double>& r_grid,
                                         const std::vector<double>& z_grid);

} // namespace mlnl
