#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/grid.hpp"
#include "mlnl/kernels.hpp"
#include "mlnl/quadrature.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mlnl {

/// Lattice quadrature for Iu(x) = 1/2 int (u(x+y) + u(x-y) - 2u(x)) k(y) dy.
///
/// Far field: midpoint weights w_j = k(y_j) h^n over lattice offsets with
/// r_near <= |y_j| <= R_trunc. Near field (|y| < r_near, default 2h): the
/// singular part is replaced by the consistent compensation
/// (int_{|y|<r_near} |y|^2 k dy) * Delta_h u(x) / (2n). Beyond R_trunc the
/// field is taken equal to u.exterior_value, contributing
/// (exterior_value - u(x)) * tail_mass. All weights are nonnegative, so the
/// scheme is monotone.
class QuadratureScheme {
public:
    static QuadratureScheme build(const Kernel& k, int dim, double h,
                                  double R_trunc, double r_near = -1.0,
                                  bool tail_correction = true);

    int dim() const { return dim_; }
    double h() const { return h_; }
    double r_near() const { return r_near_; }
    double R_trunc() const { return R_trunc_; }
    int half_width() const { return N_; }

    double weight(int di, int dj) const {
        return w_[static_cast<size_t>((dj + N_) * (2 * N_ + 1) + (di + N_))];
    }
    const std::vector<double>& weights() const { return w_; }
    double total_mass() const { return total_mass_; }
    double near_moment() const { return near_moment_; } // int_{|y|<r_near} |y|^2 k
    double tail_mass() const { return tail_mass_; }     // int_{|y|>R_trunc} k
    /// With the flag on, the mass beyond R_trunc acts on
    /// (exterior_value - u(x)); off means the data is taken to continue so
    /// that the symmetric second differences cancel (affine extensions).
    bool tail_correction() const { return tail_correction_; }

private:
    int dim_ = 2;
    double h_ = 0.0;
    double r_near_ = 0.0;
    double R_trunc_ = 0.0;
    int N_ = 0;
    std::vector<double> w_;
    double total_mass_ = 0.0;
    double near_moment_ = 0.0;
    double tail_mass_ = 0.0;
    bool tail_correction_ = true;
};

/// Plain central discrete Laplacian at node (i, j); reads the exterior band.
double laplace_h(const GridFunction& u, int i, int j);

/// Iu at an interior node by the symmetric pair sum. The grid function must
/// be stored out to R_trunc around the evaluation point.
double nonlocal_eval(const Kernel& k, const GridFunction& u, int i, int j,
                     const QuadratureScheme& q);

/// I_r u: quadrature against the rescaled density r^{n+alpha} k(r y), which
/// the dominating kernel controls uniformly in r.
double scaled_nonlocal_eval(const Kernel& k, double r, const GridFunction& v,
                            int i, int j, const QuadratureScheme& q_of_rescaled);

/// Rescaled kernel r^{n+alpha} k(r y) as a Kernel (for building the scaled
/// scheme).
Kernel rescale_kernel(const Kernel& k, double r);

/// Z[v,d](x) = int (v(y)-v(x)) (d(y)-d(x)) k(y-x) dy with the matching
/// near-field compensation (int |y|^2 k) * (Dv . Dd) / n using central
/// gradients.
double z_bracket(const GridFunction& v, const GridFunction& d, const Kernel& k,
                 int i, int j, const QuadratureScheme& q);

/// Lu = Delta u + a Iu on interior nodes; zero elsewhere. When
/// `dirichlet_cut` is set the field is treated as killed outside Omega
/// (kink on the boundary) and the Laplacian uses boundary-intercept arms
/// with value u.exterior_value; otherwise plain central stencils.
GridFunction apply_L(const Domain& dom, double a, const Kernel& k,
                     const GridFunction& u, const QuadratureScheme& q,
                     bool dirichlet_cut = false);

/// Fraction theta in (0,1] of the step h at which the segment from x to
/// x + dir*h*e_axis crosses the boundary; 1 when the neighbor is inside.
double boundary_arm(const Domain& dom, Pt x, int axis, int dir, double h);

/// Second difference along one axis with unequal arms (Shortley-Weller):
/// arms theta_m, theta_p in (0,1], values u_m, u_p at the arm ends.
inline double unequal_second_diff(double u_m, double u_0, double u_p,
                                  double theta_m, double theta_p, double h) {
    double s = theta_m + theta_p;
    return 2.0 / (h * h) *
           (u_p / (theta_p * s) + u_m / (theta_m * s) - u_0 / (theta_m * theta_p));
}

// -- continuum evaluation (no lattice) --------------------------------------

/// Iu(x) for a callable field by nested quadrature: adaptive radial panels
/// against s^{n-1} k(s) times the spherical mean of the second difference
/// (trapezoid in the angle, exact sum in 1-d). `far_value` is the constant
/// the field approaches outside `outer_radius`.
struct FieldQuadOptions {
    int angular_points = 128;
    double outer_radius = 8.0;
    double far_value = 0.0;
    /// radial panels stop here; below the floor the singular mass acts
    /// through the second-moment compensation (rounding noise in the field
    /// differences would otherwise be amplified by k ~ s^{-n-alpha})
    double inner_floor = 1e-6;
    /// step of the compensation Laplacian; 0 disables the compensation
    double compensation_eps = 1e-5;
};

double nonlocal_eval_fn(const Kernel& k, const std::function<double(Pt)>& f,
                        Pt x, const FieldQuadOptions& opt);

/// Five-point Laplacian of a callable with step eps.
double laplacian_fn(const std::function<double(Pt)>& f, Pt x, int dim,
                    double eps = 1e-5);

// -- L delta singularity profile --------------------------------------------

/// Samples |L delta| along inward rays at dyadic distances delta = rho1 2^-j
/// and fits the singularity growth law: power law in delta for alpha != 1,
/// linear in -log(delta) for alpha = 1.
struct LDeltaProfile {
    struct Row {
        double delta;
        double abs_L_delta;
        int ray;
    };
    std::vector<Row> table;
    double fitted_exponent = 0.0; // alpha != 1: slope of log|Ld| vs log d
    double fit_r2 = 0.0;
    double log_slope = 0.0;       // alpha == 1: slope of |Ld| vs -log d
    double log_offset = 0.0;      // alpha == 1: fitted C3 offset
    double log_r2 = 0.0;
    std::string to_csv() const;   // columns delta, abs_L_delta, ray_id
};

struct LDeltaOptions {
    int rays = 3;
    int levels = 16;
    double rho1 = -1.0;     // default: collar radius / 2
    double fit_delta_max = 1.0 / 64.0;
};

LDeltaProfile l_delta_profile(const Domain& dom, const Kernel& k, double a,
                              const LDeltaOptions& opt = {});

} // namespace mlnl
