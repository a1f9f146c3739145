#pragma once

#include "mlnl/vec.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlnl {

struct ProjectionError : std::runtime_error {
    Pt last_iterate;
    double residual;
    ProjectionError(const std::string& msg, Pt it, double res)
        : std::runtime_error(msg), last_iterate(it), residual(res) {}
};

/// Bounded C^2-like domain given implicitly. Shapes: interval/ball, axis
/// aligned ellipse, and star-shaped boundary r(th) = r0 (1 + sum_m eps_m
/// cos(m th)). The distance function delta(x) = dist(x, complement), clamped
/// to 0 outside, is the central quantity; collar geometry hangs off it.
///
/// Immutable after construction; all queries are pure.
class Domain {
public:
    enum class Shape { Ball, Ellipse, Star };

    static Domain ball(int dim, Pt center, double radius);
    static Domain ellipse(double semi_a, double semi_b);
    static Domain star(double r0, std::vector<double> eps);

    int dim() const { return dim_; }
    Shape shape() const { return shape_; }
    Pt center() const { return center_; }

    /// dist(x, Omega^c) for x in Omega, 0 outside. Exact for balls; ellipse
    /// and star points are projected onto the boundary by a damped Newton
    /// search seeded from a dense parameter scan.
    double signed_distance(Pt x) const;

    /// Unsigned distance to the boundary curve, valid on both sides.
    double boundary_distance(Pt x) const;

    bool contains(Pt x) const;

    /// Nearest boundary point to x.
    Pt project_to_boundary(Pt x) const;

    /// Unit inward normal at a point within 1e-8 of the boundary.
    Pt inward_normal(Pt x0) const;

    /// Boundary parametrization (theta in [0, 2pi); in 1-d theta=0 maps to
    /// the left endpoint and pi to the right).
    Pt boundary_point(double theta) const;
    std::vector<Pt> boundary_sample(int m) const;

    double inradius() const { return inradius_; }
    double diameter() const { return diameter_; }

    /// Collar radius rho: the collar ball inclusions are guaranteed for
    /// R <= rho. Set to 0.5 * min(inradius, minimal curvature radius).
    double collar_radius() const { return rho_; }

    /// Axis-aligned bounding box [lo, hi].
    std::array<Pt, 2> bounding_box() const { return {bb_lo_, bb_hi_}; }

private:
    Domain() = default;

    double star_radius(double th) const;
    double star_radius_d1(double th) const;
    double star_radius_d2(double th) const;
    double implicit_value(Pt x) const; // negative inside, positive outside

    Shape shape_ = Shape::Ball;
    int dim_ = 2;
    Pt center_{};
    double radius_ = 1.0;          // ball
    double a_ = 1.0, b_ = 1.0;     // ellipse
    double r0_ = 1.0;              // star
    std::vector<double> eps_;      // star perturbation coefficients

    double inradius_ = 1.0;
    double diameter_ = 2.0;
    double rho_ = 0.5;
    Pt bb_lo_{}, bb_hi_{};
};

/// C^2 modification of the distance function: identity below rho1, blended to
/// the constant cap 1.5*rho1 past 2*rho1. The blend derivative is the cubic
/// 1 - (3s^2 - 2s^3), so |S''| <= 1.5/rho1 and S is C^2 across both joints.
class SmoothedDistance {
public:
    SmoothedDistance(const Domain& dom, double rho1);

    double operator()(Pt x) const { return blend(dom_->signed_distance(x)); }

    double blend(double t) const;
    double blend_d1(double t) const;
    double blend_d2(double t) const;

    double cap() const { return 1.5 * rho1_; }
    double rho1() const { return rho1_; }
    /// max |S''| over the blend zone.
    double curvature_bound() const { return 1.5 / rho1_; }

private:
    const Domain* dom_;
    double rho1_;
};

SmoothedDistance smoothed_distance(const Domain& dom, double rho1);

class Lattice; // grid.hpp

/// Boundary collar node sets: D_R = B_R(x0) cap Omega and the interior slab
/// D+_{k'R} = B_{k'R}(x0) cap Omega cap {(x-x0).n(x0) >= 2 kappa R}, with
/// k' = 1/2 + 2 kappa. Also carries, for every lattice node y in D_{R/2},
/// the projected point y* and the shifted center y* + 4 kappa R n(y*).
struct CollarRegion {
    Pt x0;
    double R = 0.0;
    double kappa = 0.05;
    double kappa_prime = 0.6;
    std::vector<int> d_r;      // lattice linear indices of D_R
    std::vector<int> d_plus;   // lattice linear indices of D+_{k'R}
    struct ShiftedPoint {
        int node;
        Pt ystar;
        Pt ytilde; // y* + 4 kappa R n(y*)
    };
    std::vector<ShiftedPoint> shifted; // one per node of D_{R/2}
};

CollarRegion collar_region(const Domain& dom, const Lattice& lat, Pt x0,
                           double R, double kappa);

} // namespace mlnl
