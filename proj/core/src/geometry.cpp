#include "mlnl/geometry.hpp"

#include "mlnl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace mlnl {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kBoundaryTol = 1e-8;
} // namespace

Domain Domain::ball(int dim, Pt center, double radius) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");
    if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
    Domain d;
    d.shape_ = Shape::Ball;
    d.dim_ = dim;
    d.center_ = center;
    d.radius_ = radius;
    d.inradius_ = radius;
    d.diameter_ = 2.0 * radius;
    d.rho_ = 0.5 * radius; // curvature radius equals the radius
    d.bb_lo_ = {center.x - radius, dim == 2 ? center.y - radius : 0.0};
    d.bb_hi_ = {center.x + radius, dim == 2 ? center.y + radius : 0.0};
    return d;
}

Domain Domain::ellipse(double semi_a, double semi_b) {
    if (semi_a <= 0.0 || semi_b <= 0.0)
        throw std::invalid_argument("ellipse semi-axes must be positive");
    Domain d;
    d.shape_ = Shape::Ellipse;
    d.dim_ = 2;
    d.a_ = semi_a;
    d.b_ = semi_b;
    d.inradius_ = std::min(semi_a, semi_b);
    d.diameter_ = 2.0 * std::max(semi_a, semi_b);
    // minimal curvature radius of an ellipse: min(b^2/a, a^2/b)
    double rc = std::min(semi_b * semi_b / semi_a, semi_a * semi_a / semi_b);
    d.rho_ = 0.5 * std::min(d.inradius_, rc);
    d.bb_lo_ = {-semi_a, -semi_b};
    d.bb_hi_ = {semi_a, semi_b};
    return d;
}

Domain Domain::star(double r0, std::vector<double> eps) {
    if (r0 <= 0.0) throw std::invalid_argument("star r0 must be positive");
    double wiggle = 0.0, sum_eps = 0.0;
    for (size_t m = 0; m < eps.size(); ++m) {
        wiggle += std::abs(eps[m]) * static_cast<double>((m + 1) * (m + 1));
        sum_eps += std::abs(eps[m]);
    }
    if (wiggle >= 0.2)
        throw std::invalid_argument("star perturbation too rough: need |sum eps_m m^2| < 0.2");
    Domain d;
    d.shape_ = Shape::Star;
    d.dim_ = 2;
    d.r0_ = r0;
    d.eps_ = std::move(eps);

    double rmin = r0, rmax = r0;
    for (int k = 0; k < 2048; ++k) {
        double r = d.star_radius(2.0 * kPi * k / 2048.0);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    d.inradius_ = rmin;
    d.diameter_ = 2.0 * rmax;
    // curvature of r(th): kappa = (r^2 + 2r'^2 - r r'') / (r^2 + r'^2)^{3/2};
    // with the C^2 bound above this stays close to 1/r0. Scan for the max.
    double kmax = 0.0;
    for (int k = 0; k < 2048; ++k) {
        double th = 2.0 * kPi * k / 2048.0;
        double r = d.star_radius(th), r1 = d.star_radius_d1(th),
               r2 = d.star_radius_d2(th);
        double num = r * r + 2.0 * r1 * r1 - r * r2;
        double den = std::pow(r * r + r1 * r1, 1.5);
        kmax = std::max(kmax, std::abs(num / den));
    }
    d.rho_ = 0.5 * std::min(d.inradius_, 1.0 / kmax);
    d.bb_lo_ = {-rmax, -rmax};
    d.bb_hi_ = {rmax, rmax};
    return d;
}

double Domain::star_radius(double th) const {
    double r = r0_;
    for (size_t m = 0; m < eps_.size(); ++m)
        r += r0_ * eps_[m] * std::cos(static_cast<double>(m + 1) * th);
    return r;
}

double Domain::star_radius_d1(double th) const {
    double r = 0.0;
    for (size_t m = 0; m < eps_.size(); ++m) {
        double mm = static_cast<double>(m + 1);
        r -= r0_ * eps_[m] * mm * std::sin(mm * th);
    }
    return r;
}

double Domain::star_radius_d2(double th) const {
    double r = 0.0;
    for (size_t m = 0; m < eps_.size(); ++m) {
        double mm = static_cast<double>(m + 1);
        r -= r0_ * eps_[m] * mm * mm * std::cos(mm * th);
    }
    return r;
}

double Domain::implicit_value(Pt x) const {
    switch (shape_) {
    case Shape::Ball:
        if (dim_ == 1) return std::abs(x.x - center_.x) - radius_;
        return dist(x, center_) - radius_;
    case Shape::Ellipse: {
        double q = (x.x * x.x) / (a_ * a_) + (x.y * x.y) / (b_ * b_);
        return q - 1.0;
    }
    case Shape::Star: {
        double r = norm(x);
        double th = std::atan2(x.y, x.x);
        return r - star_radius(th);
    }
    }
    return 0.0;
}

bool Domain::contains(Pt x) const { return implicit_value(x) < 0.0; }

Pt Domain::boundary_point(double theta) const {
    switch (shape_) {
    case Shape::Ball:
        if (dim_ == 1)
            return {center_.x + (std::cos(theta) >= 0.0 ? radius_ : -radius_), 0.0};
        return {center_.x + radius_ * std::cos(theta),
                center_.y + radius_ * std::sin(theta)};
    case Shape::Ellipse:
        return {a_ * std::cos(theta), b_ * std::sin(theta)};
    case Shape::Star: {
        double r = star_radius(theta);
        return {r * std::cos(theta), r * std::sin(theta)};
    }
    }
    return {};
}

std::vector<Pt> Domain::boundary_sample(int m) const {
    std::vector<Pt> out;
    if (dim_ == 1) {
        out.push_back({center_.x - radius_, 0.0});
        out.push_back({center_.x + radius_, 0.0});
        return out;
    }
    out.reserve(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k)
        out.push_back(boundary_point(2.0 * kPi * k / m));
    return out;
}

Pt Domain::project_to_boundary(Pt x) const {
    if (shape_ == Shape::Ball) {
        if (dim_ == 1)
            return {center_.x + (x.x >= center_.x ? radius_ : -radius_), 0.0};
        Pt d = x - center_;
        double r = norm(d);
        if (r < 1e-300) return {center_.x + radius_, center_.y};
        return center_ + (radius_ / r) * d;
    }

    // Parametric nearest point: dense scan seeds a damped Newton iteration on
    // g(th) = (x - p(th)) . p'(th) = 0.
    auto bp = [&](double th) { return boundary_point(th); };
    auto bp_d1 = [&](double th) -> Pt {
        if (shape_ == Shape::Ellipse)
            return {-a_ * std::sin(th), b_ * std::cos(th)};
        double r = star_radius(th), r1 = star_radius_d1(th);
        return {r1 * std::cos(th) - r * std::sin(th),
                r1 * std::sin(th) + r * std::cos(th)};
    };
    auto bp_d2 = [&](double th) -> Pt {
        if (shape_ == Shape::Ellipse)
            return {-a_ * std::cos(th), -b_ * std::sin(th)};
        double r = star_radius(th), r1 = star_radius_d1(th),
               r2 = star_radius_d2(th);
        return {r2 * std::cos(th) - 2.0 * r1 * std::sin(th) - r * std::cos(th),
                r2 * std::sin(th) + 2.0 * r1 * std::cos(th) - r * std::sin(th)};
    };

    const int nscan = 512;
    double best_th = 0.0, best_d2 = std::numeric_limits<double>::max();
    for (int k = 0; k < nscan; ++k) {
        double th = 2.0 * kPi * k / nscan;
        double d2 = norm2(x - bp(th));
        if (d2 < best_d2) {
            best_d2 = d2;
            best_th = th;
        }
    }

    double th = best_th;
    double g = 0.0;
    for (int it = 0; it < 100; ++it) {
        Pt p = bp(th), t1 = bp_d1(th), t2 = bp_d2(th);
        Pt d = x - p;
        g = dot(d, t1);
        double dg = dot(d, t2) - dot(t1, t1);
        if (std::abs(g) < 1e-14 * std::max(1.0, norm(d) * norm(t1)))
            return p;
        if (dg == 0.0) break;
        double step = -g / dg;
        // damped: never jump more than one scan cell
        double cap = 2.0 * kPi / nscan;
        step = std::clamp(step, -cap, cap);
        th += step;
    }
    Pt p = bp(th);
    if (std::abs(g) < 1e-9) return p;
    throw ProjectionError("boundary projection did not converge", p, std::abs(g));
}

double Domain::boundary_distance(Pt x) const {
    if (shape_ == Shape::Ball) {
        if (dim_ == 1) return std::abs(radius_ - std::abs(x.x - center_.x));
        return std::abs(radius_ - dist(x, center_));
    }
    return dist(x, project_to_boundary(x));
}

double Domain::signed_distance(Pt x) const {
    if (!contains(x)) return 0.0;
    return boundary_distance(x);
}

Pt Domain::inward_normal(Pt x0) const {
    if (boundary_distance(x0) > kBoundaryTol)
        throw std::invalid_argument("inward_normal: point not on the boundary");
    switch (shape_) {
    case Shape::Ball: {
        if (dim_ == 1) return {x0.x >= center_.x ? -1.0 : 1.0, 0.0};
        Pt d = center_ - x0;
        double m = norm(d);
        if (m < 1e-14)
            throw std::invalid_argument("inward_normal: degenerate gradient");
        return (1.0 / m) * d;
    }
    case Shape::Ellipse: {
        // gradient of the implicit function points outward
        Pt grad{2.0 * x0.x / (a_ * a_), 2.0 * x0.y / (b_ * b_)};
        double m = norm(grad);
        if (m < 1e-14)
            throw std::invalid_argument("inward_normal: degenerate gradient");
        return (-1.0 / m) * grad;
    }
    case Shape::Star: {
        double th = std::atan2(x0.y, x0.x);
        double r = star_radius(th), r1 = star_radius_d1(th);
        Pt tangent{r1 * std::cos(th) - r * std::sin(th),
                   r1 * std::sin(th) + r * std::cos(th)};
        Pt nrm = perp(tangent);
        nrm = normalized(nrm);
        // orient toward the origin side (star-shaped about the origin)
        if (dot(nrm, x0) > 0.0) nrm = -nrm;
        return nrm;
    }
    }
    throw std::logic_error("unreachable");
}

SmoothedDistance::SmoothedDistance(const Domain& dom, double rho1)
    : dom_(&dom), rho1_(rho1) {
    if (rho1 <= 0.0 || rho1 >= dom.inradius())
        throw std::invalid_argument("smoothed_distance: need 0 < rho1 < inradius");
}

double SmoothedDistance::blend(double t) const {
    if (t <= rho1_) return t;
    if (t >= 2.0 * rho1_) return 1.5 * rho1_;
    double s = (t - rho1_) / rho1_;
    // antiderivative of 1 - 3s^2 + 2s^3
    return rho1_ + rho1_ * (s - s * s * s + 0.5 * s * s * s * s);
}

double SmoothedDistance::blend_d1(double t) const {
    if (t <= rho1_) return 1.0;
    if (t >= 2.0 * rho1_) return 0.0;
    double s = (t - rho1_) / rho1_;
    return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

double SmoothedDistance::blend_d2(double t) const {
    if (t <= rho1_ || t >= 2.0 * rho1_) return 0.0;
    double s = (t - rho1_) / rho1_;
    return (-6.0 * s + 6.0 * s * s) / rho1_;
}

SmoothedDistance smoothed_distance(const Domain& dom, double rho1) {
    return SmoothedDistance(dom, rho1);
}

CollarRegion collar_region(const Domain& dom, const Lattice& lat, Pt x0,
                           double R, double kappa) {
    if (dom.boundary_distance(x0) > kBoundaryTol)
        throw std::invalid_argument("collar_region: x0 not on the boundary");
    if (!(kappa > 0.0 && kappa < 1.0 / 16.0))
        throw std::invalid_argument("collar_region: kappa must lie in (0, 1/16)");
    if (R > dom.collar_radius())
        throw std::invalid_argument("collar_region: R exceeds the stored inclusion radius rho");

    CollarRegion out;
    out.x0 = x0;
    out.R = R;
    out.kappa = kappa;
    out.kappa_prime = 0.5 + 2.0 * kappa;
    Pt n0 = dom.inward_normal(x0);

    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt p = lat.point(i, j);
            double delta = dom.signed_distance(p);
            if (delta <= 0.0) continue;
            double d0 = dist(p, x0);
            int lin = lat.index(i, j);
            if (d0 < R) out.d_r.push_back(lin);
            if (d0 < out.kappa_prime * R && dot(p - x0, n0) >= 2.0 * kappa * R)
                out.d_plus.push_back(lin);
            if (d0 < 0.5 * R) {
                Pt ystar = dom.project_to_boundary(p);
                Pt nst = dom.inward_normal(ystar);
                out.shifted.push_back({lin, ystar, ystar + (4.0 * kappa * R) * nst});
            }
        }
    }

    // inclusion checks on the stored samples; the inclusions
    // are for open balls that may touch the boundary tangentially, so the
    // sampled sphere is shrunk by a hair
    auto ball_in_dr = [&](Pt c, double r, const char* which) {
        const int ndir = 16;
        double rs = r * (1.0 - 1e-6);
        for (int k = 0; k < ndir; ++k) {
            double th = 2.0 * kPi * k / ndir;
            Pt z = c + Pt{rs * std::cos(th), rs * std::sin(th)};
            if (lat.dim() == 1) z = c + Pt{(k % 2 ? rs : -rs), 0.0};
            if (!(dist(z, x0) <= R && dom.signed_distance(z) > 0.0))
                throw std::runtime_error(std::string("collar_region: inclusion ") +
                                         which + " violated; reduce R");
        }
    };
    for (int lin : out.d_plus)
        ball_in_dr(lat.point(lin), kappa * R, "B_kR(y) in D_R");
    for (const auto& s : out.shifted) {
        ball_in_dr(s.ytilde, 4.0 * kappa * R, "B_4kR(ytilde) in D_R");
        // B_{kR}(ytilde) must also sit inside D+
        const int ndir = 16;
        double rs = kappa * R * (1.0 - 1e-6);
        for (int k = 0; k < ndir; ++k) {
            double th = 2.0 * kPi * k / ndir;
            Pt z = s.ytilde + Pt{rs * std::cos(th), rs * std::sin(th)};
            bool ok = dist(z, x0) <= out.kappa_prime * R &&
                      dom.signed_distance(z) > 0.0 &&
                      dot(z - x0, n0) >= 2.0 * kappa * R;
            if (!ok)
                throw std::runtime_error(
                    "collar_region: inclusion B_kR(ytilde) in D+ violated; reduce R");
        }
    }
    return out;
}

} // namespace mlnl
