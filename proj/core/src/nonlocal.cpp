#include "mlnl/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlnl {

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

QuadratureScheme QuadratureScheme::build(const Kernel& k, int dim, double h,
                                         double R_trunc, double r_near,
                                         bool tail_correction) {
    if (h <= 0.0 || R_trunc <= 0.0)
        throw std::invalid_argument("scheme: h and R_trunc must be positive");
    QuadratureScheme q;
    q.tail_correction_ = tail_correction;
    q.dim_ = dim;
    q.h_ = h;
    q.r_near_ = r_near > 0.0 ? r_near : 2.0 * h;
    q.R_trunc_ = R_trunc;
    q.N_ = static_cast<int>(std::ceil(R_trunc / h - 1e-12));
    int W = 2 * q.N_ + 1;
    q.w_.assign(static_cast<size_t>(W) * (dim == 2 ? W : 1), 0.0);

    double hn = dim == 2 ? h * h : h;
    int jlo = dim == 2 ? -q.N_ : 0;
    int jhi = dim == 2 ? q.N_ : 0;
    for (int dj = jlo; dj <= jhi; ++dj) {
        for (int di = -q.N_; di <= q.N_; ++di) {
            double r = h * std::sqrt(static_cast<double>(di) * di +
                                     static_cast<double>(dj) * dj);
            if (r < q.r_near_ || r > R_trunc) continue;
            double wv = k.radial(r) * hn;
            size_t idx = dim == 2
                             ? static_cast<size_t>((dj + q.N_) * W + (di + q.N_))
                             : static_cast<size_t>(di + q.N_);
            q.w_[idx] = wv;
            q.total_mass_ += wv;
        }
    }
    q.near_moment_ = k.second_moment_within(q.r_near_);
    q.tail_mass_ = k.mass_beyond(R_trunc);
    return q;
}

double laplace_h(const GridFunction& u, int i, int j) {
    const double h = u.lat.h();
    double acc = (u.value_or_exterior(i + 1, j) + u.value_or_exterior(i - 1, j) -
                  2.0 * u.at(i, j)) /
                 (h * h);
    if (u.lat.dim() == 2)
        acc += (u.value_or_exterior(i, j + 1) + u.value_or_exterior(i, j - 1) -
                2.0 * u.at(i, j)) /
               (h * h);
    return acc;
}

double nonlocal_eval(const Kernel& k, const GridFunction& u, int i, int j,
                     const QuadratureScheme& q) {
    (void)k; // the scheme carries the kernel's weights
    const int N = q.half_width();
    const int W = 2 * N + 1;
    const auto& w = q.weights();
    const double u0 = u.at(i, j);

    double acc = 0.0;
    if (u.lat.dim() == 2) {
        // pair sum over the upper half plane of offsets
        for (int dj = 0; dj <= N; ++dj) {
            int ilo = dj == 0 ? 1 : -N;
            const double* wrow = &w[static_cast<size_t>((dj + N) * W + N)];
            for (int di = ilo; di <= N; ++di) {
                double wv = wrow[di];
                if (wv == 0.0) continue;
                double s = u.value_or_exterior(i + di, j + dj) +
                           u.value_or_exterior(i - di, j - dj) - 2.0 * u0;
                acc += wv * s;
            }
        }
    } else {
        for (int di = 1; di <= N; ++di) {
            double wv = w[static_cast<size_t>(di + N)];
            if (wv == 0.0) continue;
            acc += wv * (u.value_or_exterior(i + di, 0) +
                         u.value_or_exterior(i - di, 0) - 2.0 * u0);
        }
    }
    // each unordered pair was visited once; the half-sum convention absorbs
    // the 1/2 in front of the integral
    double result = acc;
    if (q.tail_correction())
        result += (u.exterior_value - u0) * q.tail_mass();
    result += q.near_moment() * laplace_h(u, i, j) / (2.0 * u.lat.dim());
    return result;
}

Kernel rescale_kernel(const Kernel& k, double r) {
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("rescale: r must lie in (0,1]");
    // r^{n+alpha} k(r y): each term c |y|^{-e} 1_{|y|<=cut} becomes
    // c r^{n+alpha-e} |y|^{-e} 1_{|y| <= cut/r}
    int n = k.dim();
    double al = k.alpha();
    std::vector<Kernel::Term> terms;
    for (auto t : k.terms()) {
        t.coef *= std::pow(r, n + al - t.exponent);
        if (!std::isinf(t.cutoff)) t.cutoff /= r;
        terms.push_back(t);
    }
    return Kernel(std::move(terms), n, al, k.lambda(), k.dominating(),
                  k.strictly_decreasing());
}

double scaled_nonlocal_eval(const Kernel& k, double r, const GridFunction& v,
                            int i, int j, const QuadratureScheme& q) {
    (void)k;
    (void)r;
    return nonlocal_eval(k, v, i, j, q);
}

double z_bracket(const GridFunction& v, const GridFunction& d, const Kernel& k,
                 int i, int j, const QuadratureScheme& q) {
    (void)k;
    const int N = q.half_width();
    const int W = 2 * N + 1;
    const auto& w = q.weights();
    const double v0 = v.at(i, j), d0 = d.at(i, j);

    double acc = 0.0;
    if (v.lat.dim() == 2) {
        for (int dj = -N; dj <= N; ++dj) {
            const double* wrow = &w[static_cast<size_t>((dj + N) * W + N)];
            for (int di = -N; di <= N; ++di) {
                double wv = wrow[di];
                if (wv == 0.0) continue;
                acc += wv * (v.value_or_exterior(i + di, j + dj) - v0) *
                       (d.value_or_exterior(i + di, j + dj) - d0);
            }
        }
    } else {
        for (int di = -N; di <= N; ++di) {
            double wv = w[static_cast<size_t>(di + N)];
            if (wv == 0.0) continue;
            acc += wv * (v.value_or_exterior(i + di, 0) - v0) *
                   (d.value_or_exterior(i + di, 0) - d0);
        }
    }
    if (q.tail_correction())
        acc += (v.exterior_value - v0) * (d.exterior_value - d0) * q.tail_mass();

    // near field: int_{|y|<r_near} (y.Dv)(y.Dd) k dy = (Dv.Dd)/n * moment
    const double h = v.lat.h();
    double dvx = (v.value_or_exterior(i + 1, j) - v.value_or_exterior(i - 1, j)) /
                 (2.0 * h);
    double ddx = (d.value_or_exterior(i + 1, j) - d.value_or_exterior(i - 1, j)) /
                 (2.0 * h);
    double grad = dvx * ddx;
    if (v.lat.dim() == 2) {
        double dvy =
            (v.value_or_exterior(i, j + 1) - v.value_or_exterior(i, j - 1)) /
            (2.0 * h);
        double ddy =
            (d.value_or_exterior(i, j + 1) - d.value_or_exterior(i, j - 1)) /
            (2.0 * h);
        grad += dvy * ddy;
    }
    acc += q.near_moment() * grad / v.lat.dim();
    return acc;
}

double boundary_arm(const Domain& dom, Pt x, int axis, int dir, double h) {
    Pt step{};
    step[axis] = dir * h;
    if (dom.contains(x + step)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        if (dom.contains(x + mid * step))
            lo = mid;
        else
            hi = mid;
    }
    return std::max(0.5 * (lo + hi), 1e-10);
}

GridFunction apply_L(const Domain& dom, double a, const Kernel& k,
                     const GridFunction& u, const QuadratureScheme& q,
                     bool dirichlet_cut) {
    if (a < 0.0) throw std::invalid_argument("apply_L: a must be nonnegative");
    if (q.R_trunc() < dom.diameter())
        throw std::invalid_argument("apply_L: R_trunc smaller than domain diameter");
    GridFunction out(u.lat);
    const double h = u.lat.h();
    const int n = u.lat.dim();

    for (int j = 0; j < u.lat.ny(); ++j) {
        for (int i = 0; i < u.lat.nx(); ++i) {
            Pt x = u.lat.point(i, j);
            if (dom.signed_distance(x) <= 0.0) continue;

            double lap = 0.0;
            if (!dirichlet_cut) {
                lap = laplace_h(u, i, j);
            } else {
                for (int axis = 0; axis < n; ++axis) {
                    double tp = boundary_arm(dom, x, axis, +1, h);
                    double tm = boundary_arm(dom, x, axis, -1, h);
                    Pt e{};
                    e[axis] = h;
                    double up = tp == 1.0
                                    ? u.value_or_exterior(axis == 0 ? i + 1 : i,
                                                          axis == 0 ? j : j + 1)
                                    : u.exterior_value;
                    double um = tm == 1.0
                                    ? u.value_or_exterior(axis == 0 ? i - 1 : i,
                                                          axis == 0 ? j : j - 1)
                                    : u.exterior_value;
                    lap += unequal_second_diff(um, u.at(i, j), up, tm, tp, h);
                }
            }
            double val = lap;
            if (a > 0.0) {
                // the scheme's near-field compensation reuses the same
                // Laplacian so the monotone structure is preserved
                double nl = nonlocal_eval(k, u, i, j, q);
                if (dirichlet_cut) {
                    nl += q.near_moment() * (lap - laplace_h(u, i, j)) /
                          (2.0 * u.lat.dim());
                }
                val += a * nl;
            }
            out.at(i, j) = val;
        }
    }
    return out;
}

double laplacian_fn(const std::function<double(Pt)>& f, Pt x, int dim,
                    double eps) {
    double acc = (f({x.x + eps, x.y}) + f({x.x - eps, x.y}) - 2.0 * f(x)) /
                 (eps * eps);
    if (dim == 2)
        acc += (f({x.x, x.y + eps}) + f({x.x, x.y - eps}) - 2.0 * f(x)) /
               (eps * eps);
    return acc;
}

double nonlocal_eval_fn(const Kernel& k, const std::function<double(Pt)>& f,
                        Pt x, const FieldQuadOptions& opt) {
    const int n = k.dim();
    const double f0 = f(x);

    // spherical mean of the first difference (covers the symmetric pair)
    auto ring = [&](double s) -> double {
        if (n == 1) return (f({x.x + s, 0.0}) - f0) + (f({x.x - s, 0.0}) - f0);
        double acc = 0.0;
        const int M = opt.angular_points;
        for (int m = 0; m < M; ++m) {
            double th = 2.0 * kPi * m / M;
            acc += f({x.x + s * std::cos(th), x.y + s * std::sin(th)}) - f0;
        }
        return acc * (2.0 * kPi / M);
    };
    auto integrand = [&](double s) {
        return ring(s) * k.radial(s) * (n == 2 ? s : 1.0);
    };

    double smax = std::min(opt.outer_radius, k.support_radius());
    double total = 0.0;
    double floor_s = std::min(opt.inner_floor, 0.25 * smax);
    if (smax > 0.0) {
        // composite Simpson over geometric octave panels down to the floor
        const int sub = 16;
        double hi = smax;
        while (hi > 2.0 * floor_s) {
            double lo = hi * 0.5;
            double hstep = (hi - lo) / (2 * sub);
            double acc = integrand(lo) + integrand(hi);
            for (int m = 1; m < 2 * sub; ++m)
                acc += (m % 2 ? 4.0 : 2.0) * integrand(lo + m * hstep);
            total += acc * hstep / 3.0;
            hi = lo;
        }
        // below the floor the second difference is quadratic in s: use the
        // same compensation as the lattice scheme
        if (opt.compensation_eps > 0.0) {
            double lap = laplacian_fn(f, x, n, opt.compensation_eps);
            total += k.second_moment_within(hi) * lap / (2.0 * n);
        }
    }
    // constant field beyond the outer radius
    total += (opt.far_value - f0) * k.mass_beyond(smax);
    return total;
}

std::string LDeltaProfile::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "delta,abs_L_delta,ray_id\n";
    for (const auto& r : table)
        os << r.delta << "," << r.abs_L_delta << "," << r.ray << "\n";
    return os.str();
}

LDeltaProfile l_delta_profile(const Domain& dom, const Kernel& k, double a,
                              const LDeltaOptions& opt) {
    LDeltaProfile prof;
    const int n = dom.dim();
    double rho1 = opt.rho1 > 0.0 ? opt.rho1 : 0.5 * dom.collar_radius();

    auto delta_fn = [&](Pt p) { return dom.signed_distance(p); };

    std::vector<double> xs, ys; // fit data, restricted to small delta
    std::vector<double> lin_x, lin_y;

    int nrays = n == 1 ? 2 : opt.rays;
    for (int ray = 0; ray < nrays; ++ray) {
        double th = n == 1 ? (ray == 0 ? 0.0 : kPi)
                           : 2.0 * kPi * ray / opt.rays + 0.37;
        Pt x0 = dom.boundary_point(th);
        Pt nin = dom.inward_normal(x0);
        for (int j = 0; j < opt.levels; ++j) {
            double target = rho1 * std::pow(2.0, -j);
            Pt x = x0 + target * nin;
            double d = dom.signed_distance(x);
            if (d <= 0.0) continue;

            double lap;
            if (dom.shape() == Domain::Shape::Ball && n == 2) {
                lap = -1.0 / dist(x, dom.center()); // delta = R - |x - c|
            } else if (dom.shape() == Domain::Shape::Ball && n == 1) {
                lap = 0.0;
            } else {
                lap = laplacian_fn(delta_fn, x, n, std::min(1e-4, 0.25 * d));
            }
            FieldQuadOptions fq;
            fq.outer_radius = dom.diameter() + 1.0;
            fq.far_value = 0.0;
            fq.angular_points = 256;
            fq.inner_floor = std::min(1e-6, d / 16.0);
            fq.compensation_eps = std::min(1e-5, d / 4.0);
            double Ld = lap + a * nonlocal_eval_fn(k, delta_fn, x, fq);
            prof.table.push_back({d, std::abs(Ld), ray});
            if (d <= opt.fit_delta_max) {
                xs.push_back(d);
                ys.push_back(std::abs(Ld));
                lin_x.push_back(-std::log(d));
                lin_y.push_back(std::abs(Ld));
            }
        }
    }
    if (xs.size() >= 3) {
        auto pf = fit_power(xs, ys);
        prof.fitted_exponent = pf.exponent;
        prof.fit_r2 = pf.r2;
        auto lf = fit_line(lin_x, lin_y);
        prof.log_slope = lf.slope;
        prof.log_offset = lf.intercept;
        prof.log_r2 = lf.r2;
    }
    return prof;
}

} // namespace mlnl
