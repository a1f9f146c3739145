#include "mlnl/overdetermined.hpp"

#include "mlnl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mlnl {

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

Pt reflect(const ReflectionFrame& f, Pt x) { return f.reflect(x); }

SolveReport serrin_solve(const DiscreteOperator& A,
                         const std::function<double(double)>& H,
                         const std::function<double(double)>& f,
                         int boundary_samples, double tol) {
    if (A.a() > 0.0) {
        const auto& k = A.kernel();
        if (!k || !k->is_radial() || !k->strictly_decreasing())
            throw std::invalid_argument(
                "serrin_solve: kernel must be radial and strictly decreasing");
    }
    SemilinearOptions opt;
    opt.tol = tol;
    SolveReport rep = solve_semilinear(A, H, f, opt);

    const Domain& dom = A.domain();
    for (int r = 0; r < A.rows(); ++r) {
        double uv = rep.u.v[static_cast<size_t>(
            A.nodes().interior[static_cast<size_t>(r)])];
        if (uv <= 0.0)
            throw SolveError("serrin_solve: solution is not positive inside",
                             rep.residual_history);
    }

    // inward normal derivative by one-sided second-order differencing;
    // u(x0) = 0 on the boundary
    const double h = A.h();
    rep.normal_trace.reserve(static_cast<size_t>(boundary_samples));
    double mean = 0.0;
    auto pts = dom.boundary_sample(boundary_samples);
    for (Pt x0 : pts) {
        Pt nin = dom.inward_normal(x0);
        double u1 = rep.u.interp(x0 + h * nin);
        double u2 = rep.u.interp(x0 + 2.0 * h * nin);
        double dudn = (4.0 * u1 - u2) / (2.0 * h);
        rep.normal_trace.push_back(dudn);
        mean += dudn;
    }
    mean /= static_cast<double>(rep.normal_trace.size());
    double dev = 0.0;
    for (double t : rep.normal_trace) dev = std::max(dev, std::abs(t - mean));
    rep.mean_normal_derivative = mean;
    rep.normal_derivative_dev = std::abs(mean) > 0.0 ? dev / std::abs(mean) : 0.0;
    return rep;
}

std::string MovingPlaneScan::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,min_v,situation_a,situation_b\n";
    for (const auto& r : rows)
        os << r.lambda << "," << r.min_v << "," << (r.situation_a ? 1 : 0)
           << "," << (r.situation_b ? 1 : 0) << "\n";
    return os.str();
}

MovingPlaneState moving_plane_state(const GridFunction& u, const Domain& dom,
                                    Pt e, double lambda) {
    MovingPlaneState st;
    st.lambda = lambda;
    st.e = normalized(e);
    e = st.e;
    const auto& lat = u.lat;
    const double h = lat.h();
    st.v = GridFunction(lat);

    const int nb = 2048;
    auto bpts = dom.boundary_sample(dom.dim() == 1 ? 2 : nb);
    double l_sup = -std::numeric_limits<double>::infinity();
    for (Pt p : bpts) l_sup = std::max(l_sup, dot(p, e));
    ReflectionFrame frame{e, lambda};

    // internal touching: a reflected boundary point from the deep half of
    // the cap lands within h of the boundary. The reflected boundary hugs
    // dOmega tangentially near T at every lambda, so the exclusion zone is
    // the shallow half, not a fixed h-collar.
    double cap_depth = l_sup - lambda;
    for (Pt p : bpts) {
        double t = dot(p, e) - lambda;
        if (t < std::max(h, 0.5 * cap_depth)) continue;
        Pt pbar = frame.reflect(p);
        if (dom.boundary_distance(pbar) <= h) {
            st.situation = MovingPlaneState::Situation::InternalTouch;
            break;
        }
    }

    // orthogonal tangency: |n(p0) . e| <= h at some p0 in T cap dOmega
    if (st.situation == MovingPlaneState::Situation::None) {
        for (int s = 0; s + 1 < static_cast<int>(bpts.size()); ++s) {
            double f0 = dot(bpts[static_cast<size_t>(s)], e) - lambda;
            double f1 = dot(bpts[static_cast<size_t>(s) + 1], e) - lambda;
            if (f0 == 0.0 || f0 * f1 < 0.0) {
                double th0 = 2.0 * kPi * s / nb, th1 = 2.0 * kPi * (s + 1) / nb;
                for (int it = 0; it < 40; ++it) {
                    double tm = 0.5 * (th0 + th1);
                    double fm = dot(dom.boundary_point(tm), e) - lambda;
                    if (f0 * fm <= 0.0)
                        th1 = tm;
                    else {
                        th0 = tm;
                        f0 = fm;
                    }
                }
                Pt p0 = dom.boundary_point(0.5 * (th0 + th1));
                Pt n0 = dom.inward_normal(dom.project_to_boundary(p0));
                if (std::abs(dot(n0, e)) <= h) {
                    st.situation =
                        MovingPlaneState::Situation::OrthogonalTangency;
                    break;
                }
            }
        }
    }

    // anti-symmetric difference on the reflected cap
    double minv = std::numeric_limits<double>::infinity();
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt x = lat.point(i, j);
            if (dot(x, e) >= lambda) continue;
            Pt xbar = frame.reflect(x);
            if (dom.signed_distance(xbar) <= 0.0) continue;
            int bi, bj;
            lat.locate(xbar, bi, bj);
            if (!lat.in_bounds(bi - 1, bj - 1) || !lat.in_bounds(bi + 1, bj + 1))
                throw std::runtime_error(
                    "moving_plane_scan: reflected point outside the data band");
            double v = u.at(i, j) - u.interp(xbar);
            st.v.at(i, j) = v;
            st.cap_nodes.push_back(lat.index(i, j));
            minv = std::min(minv, v);
        }
    }
    st.min_v = st.cap_nodes.empty() ? 0.0 : minv;
    return st;
}

MovingPlaneScan moving_plane_scan(const GridFunction& u, const Domain& dom,
                                  Pt e, const std::vector<double>& lambdas,
                                  double tol) {
    MovingPlaneScan out;
    e = normalized(e);
    const int nb = 2048;
    auto bpts = dom.boundary_sample(dom.dim() == 1 ? 2 : nb);
    double l_sup = -std::numeric_limits<double>::infinity();
    for (Pt p : bpts) l_sup = std::max(l_sup, dot(p, e));

    for (double lambda : lambdas) {
        if (lambda >= l_sup) continue;
        auto st = moving_plane_state(u, dom, e, lambda);
        ScanRow row;
        row.lambda = lambda;
        row.situation_a =
            st.situation == MovingPlaneState::Situation::InternalTouch;
        row.situation_b =
            st.situation == MovingPlaneState::Situation::OrthogonalTangency;
        row.min_v = st.min_v;
        row.cap_nodes = static_cast<int>(st.cap_nodes.size());
        out.rows.push_back(row);

        if (!out.triggered && (row.situation_a || row.situation_b)) {
            out.triggered = true;
            out.lambda0 = lambda;
        }
        if (!out.triggered && row.cap_nodes > 0) {
            out.worst_min_v = std::min(out.worst_min_v, row.min_v);
            if (row.min_v < -tol) out.min_v_nonneg = false;
        }
    }
    return out;
}

NarrowDomainCertificate narrow_domain_check(const GridFunction& v,
                                            const ReflectionFrame& frame,
                                            const std::vector<int>& d_nodes,
                                            double c_plus_sup, double beta,
                                            double tol) {
    (void)beta; // recorded by the caller; the bound only needs ||c+||
    NarrowDomainCertificate cert;
    const auto& lat = v.lat;
    const int n = lat.dim();

    std::vector<char> in_d(static_cast<size_t>(lat.size()), 0);
    for (int lin : d_nodes) {
        Pt x = lat.point(lin);
        if (!frame.in_halfspace(x))
            throw std::invalid_argument("narrow_domain_check: D not inside H");
        in_d[static_cast<size_t>(lin)] = 1;
    }

    double sup_neg = 0.0, ln_acc = 0.0;
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt x = lat.point(i, j);
            if (!frame.in_halfspace(x)) continue;
            cert.h_nodes++;
            double neg = std::max(-v.at(i, j), 0.0);
            int lin = lat.index(i, j);
            if (!in_d[static_cast<size_t>(lin)]) {
                if (neg > tol) cert.premise_ok = false;
            } else {
                ln_acc += std::pow(neg, n) * std::pow(lat.h(), n);
            }
            sup_neg = std::max(sup_neg, neg);
        }
    }
    cert.sup_neg = sup_neg;
    cert.ln_norm_neg = std::pow(ln_acc, 1.0 / n);
    cert.rhs_bound = c_plus_sup * cert.ln_norm_neg;
    cert.pass = sup_neg <= tol;
    cert.fitted_C = cert.rhs_bound > 0.0
                        ? sup_neg / cert.rhs_bound
                        : (sup_neg > 0.0
                               ? std::numeric_limits<double>::infinity()
                               : 0.0);
    return cert;
}

HopfEstimate hopf_ratio(const GridFunction& v, const Domain& dom, Pt x0,
                        std::vector<double> t_grid) {
    HopfEstimate out;
    const double h = v.lat.h();
    Pt nin = dom.inward_normal(dom.project_to_boundary(x0));
    std::sort(t_grid.begin(), t_grid.end(), std::greater<double>());
    for (double t : t_grid) {
        if (t < 2.0 * h) {
            out.truncated = true;
            continue;
        }
        out.t_used.push_back(t);
        out.quotients.push_back(v.interp(x0 + t * nin) / t);
    }
    if (out.quotients.empty()) return out;
    size_t m = out.quotients.size();
    size_t lo = m >= 3 ? m - 3 : 0;
    double est = std::numeric_limits<double>::infinity();
    for (size_t k = lo; k < m; ++k) est = std::min(est, out.quotients[k]);
    out.liminf = est;
    return out;
}

CornerGrowth corner_growth(const GridFunction& v,
                           const std::vector<double>& t_grid,
                           double degenerate_tol) {
    CornerGrowth out;
    const double h = v.lat.h();
    Pt etabar{-1.0, 1.0};
    std::vector<double> ts, vals;
    for (double t : t_grid) {
        if (t < 4.0 * h) { // bilinear interpolation only supports t >= 4h
            out.truncated = true;
            continue;
        }
        ts.push_back(t);
        vals.push_back(v.interp(t * etabar));
    }
    out.t_used = ts;
    out.values = vals;
    double scale = 0.0;
    for (double x : vals) scale = std::max(scale, std::abs(x));
    if (scale <= degenerate_tol) {
        out.degenerate = true;
        return out;
    }
    std::vector<double> av;
    av.reserve(vals.size());
    for (double x : vals) av.push_back(std::abs(x));
    auto pf = fit_power(ts, av);
    out.exponent = pf.exponent;
    out.coefficient = pf.coefficient;
    out.r2 = pf.r2;
    return out;
}

std::string SymmetryReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"schema_version\": 1, \"center\": [" << center.x << ", " << center.y
       << "], \"angular_max_dev\": " << angular_max_dev
       << ", \"monotonicity_violations\": " << monotonicity_violations
       << ", \"trivial\": " << (trivial ? "true" : "false")
       << ", \"normal_derivative_dev\": " << normal_derivative_dev << "}";
    return os.str();
}

SymmetryReport symmetry_report(const GridFunction& u, const Domain& dom) {
    SymmetryReport rep;
    const auto& lat = u.lat;
    const double h = lat.h();

    double mass = 0.0;
    Pt c{0.0, 0.0};
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt x = lat.point(i, j);
            if (dom.signed_distance(x) <= 0.0) continue;
            double w = u.at(i, j);
            mass += w;
            c = c + w * x;
        }
    }
    if (std::abs(mass) < 1e-14 || u.max_abs() < 1e-14) {
        rep.trivial = true;
        return rep;
    }
    rep.center = (1.0 / mass) * c;

    if (lat.dim() == 1) {
        // profile on both sides of the center
        rep.angular_max_dev = 0.0;
        double prev = u.interp(rep.center);
        int violations = 0;
        for (double r = 2.0 * h; r < dom.inradius() * 0.95; r += h) {
            double a = u.interp({rep.center.x + r, 0.0});
            double b = u.interp({rep.center.x - r, 0.0});
            rep.angular_max_dev = std::max(rep.angular_max_dev, std::abs(a - b));
            double mean = 0.5 * (a + b);
            if (mean > prev + 1e-12) ++violations;
            prev = mean;
        }
        rep.monotonicity_violations = violations;
        return rep;
    }

    const int nth = 64;
    double prev_mean = u.interp(rep.center);
    int violations = 0;
    for (double r = 2.0 * h; r < dom.inradius() * 0.95; r += 2.0 * h) {
        double vmin = std::numeric_limits<double>::infinity();
        double vmax = -vmin, acc = 0.0;
        bool inside = true;
        for (int m = 0; m < nth; ++m) {
            double th = 2.0 * kPi * m / nth;
            Pt p = rep.center + Pt{r * std::cos(th), r * std::sin(th)};
            if (dom.signed_distance(p) <= 0.0) {
                inside = false;
                break;
            }
            double val = u.interp(p);
            vmin = std::min(vmin, val);
            vmax = std::max(vmax, val);
            acc += val;
        }
        if (!inside) break;
        rep.angular_max_dev = std::max(rep.angular_max_dev, vmax - vmin);
        double mean = acc / nth;
        if (mean > prev_mean + 1e-12) ++violations;
        prev_mean = mean;
    }
    rep.monotonicity_violations = violations;
    return rep;
}

} // namespace mlnl
