#include "mlnl/barriers.hpp"

#include "mlnl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mlnl {

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

double ExpBarrier::q(Pt x) const {
    double cap = 2.0 * (4.0 * r) * (4.0 * r);
    return std::min(norm2(x), cap);
}

double ExpBarrier::v(Pt x) const {
    double Q = (4.0 * r) * (4.0 * r);
    return std::exp(-eta * q(x)) - std::exp(-eta * Q);
}

ExpBarrier::SignedLog ExpBarrier::log_v(Pt x) const {
    double Q = (4.0 * r) * (4.0 * r);
    double qx = q(x);
    SignedLog out;
    if (qx == Q) return out; // exactly zero on |x| = 4r
    if (qx < Q) {
        out.sign = 1;
        out.log_mag = -eta * qx + std::log1p(-std::exp(-eta * (Q - qx)));
    } else {
        out.sign = -1;
        out.log_mag = -eta * Q + std::log1p(-std::exp(-eta * (qx - Q)));
    }
    return out;
}

ExpBarrier build_exp_barrier(double r, int n, double A0, const Kernel& k) {
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("exp barrier: r must lie in (0,1]");
    const auto& dom = k.dominating();
    double omega = sphere_area(n);
    double lam = dom.lambda;
    double al = dom.alpha;
    // the three integrals of the construction, normalized by r^{2-alpha}:
    //   int_{|y|<r} 2|y|^2 k_hat,  int_{r<|y|<1} (8r)^2 k_hat,
    //   (8r)^2 int_{|y|>1} J
    double i1 = 2.0 * lam * omega * std::pow(r, 2.0 - al) / (2.0 - al);
    double i2;
    if (al == 1.0)
        i2 = 64.0 * r * r * lam * omega * (1.0 / r - 1.0);
    else
        i2 = 64.0 * r * r * lam * omega / al * (std::pow(r, -al) - 1.0);
    double i3 = 64.0 * r * r * dom.kappa1;
    double kappa_L = (i1 + i2 + i3) / std::pow(r, 2.0 - al);

    ExpBarrier b;
    b.r = r;
    b.n = n;
    b.kappa_L = kappa_L;
    b.eta = (n + A0 * kappa_L) / (r * r);
    b.kappa_tilde = b.eta * (4.0 * r) * (4.0 * r) / r;
    return b;
}

PsiBarrier::PsiBarrier(double q, const DominatingKernel& dom,
                       double upsilon_gamma)
    : q_(q), dom_(dom) {
    if (q <= 0.0) throw std::invalid_argument("psi barrier: q must be positive");

    // s(q): psi'(s) = 2 exp(-q(s + A(s))) - 1 = 1/2  <=>
    // s + A(s) = log(4/3)/q, increasing in s
    double target = std::log(4.0 / 3.0) / q_;
    auto g = [&](double s) { return s + theta_antiderivative(dom_, s) - target; };
    if (g(1.0) <= 0.0) {
        s_q_ = 1.0;
    } else {
        s_q_ = bisect(g, 1e-300, 1.0, 1e-14);
    }
    sigma1_ = std::min({s_q_ / 8.0, 1.0, upsilon_gamma});

    // tabulate psi on [0, min(1, 4 sigma1_ ... )]; the field only ever needs
    // values up to sigma1, keep headroom for tests
    table_hi_ = std::min(1.0, 8.0 * sigma1_);
    const int M = 8192;
    table_.assign(M + 1, 0.0);
    double acc = 0.0;
    auto dpsi = [&](double s) { return psi_d1(s); };
    for (int m = 1; m <= M; ++m) {
        double lo = table_hi_ * (m - 1) / M, hi = table_hi_ * m / M;
        acc += integrate(dpsi, lo, hi, 1e-14);
        table_[static_cast<size_t>(m)] = acc;
    }
}

double PsiBarrier::psi_d1(double s) const {
    if (s < 0.0) return 1.0;
    double A = theta_antiderivative(dom_, std::min(s, 1.0));
    return 2.0 * std::exp(-q_ * (s + A)) - 1.0;
}

double PsiBarrier::psi_d2(double s) const {
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    double A = theta_antiderivative(dom_, std::min(s, 1.0));
    return -2.0 * q_ * (1.0 + theta(dom_, std::min(s, 1.0))) *
           std::exp(-q_ * (s + A));
}

double PsiBarrier::psi(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= table_hi_) return table_.back();
    double f = s / table_hi_ * (static_cast<double>(table_.size()) - 1.0);
    int i = static_cast<int>(f);
    double t = f - i;
    return (1.0 - t) * table_[static_cast<size_t>(i)] +
           t * table_[static_cast<size_t>(i) + 1];
}

std::function<double(Pt)> PsiBarrier::field(const Domain& dom, double r) const {
    double cap = psi(sigma1_);
    double s1 = sigma1_;
    const Domain* dp = &dom;
    const PsiBarrier* self = this;
    return [dp, r, cap, s1, self](Pt x) {
        double d = dp->signed_distance(x);
        if (d <= 0.0) return 0.0;
        double s = d / r;
        if (s >= s1) return cap;
        return self->psi(s);
    };
}

PsiBarrier build_psi_barrier(double q, const DominatingKernel& dom,
                             double upsilon_gamma) {
    return PsiBarrier(q, dom, upsilon_gamma);
}

std::string ViolationReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"schema_version\": 1, \"region\": \"" << region
       << "\", \"claim\": \"" << claim
       << "\", \"max_violation\": " << max_violation << ", \"worst_node\": ["
       << worst_node.x << ", " << worst_node.y
       << "], \"excluded_nodes\": " << excluded_nodes
       << ", \"checked_nodes\": " << checked_nodes << "}";
    return os.str();
}

ViolationReport check_lattice_operator_sign(
    const std::function<double(Pt)>& field, double far_value, const Kernel& k,
    double a, int dim, double h, Pt box_lo, Pt box_hi, double band,
    const std::vector<Pt>& sample_points,
    const std::function<double(Pt)>& bound, bool lower_bound, double slack,
    const std::string& region_name, const std::string& claim_name) {
    Lattice lat = Lattice::covering_box(
        dim, h, {box_lo.x - band, box_lo.y - band},
        {box_hi.x + band, box_hi.y + band});
    GridFunction u = GridFunction::sample(lat, field);
    u.exterior_value = far_value;
    QuadratureScheme q = QuadratureScheme::build(k, dim, h, band);

    ViolationReport rep;
    rep.region = region_name;
    rep.claim = claim_name;
    for (Pt p : sample_points) {
        int i, j;
        lat.locate(p, i, j);
        Pt node = lat.point(i, j);
        double val = laplace_h(u, i, j);
        if (a > 0.0) val += a * nonlocal_eval(k, u, i, j, q);
        double bnd = bound(node);
        double viol = lower_bound ? (bnd - slack) - val : val - (bnd + slack);
        rep.checked_nodes++;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.worst_node = node;
        }
    }
    return rep;
}

ViolationReport verify_supersolution(const ExpBarrier& b, const Kernel& k,
                                     double a, double h, int samples) {
    double r = b.r;
    // deterministic stratified sample of the annulus B_4r \ B_r
    std::vector<Pt> pts;
    int rings = std::max(4, samples / 32);
    int per_ring = std::max(8, samples / rings);
    for (int iring = 0; iring < rings; ++iring) {
        double rad = r * (1.0 + 3.0 * (iring + 0.5) / rings);
        for (int m = 0; m < per_ring; ++m) {
            double th = 2.0 * kPi * (m + 0.31 * (iring % 3)) / per_ring;
            if (b.n == 1) {
                pts.push_back({(m % 2 ? rad : -rad), 0.0});
            } else {
                pts.push_back({rad * std::cos(th), rad * std::sin(th)});
            }
        }
    }
    double far = -std::exp(-b.eta * (4 * r) * (4 * r)) +
                 std::exp(-2.0 * b.eta * (4 * r) * (4 * r));
    auto fld = [&](Pt x) { return b.phi(x); };
    auto zero = [](Pt) { return 0.0; };
    return check_lattice_operator_sign(
        fld, far / r, k, a, b.n, h, {-5.7 * r, b.n == 2 ? -5.7 * r : 0.0},
        {5.7 * r, b.n == 2 ? 5.7 * r : 0.0}, 6.0 * r, pts, zero,
        /*lower_bound=*/true, /*slack=*/0.0, "annulus B_4r \\ B_r",
        "L phi_r >= 0");
}

ViolationReport verify_supersolution(const PsiBarrier& b, const Domain& dom,
                                     const Kernel& k, double a, double r,
                                     int samples, double slack_rel) {
    ViolationReport rep;
    rep.region = "collar D_{eta r}";
    rep.claim = "L Phi_r <= -(1/r^2) Theta(delta/r)";

    double eta = b.sigma1() / 8.0;
    Pt x0 = dom.boundary_point(0.0);
    Pt nin = dom.inward_normal(x0);
    auto fld = b.field(dom, r);

    for (int j = 1; j <= samples; ++j) {
        double d = eta * r * std::pow(2.0, -j);
        Pt x = x0 + d * nin;
        double delta = dom.signed_distance(x);
        if (delta <= 0.0) {
            rep.excluded_nodes++;
            continue;
        }
        double s = delta / r;
        // local part, semi-analytic: psi'(s) Lap(delta)/r + psi''(s)|Dd|^2/r^2
        double lap_delta;
        if (dom.shape() == Domain::Shape::Ball && dom.dim() == 2)
            lap_delta = -1.0 / dist(x, dom.center());
        else if (dom.dim() == 1)
            lap_delta = 0.0;
        else
            lap_delta = laplacian_fn(
                [&](Pt p) { return dom.signed_distance(p); }, x, dom.dim(),
                std::min(1e-5, 0.25 * delta));
        double local = b.psi_d1(s) * lap_delta / r +
                       b.psi_d2(s) / (r * r); // |D delta| = 1 in the collar

        FieldQuadOptions fq;
        fq.outer_radius = dom.diameter() + 1.0;
        fq.far_value = 0.0;
        fq.angular_points = 512;
        fq.inner_floor = delta / 32.0;
        fq.compensation_eps = 0.0; // psi'' blows up at 0+: skip, the missing
                                   // mass only strengthens the upper bound
        double nl = nonlocal_eval_fn(k, fld, x, fq);
        double val = local + a * nl;
        double bnd = -(1.0 / (r * r)) * b.theta_at(std::min(s, 1.0));
        double viol = val - bnd * (1.0 - slack_rel);
        rep.checked_nodes++;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.worst_node = x;
        }
    }
    return rep;
}

LogInequalityReport log_inequality_check(double theta_const, double zeta,
                                         const std::vector<double>& r_grid,
                                         const std::vector<double>& z_grid) {
    if (!(theta_const > 0.0 && theta_const < 1.0))
        throw std::invalid_argument("log_inequality_check: theta in (0,1)");
    if (!(zeta > 0.0 && zeta < 1.0))
        throw std::invalid_argument("log_inequality_check: zeta in (0,1)");

    LogInequalityReport rep;
    auto G = [&](double rr) {
        return std::log(theta_const) / std::log(rr * theta_const) -
               std::pow(rr, zeta);
    };
    // scan for the sign change of G, then bisect
    double lo = 1e-8, hi = 1.0 - 1e-12;
    if (G(hi) >= 0.0) {
        rep.r_theta = 1.0;
    } else {
        double prev = lo;
        double rt = -1.0;
        for (int kk = 1; kk <= 512; ++kk) {
            double rr = std::pow(10.0, -8.0 + 8.0 * kk / 512.0);
            rr = std::min(rr, hi);
            if (G(prev) > 0.0 && G(rr) <= 0.0) {
                rt = bisect(G, prev, rr, 1e-14);
                break;
            }
            prev = rr;
        }
        rep.r_theta = rt > 0.0 ? rt : 1.0;
    }

    for (double rr : r_grid) {
        for (double zz : z_grid) {
            double z = zz >= 1.0 / (theta_const * rr) ? zz
                                                      : 1.0 / (theta_const * rr);
            double lhs = std::log(rr * z);
            double rhs = std::pow(rr, zeta) * std::log(z);
            bool ok = lhs >= rhs - 1e-14;
            rep.entries.push_back({rr, z, lhs, rhs, ok});
            rep.checked++;
            if (!ok) rep.violations++;
        }
    }
    return rep;
}

} // namespace mlnl
