#include "mlnl/solver.hpp"

#include "mlnl/runtime.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace mlnl {

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

struct DiscreteOperator::Factorization {
    Eigen::SparseMatrix<double> P;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool ok = false;
};

DiscreteOperator DiscreteOperator::assemble(const Domain& dom, const Kernel* k,
                                            double a, double h, double C0,
                                            double A0,
                                            std::size_t memory_cap_bytes) {
    if (a < 0.0 || a > A0)
        throw std::invalid_argument("assemble: need 0 <= a <= A0");
    DiscreteOperator op;
    op.dom_ = &dom;
    op.h_ = h;
    op.a_ = a;
    op.C0_ = C0;

    double band = dom.diameter() + 1.0;
    op.lat_ = Lattice::covering(dom, h, band);
    std::size_t est = static_cast<size_t>(op.lat_.size()) * 8ull * 4ull;
    if (est > memory_cap_bytes) {
        std::ostringstream os;
        os << "assemble: estimated memory " << est
           << " bytes exceeds the configured cap; use a coarser h";
        throw std::invalid_argument(os.str());
    }
    op.nodes_ = NodeSet::build(dom, op.lat_);
    if (op.nodes_.rows() == 0)
        throw std::invalid_argument("assemble: no interior nodes at this h");

    if (a > 0.0) {
        if (k == nullptr)
            throw std::invalid_argument("assemble: a > 0 requires a kernel");
        op.kernel_ = *k;
        op.scheme_ =
            QuadratureScheme::build(*k, dom.dim(), h, dom.diameter() + 1.0);
        op.near_factor_ =
            1.0 + a * op.scheme_->near_moment() / (2.0 * dom.dim());
        op.diag_mass_ = a * (op.scheme_->total_mass() + op.scheme_->tail_mass());
    }

    // bounding-box window (support of interior values)
    auto bb = dom.bounding_box();
    int i0, j0, i1, j1;
    op.lat_.locate({bb[0].x, bb[0].y}, i0, j0);
    op.lat_.locate({bb[1].x, bb[1].y}, i1, j1);
    op.bi0_ = std::max(0, i0 - 1);
    op.bj0_ = std::max(0, j0 - 1);
    op.bi1_ = std::min(op.lat_.nx() - 1, i1 + 1);
    op.bj1_ = std::min(op.lat_.ny() - 1, j1 + 1);
    if (op.lat_.dim() == 1) {
        op.bj0_ = 0;
        op.bj1_ = 0;
    }

    // boundary-intercept arms
    const int n = dom.dim();
    op.arms_.resize(static_cast<size_t>(op.nodes_.rows()));
    for (int r = 0; r < op.nodes_.rows(); ++r) {
        int lin = op.nodes_.interior[static_cast<size_t>(r)];
        int i = lin % op.lat_.nx(), j = lin / op.lat_.nx();
        Pt x = op.lat_.point(i, j);
        for (int axis = 0; axis < n; ++axis) {
            for (int dp = 0; dp < 2; ++dp) {
                int dir = dp == 1 ? 1 : -1;
                Arm arm;
                int ni = axis == 0 ? i + dir : i;
                int nj = axis == 1 ? j + dir : j;
                int nlin = op.lat_.index(ni, nj);
                bool nbr_interior =
                    op.lat_.in_bounds(ni, nj) &&
                    op.nodes_.interior_id[static_cast<size_t>(nlin)] >= 0;
                if (nbr_interior) {
                    arm.theta = 1.0;
                    arm.nbr = nlin;
                } else {
                    double th = boundary_arm(dom, x, axis, dir, h);
                    arm.theta = std::max(th, 1e-6); // guard sliver arms
                    arm.nbr = -1;
                    Pt step{};
                    step[axis] = dir * h * arm.theta;
                    arm.intercept = x + step;
                }
                op.arms_[static_cast<size_t>(r)][static_cast<size_t>(
                    2 * axis + dp)] = arm;
            }
        }
    }
    op.scatter_.assign(static_cast<size_t>(op.lat_.size()), 0.0);
    return op;
}

void DiscreteOperator::build_preconditioner() const {
    if (fact_ && fact_->ok) return;
    fact_ = std::make_shared<Factorization>();
    const int R = rows();
    const int n = dom_->dim();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(R) * (2 * n + 1));
    double shift = scheme_ ? a_ * scheme_->tail_mass() : 0.0;
    for (int r = 0; r < R; ++r) {
        double diag = shift;
        for (int axis = 0; axis < n; ++axis) {
            const Arm& ap = arm(r, axis, 1);
            const Arm& am = arm(r, axis, 0);
            double s = ap.theta + am.theta;
            double cp = 2.0 / (h_ * h_ * ap.theta * s);
            double cm = 2.0 / (h_ * h_ * am.theta * s);
            double cd = 2.0 / (h_ * h_ * ap.theta * am.theta);
            diag += near_factor_ * cd;
            if (ap.nbr >= 0) {
                int rc = nodes_.interior_id[static_cast<size_t>(ap.nbr)];
                trip.emplace_back(r, rc, -near_factor_ * cp);
            }
            if (am.nbr >= 0) {
                int rc = nodes_.interior_id[static_cast<size_t>(am.nbr)];
                trip.emplace_back(r, rc, -near_factor_ * cm);
            }
        }
        trip.emplace_back(r, r, diag);
    }
    fact_->P.resize(R, R);
    fact_->P.setFromTriplets(trip.begin(), trip.end());
    fact_->P.makeCompressed();
    fact_->lu.analyzePattern(fact_->P);
    fact_->lu.factorize(fact_->P);
    if (fact_->lu.info() != Eigen::Success)
        throw SolveError("local preconditioner factorization failed");
    fact_->ok = true;
}

void DiscreteOperator::apply_neg(const std::vector<double>& x,
                                 std::vector<double>& y,
                                 const std::vector<Pt>* drift) const {
    const int R = rows();
    y.assign(static_cast<size_t>(R), 0.0);
    const int n = dom_->dim();
    const int nx = lat_.nx();

    // local part with homogeneous boundary arms
    for (int r = 0; r < R; ++r) {
        double lap = 0.0;
        for (int axis = 0; axis < n; ++axis) {
            const Arm& ap = arm(r, axis, 1);
            const Arm& am = arm(r, axis, 0);
            double up = ap.nbr >= 0
                            ? x[static_cast<size_t>(
                                  nodes_.interior_id[static_cast<size_t>(ap.nbr)])]
                            : 0.0;
            double um = am.nbr >= 0
                            ? x[static_cast<size_t>(
                                  nodes_.interior_id[static_cast<size_t>(am.nbr)])]
                            : 0.0;
            lap += unequal_second_diff(um, x[static_cast<size_t>(r)], up,
                                       am.theta, ap.theta, h_);
        }
        y[static_cast<size_t>(r)] = -near_factor_ * lap;
    }

    // upwind drift: -(b . Du)
    if (drift) {
        for (int r = 0; r < R; ++r) {
            Pt b = (*drift)[static_cast<size_t>(r)];
            double acc = 0.0;
            double x0 = x[static_cast<size_t>(r)];
            for (int axis = 0; axis < n; ++axis) {
                double bi = b[axis];
                if (bi == 0.0) continue;
                const Arm& ap = arm(r, axis, 1);
                const Arm& am = arm(r, axis, 0);
                double up = ap.nbr >= 0
                                ? x[static_cast<size_t>(nodes_.interior_id
                                        [static_cast<size_t>(ap.nbr)])]
                                : 0.0;
                double um = am.nbr >= 0
                                ? x[static_cast<size_t>(nodes_.interior_id
                                        [static_cast<size_t>(am.nbr)])]
                                : 0.0;
                double bp = std::max(bi, 0.0), bm = std::max(-bi, 0.0);
                acc += bp * (up - x0) / (ap.theta * h_) -
                       bm * (x0 - um) / (am.theta * h_);
            }
            y[static_cast<size_t>(r)] -= acc;
        }
    }

    if (!scheme_) return;

    // nonlocal convolution over the domain box; exterior values are zero
    std::vector<double>& buf = scatter_;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int r = 0; r < R; ++r)
        buf[static_cast<size_t>(nodes_.interior[static_cast<size_t>(r)])] =
            x[static_cast<size_t>(r)];

    const auto& q = *scheme_;
    const int N = q.half_width();
    const int W = 2 * N + 1;
    const double* wt = q.weights().data();

    parallel_rows(R, [&](int r) {
        int lin = nodes_.interior[static_cast<size_t>(r)];
        int i = lin % nx, j = lin / nx;
        double acc = 0.0;
        if (lat_.dim() == 2) {
            int jlo = std::max(bj0_, j - N), jhi = std::min(bj1_, j + N);
            for (int jj = jlo; jj <= jhi; ++jj) {
                const double* wrow = wt + static_cast<size_t>((jj - j) + N) * W +
                                     (bi0_ - i + N);
                const double* urow = buf.data() + static_cast<size_t>(jj) * nx +
                                     bi0_;
                double row_acc = 0.0;
                int len = bi1_ - bi0_ + 1;
                for (int ii = 0; ii < len; ++ii) row_acc += wrow[ii] * urow[ii];
                acc += row_acc;
            }
        } else {
            int ilo = std::max(bi0_, i - N), ihi = std::min(bi1_, i + N);
            const double* wrow = wt + static_cast<size_t>(ilo - i + N);
            const double* urow = buf.data() + ilo;
            for (int ii = 0; ii <= ihi - ilo; ++ii) acc += wrow[ii] * urow[ii];
        }
        // acc includes the zero-weight diagonal; -L contributes
        // a*(mass)*u - a*conv
        y[static_cast<size_t>(r)] +=
            diag_mass_ * x[static_cast<size_t>(r)] - a_ * acc;
    });
}

std::vector<DiscreteOperator::RowEntry>
DiscreteOperator::materialize_row(int row) const {
    std::vector<RowEntry> out;
    const int n = dom_->dim();
    int lin = nodes_.interior[static_cast<size_t>(row)];
    int i = lin % lat_.nx(), j = lin / lat_.nx();
    double diag = diag_mass_;
    for (int axis = 0; axis < n; ++axis) {
        const Arm& ap = arm(row, axis, 1);
        const Arm& am = arm(row, axis, 0);
        double s = ap.theta + am.theta;
        double cp = 2.0 / (h_ * h_ * ap.theta * s);
        double cm = 2.0 / (h_ * h_ * am.theta * s);
        diag += near_factor_ * 2.0 / (h_ * h_ * ap.theta * am.theta);
        int pi = axis == 0 ? i + 1 : i, pj = axis == 1 ? j + 1 : j;
        int mi = axis == 0 ? i - 1 : i, mj = axis == 1 ? j - 1 : j;
        if (ap.nbr >= 0 || lat_.in_bounds(pi, pj))
            out.push_back({lat_.index(pi, pj), -near_factor_ * cp});
        if (am.nbr >= 0 || lat_.in_bounds(mi, mj))
            out.push_back({lat_.index(mi, mj), -near_factor_ * cm});
    }
    if (scheme_) {
        const auto& q = *scheme_;
        const int N = q.half_width();
        int jlo = lat_.dim() == 2 ? -N : 0, jhi = lat_.dim() == 2 ? N : 0;
        for (int dj = jlo; dj <= jhi; ++dj) {
            for (int di = -N; di <= N; ++di) {
                double wv = lat_.dim() == 2 ? q.weight(di, dj) : q.weight(di, 0);
                if (wv == 0.0) continue;
                int ii = i + di, jj = j + dj;
                if (!lat_.in_bounds(ii, jj)) continue;
                out.push_back({lat_.index(ii, jj), -a_ * wv});
            }
        }
    }
    out.push_back({lin, diag});
    return out;
}

double DiscreteOperator::local_row_sum(int row) const {
    // pure second-difference part: arms coefficients plus the diagonal; the
    // boundary-intercept entries count as exterior nodes
    const int n = dom_->dim();
    double sum = 0.0;
    for (int axis = 0; axis < n; ++axis) {
        const Arm& ap = arm(row, axis, 1);
        const Arm& am = arm(row, axis, 0);
        double s = ap.theta + am.theta;
        sum += 2.0 / (h_ * h_ * ap.theta * s) + 2.0 / (h_ * h_ * am.theta * s) -
               2.0 / (h_ * h_ * ap.theta * am.theta);
    }
    return sum;
}

double DiscreteOperator::upwind_gradient_norm(const GridFunction& u,
                                              int row) const {
    const int n = dom_->dim();
    int lin = nodes_.interior[static_cast<size_t>(row)];
    int i = lin % lat_.nx(), j = lin / lat_.nx();
    double u0 = u.v[static_cast<size_t>(lin)];
    double acc = 0.0;
    for (int axis = 0; axis < n; ++axis) {
        const Arm& ap = arm(row, axis, 1);
        const Arm& am = arm(row, axis, 0);
        double up = ap.nbr >= 0 ? u.v[static_cast<size_t>(ap.nbr)]
                                : u.exterior_value;
        double um = am.nbr >= 0 ? u.v[static_cast<size_t>(am.nbr)]
                                : u.exterior_value;
        double dplus = (up - u0) / (ap.theta * h_);
        double dminus = (u0 - um) / (am.theta * h_);
        double g = std::max({dminus, -dplus, 0.0});
        acc += g * g;
    }
    (void)i;
    (void)j;
    return std::sqrt(acc);
}

double DiscreteOperator::upwind_drift(const GridFunction& u, int row,
                                      Pt b) const {
    const int n = dom_->dim();
    int lin = nodes_.interior[static_cast<size_t>(row)];
    double u0 = u.v[static_cast<size_t>(lin)];
    double acc = 0.0;
    for (int axis = 0; axis < n; ++axis) {
        const Arm& ap = arm(row, axis, 1);
        const Arm& am = arm(row, axis, 0);
        double up = ap.nbr >= 0 ? u.v[static_cast<size_t>(ap.nbr)]
                                : u.exterior_value;
        double um = am.nbr >= 0 ? u.v[static_cast<size_t>(am.nbr)]
                                : u.exterior_value;
        double bi = b[axis];
        acc += std::max(bi, 0.0) * (up - u0) / (ap.theta * h_) -
               std::max(-bi, 0.0) * (u0 - um) / (am.theta * h_);
    }
    return acc;
}

std::vector<double> DiscreteOperator::solve_neg(
    const std::vector<double>& b, double tol_inf,
    const std::vector<Pt>* drift, std::vector<double>& residual_history,
    int& iterations) const {
    build_preconditioner();
    const int R = rows();
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), R);

    auto precond = [&](const std::vector<double>& r) {
        Eigen::Map<const Eigen::VectorXd> rm(r.data(), R);
        Eigen::VectorXd z = fact_->lu.solve(rm);
        return std::vector<double>(z.data(), z.data() + R);
    };

    if (!scheme_ && !drift) {
        // the preconditioner is the exact operator
        Eigen::VectorXd z = fact_->lu.solve(bm);
        std::vector<double> x(z.data(), z.data() + R);
        std::vector<double> Ax;
        apply_neg(x, Ax, nullptr);
        double res = 0.0;
        for (int r = 0; r < R; ++r)
            res = std::max(res, std::abs(Ax[static_cast<size_t>(r)] -
                                         b[static_cast<size_t>(r)]));
        residual_history.push_back(res);
        iterations = 1;
        return x;
    }

    // preconditioned BiCGSTAB
    std::vector<double> x(static_cast<size_t>(R), 0.0);
    std::vector<double> r = b, r0 = b;
    std::vector<double> p(static_cast<size_t>(R), 0.0),
        v(static_cast<size_t>(R), 0.0), s(static_cast<size_t>(R)),
        t(static_cast<size_t>(R));
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;

    auto dotv = [R](const std::vector<double>& u1, const std::vector<double>& u2) {
        double acc = 0.0;
        for (int q = 0; q < R; ++q)
            acc += u1[static_cast<size_t>(q)] * u2[static_cast<size_t>(q)];
        return acc;
    };

    double res = inf_norm(r);
    residual_history.push_back(res);
    const int max_iter = 600;
    int it = 0;
    while (res > tol_inf && it < max_iter) {
        ++it;
        double rho = dotv(r0, r);
        if (rho == 0.0) break;
        if (it == 1) {
            p = r;
        } else {
            double beta = (rho / rho_old) * (alpha / omega);
            for (int q = 0; q < R; ++q)
                p[static_cast<size_t>(q)] =
                    r[static_cast<size_t>(q)] +
                    beta * (p[static_cast<size_t>(q)] -
                            omega * v[static_cast<size_t>(q)]);
        }
        auto ph = precond(p);
        apply_neg(ph, v, drift);
        alpha = rho / dotv(r0, v);
        for (int q = 0; q < R; ++q)
            s[static_cast<size_t>(q)] =
                r[static_cast<size_t>(q)] - alpha * v[static_cast<size_t>(q)];
        if (inf_norm(s) < tol_inf) {
            for (int q = 0; q < R; ++q)
                x[static_cast<size_t>(q)] += alpha * ph[static_cast<size_t>(q)];
            r = s;
            res = inf_norm(r);
            residual_history.push_back(res);
            break;
        }
        auto sh = precond(s);
        apply_neg(sh, t, drift);
        double tt = dotv(t, t);
        if (tt == 0.0) break;
        omega = dotv(t, s) / tt;
        for (int q = 0; q < R; ++q) {
            x[static_cast<size_t>(q)] += alpha * ph[static_cast<size_t>(q)] +
                                         omega * sh[static_cast<size_t>(q)];
            r[static_cast<size_t>(q)] =
                s[static_cast<size_t>(q)] - omega * t[static_cast<size_t>(q)];
        }
        rho_old = rho;
        res = inf_norm(r);
        residual_history.push_back(res);
    }
    iterations = it;
    if (res > tol_inf)
        throw SolveError("linear solve did not reach the residual target",
                         residual_history);
    return x;
}

namespace {

// exterior contributions of L to the right-hand side at one row
double exterior_load(const DiscreteOperator& A, int row,
                     const GridFunction* g) {
    if (!g) return 0.0;
    const auto& lat = A.lattice();
    const int n = A.domain().dim();
    double acc = 0.0;
    for (int axis = 0; axis < n; ++axis) {
        for (int dp = 0; dp < 2; ++dp) {
            const auto& arm = A.arm(row, axis, dp);
            if (arm.nbr >= 0) continue;
            double s = A.arm(row, axis, 1).theta + A.arm(row, axis, 0).theta;
            double c = 2.0 / (A.h() * A.h() * arm.theta * s);
            acc += A.near_factor() * c * g->interp(arm.intercept);
        }
    }
    if (A.scheme()) {
        const auto& q = *A.scheme();
        const int N = q.half_width();
        int lin = A.nodes().interior[static_cast<size_t>(row)];
        int i = lin % lat.nx(), j = lin / lat.nx();
        int jlo = lat.dim() == 2 ? -N : 0, jhi = lat.dim() == 2 ? N : 0;
        double conv = 0.0;
        for (int dj = jlo; dj <= jhi; ++dj) {
            for (int di = -N; di <= N; ++di) {
                double wv = lat.dim() == 2 ? q.weight(di, dj) : q.weight(di, 0);
                if (wv == 0.0) continue;
                int ii = i + di, jj = j + dj;
                bool interior =
                    lat.in_bounds(ii, jj) &&
                    A.nodes().interior_id[static_cast<size_t>(
                        lat.index(ii, jj))] >= 0;
                if (interior) continue;
                double gv = lat.in_bounds(ii, jj)
                                ? g->v[static_cast<size_t>(lat.index(ii, jj))]
                                : g->exterior_value;
                conv += wv * gv;
            }
        }
        acc += A.a() * conv + A.a() * q.tail_mass() * g->exterior_value;
    }
    return acc;
}

GridFunction assemble_solution(const DiscreteOperator& A,
                               const std::vector<double>& x,
                               const GridFunction* g) {
    GridFunction u(A.lattice());
    if (g) {
        u.v = g->v;
        u.exterior_value = g->exterior_value;
        // interior values overwritten below
    }
    for (int r = 0; r < A.rows(); ++r)
        u.v[static_cast<size_t>(A.nodes().interior[static_cast<size_t>(r)])] =
            x[static_cast<size_t>(r)];
    return u;
}

} // namespace

SolveReport solve_linear(const DiscreteOperator& A, const GridFunction& f,
                         const GridFunction* exterior_data, double tol_rel) {
    const int R = A.rows();
    std::vector<double> b(static_cast<size_t>(R));
    double fmax = 0.0;
    for (int r = 0; r < R; ++r) {
        double fv =
            f.v[static_cast<size_t>(A.nodes().interior[static_cast<size_t>(r)])];
        fmax = std::max(fmax, std::abs(fv));
        b[static_cast<size_t>(r)] = -fv + exterior_load(A, r, exterior_data);
    }
    double tol = tol_rel * std::max(fmax, 1e-14);
    if (exterior_data) tol = std::max(tol, tol_rel * exterior_data->max_abs());

    SolveReport rep;
    rep.u = GridFunction(A.lattice());
    std::vector<double> x =
        A.solve_neg(b, tol, nullptr, rep.residual_history, rep.iterations);
    rep.u = assemble_solution(A, x, exterior_data);

    // post-hoc residual of L u = f over interior rows
    std::vector<double> Ax;
    A.apply_neg(x, Ax, nullptr);
    double res = 0.0;
    for (int r = 0; r < R; ++r)
        res = std::max(res, std::abs(Ax[static_cast<size_t>(r)] -
                                     b[static_cast<size_t>(r)]));
    rep.max_interior_residual = res;

    // discrete maximum principle certificate: f <= 0 => u >= min(0, min g)
    bool f_nonpos = true;
    for (int r = 0; r < R && f_nonpos; ++r)
        f_nonpos = f.v[static_cast<size_t>(
                       A.nodes().interior[static_cast<size_t>(r)])] <= 0.0;
    if (f_nonpos) {
        double floor_val = 0.0;
        if (exterior_data)
            floor_val = std::min(
                floor_val,
                *std::min_element(exterior_data->v.begin(),
                                  exterior_data->v.end()));
        for (int r = 0; r < R; ++r) {
            if (x[static_cast<size_t>(r)] < floor_val - 1e-9) {
                rep.max_principle_certificate = false;
                std::ostringstream os;
                os << "row " << r << " value " << x[static_cast<size_t>(r)]
                   << " below floor " << floor_val;
                rep.certificate_witness = os.str();
                break;
            }
        }
    }
    return rep;
}

SolveReport solve_semilinear(const DiscreteOperator& A,
                             const std::function<double(double)>& H,
                             const std::function<double(double)>& f,
                             const SemilinearOptions& opt) {
    const int R = A.rows();
    GridFunction u(A.lattice());
    GridFunction rhs(A.lattice());
    SolveReport rep;
    double omega = opt.omega;
    double prev_change = std::numeric_limits<double>::max();

    for (int m = 0; m < opt.max_iter; ++m) {
        for (int r = 0; r < R; ++r) {
            int lin = A.nodes().interior[static_cast<size_t>(r)];
            double uval = u.v[static_cast<size_t>(lin)];
            double grad = A.upwind_gradient_norm(u, r);
            rhs.v[static_cast<size_t>(lin)] = f(uval) - H(grad);
        }
        SolveReport lin_rep = solve_linear(A, rhs, nullptr, 1e-11);
        double change = 0.0;
        for (size_t idx = 0; idx < u.v.size(); ++idx) {
            double nu = u.v[idx] + omega * (lin_rep.u.v[idx] - u.v[idx]);
            change = std::max(change, std::abs(nu - u.v[idx]));
            u.v[idx] = nu;
        }
        rep.damping_history.push_back(omega);
        rep.residual_history.push_back(change);
        rep.iterations = m + 1;
        if (u.max_abs() > opt.divergence_bound)
            throw SolveError("semilinear iteration diverged",
                             rep.residual_history);
        if (change <= opt.tol) break;
        if (change > prev_change) omega = std::max(0.5 * omega, 1.0 / 64.0);
        prev_change = change;
        if (m + 1 == opt.max_iter)
            throw SolveError("semilinear iteration failed to contract",
                             rep.residual_history);
    }

    // recompute the residual of L u + H(|Du|) - f(u)
    for (int r = 0; r < R; ++r) {
        int lin = A.nodes().interior[static_cast<size_t>(r)];
        double uval = u.v[static_cast<size_t>(lin)];
        double grad = A.upwind_gradient_norm(u, r);
        rhs.v[static_cast<size_t>(lin)] = f(uval) - H(grad);
    }
    std::vector<double> xin(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r)
        xin[static_cast<size_t>(r)] =
            u.v[static_cast<size_t>(A.nodes().interior[static_cast<size_t>(r)])];
    std::vector<double> Ax;
    A.apply_neg(xin, Ax, nullptr);
    double res = 0.0;
    for (int r = 0; r < R; ++r) {
        int lin = A.nodes().interior[static_cast<size_t>(r)];
        // L u - rhs = -(A_neg u) - rhs
        res = std::max(res, std::abs(Ax[static_cast<size_t>(r)] +
                                     rhs.v[static_cast<size_t>(lin)]));
    }
    rep.max_interior_residual = res;
    rep.u = u;
    return rep;
}

SolveReport solve_hjb(const DiscreteOperator& A, const HJBProblem& prob,
                      double tol, int max_sweeps) {
    const int R = A.rows();
    if (prob.controls.empty() || prob.controls.front().empty())
        throw std::invalid_argument("solve_hjb: empty control set");

    GridFunction u(A.lattice());
    std::vector<std::pair<int, int>> policy(static_cast<size_t>(R), {0, 0});
    std::vector<std::uint64_t> policy_hashes;
    SolveReport rep;

    auto policy_hash = [&]() {
        std::uint64_t hsh = 1469598103934665603ull;
        for (auto& pq : policy) {
            hsh = (hsh ^ static_cast<std::uint64_t>(pq.first)) * 1099511628211ull;
            hsh = (hsh ^ static_cast<std::uint64_t>(pq.second)) * 1099511628211ull;
        }
        return hsh;
    };

    auto control_value = [&](int row, const GridFunction& w, int mu, int nu) {
        Pt xp = A.lattice().point(
            A.nodes().interior[static_cast<size_t>(row)]);
        const auto& c =
            prob.controls[static_cast<size_t>(mu)][static_cast<size_t>(nu)];
        return A.upwind_drift(w, row, c.b(xp)) + c.f(xp);
    };
    auto hamiltonian = [&](int row, const GridFunction& w, int* mu_out,
                           int* nu_out) {
        double best_mu = std::numeric_limits<double>::max();
        int bm = 0, bn = 0;
        for (size_t mu = 0; mu < prob.controls.size(); ++mu) {
            double best_nu = -std::numeric_limits<double>::max();
            int bnn = 0;
            for (size_t nu = 0; nu < prob.controls[mu].size(); ++nu) {
                double val = control_value(row, w, static_cast<int>(mu),
                                           static_cast<int>(nu));
                if (val > best_nu) {
                    best_nu = val;
                    bnn = static_cast<int>(nu);
                }
            }
            if (best_nu < best_mu) {
                best_mu = best_nu;
                bm = static_cast<int>(mu);
                bn = bnn;
            }
        }
        if (mu_out) *mu_out = bm;
        if (nu_out) *nu_out = bn;
        return best_mu;
    };

    double res = std::numeric_limits<double>::max();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // (i) freeze the optimal policy at the current iterate, keeping the
        // incumbent control at ties so symmetric problems don't chatter
        bool changed = false;
        for (int r = 0; r < R; ++r) {
            int bm, bn;
            double best = hamiltonian(r, u, &bm, &bn);
            auto [om, on] = policy[static_cast<size_t>(r)];
            double incumbent = control_value(r, u, om, on);
            double tie = 1e-11 * (1.0 + std::abs(best));
            if (std::abs(incumbent - best) <= tie) continue;
            if (policy[static_cast<size_t>(r)] != std::make_pair(bm, bn)) {
                policy[static_cast<size_t>(r)] = {bm, bn};
                changed = true;
            }
        }
        std::uint64_t hsh = policy_hash();
        bool cycled = false;
        size_t cycle_at = 0;
        for (size_t k = 0; k + 1 < policy_hashes.size(); ++k) {
            if (policy_hashes[k] == hsh && changed) {
                cycled = true;
                cycle_at = k;
            }
        }
        policy_hashes.push_back(hsh);

        // (ii) linear solve with the frozen policy
        std::vector<Pt> drift(static_cast<size_t>(R));
        std::vector<double> b(static_cast<size_t>(R));
        for (int r = 0; r < R; ++r) {
            Pt xp = A.lattice().point(
                A.nodes().interior[static_cast<size_t>(r)]);
            auto [mu, nu] = policy[static_cast<size_t>(r)];
            const auto& c =
                prob.controls[static_cast<size_t>(mu)][static_cast<size_t>(nu)];
            drift[static_cast<size_t>(r)] = c.b(xp);
            b[static_cast<size_t>(r)] = c.f(xp); // (-L - b.D) u = f
        }
        int its = 0;
        std::vector<double> hist;
        std::vector<double> x = A.solve_neg(b, tol * 1e-2, &drift, hist, its);
        for (int r = 0; r < R; ++r)
            u.v[static_cast<size_t>(A.nodes().interior[static_cast<size_t>(r)])] =
                x[static_cast<size_t>(r)];

        // residual of the full HJB operator
        std::vector<double> Ax;
        A.apply_neg(x, Ax, nullptr);
        res = 0.0;
        for (int r = 0; r < R; ++r) {
            double ham = hamiltonian(r, u, nullptr, nullptr);
            res = std::max(res, std::abs(-Ax[static_cast<size_t>(r)] + ham));
        }
        rep.residual_history.push_back(res);
        rep.iterations = sweep + 1;
        if (!changed && res <= tol) break;
        if (cycled && res > tol) {
            std::ostringstream os;
            os << "policy cycling detected at sweep " << sweep
               << " (matches sweep " << cycle_at << ")";
            throw SolveError(os.str(), rep.residual_history);
        }
        if (cycled && res <= tol) break; // chattering between optimal ties
        if (sweep + 1 == max_sweeps)
            throw SolveError("policy iteration exceeded max sweeps",
                             rep.residual_history);
    }
    rep.max_interior_residual = res;
    rep.u = u;
    return rep;
}

ComparisonCertificate comparison_check(const GridFunction& sub,
                                       const GridFunction& sup,
                                       const DiscreteOperator& A,
                                       double margin) {
    (void)A;
    ComparisonCertificate cert;
    double slack = std::max(margin, 0.0);
    for (size_t idx = 0; idx < sub.v.size(); ++idx) {
        if (sub.v[idx] > sup.v[idx] + slack + 1e-14) {
            cert.pass = false;
            cert.witness_node = static_cast<int>(idx);
            cert.sub_value = sub.v[idx];
            cert.sup_value = sup.v[idx];
            return cert;
        }
    }
    return cert;
}

} // namespace mlnl
