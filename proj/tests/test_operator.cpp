#include <doctest.h>

#include "mlnl/geometry.hpp"
#include "mlnl/grid.hpp"
#include "mlnl/kernels.hpp"
#include "mlnl/nonlocal.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace mlnl;

namespace {

// I[|x|^2] for the truncated fractional kernel (support B_1): the radial
// oracle int_{B1} |y|^2 k(y) dy
double quadratic_oracle(double alpha, double lambda, int n) {
    return sphere_area(n) * lambda *
           oracles::integrate(
               [&](double s) { return std::pow(s, n + 1 - n - alpha); }, 1e-12,
               1.0, 100000);
}

GridFunction sample_with_band(const Domain& dom, double h, double band,
                              const std::function<double(Pt)>& f) {
    Lattice lat = Lattice::covering(dom, h, band);
    return GridFunction::sample(lat, f);
}

} // namespace

TEST_SUITE_BEGIN("operator");

TEST_CASE("affine annihilation for I and L") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 32.0;
    double R = b1.diameter() + 1.0;
    auto affine = [](Pt x) { return 1.0 + 3.0 * x.x - 0.5 * x.y; };
    GridFunction u = sample_with_band(b1, h, R, affine);

    std::vector<Kernel> kernels;
    for (double alpha : {0.5, 1.0, 1.5})
        kernels.push_back(make_fractional(alpha, 1.0, 2));
    kernels.push_back(make_subordinate(0.3, 0.7, 2));

    int ic, jc;
    u.lat.locate({0.25, -0.125}, ic, jc);
    for (const auto& k : kernels) {
        // symmetric-extension tail: the second differences cancel exactly
        auto q = QuadratureScheme::build(k, 2, h, R, -1.0, false);
        CHECK(std::abs(nonlocal_eval(k, u, ic, jc, q)) < 1e-10);
        GridFunction Lu = apply_L(b1, 1.0, k, u, q, false);
        CHECK(std::abs(Lu.at(ic, jc)) < 1e-10);
    }

    // constant annihilation is exact with the matching exterior value
    GridFunction c(u.lat, 4.25);
    c.exterior_value = 4.25;
    auto k = kernels.front();
    auto q = QuadratureScheme::build(k, 2, h, R);
    CHECK(nonlocal_eval(k, c, ic, jc, q) == 0.0);
}

TEST_CASE("quadratic oracle: I[|x|^2] = 2 pi for the truncated alpha=1 kernel") {
    double oracle = quadratic_oracle(1.0, 1.0, 2);
    CHECK(oracle == doctest::Approx(2.0 * M_PI).epsilon(1e-6));

    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.0, 1.0, 1.0, 2);
    double h = 1.0 / 64.0;
    GridFunction u = sample_with_band(b1, h, b1.diameter() + 1.0,
                                      [](Pt x) { return norm2(x); });
    auto q = QuadratureScheme::build(k, 2, h, b1.diameter() + 1.0, -1.0, false);
    for (Pt p : {Pt{0, 0}, Pt{0.25, 0}, Pt{-0.125, 0.5}}) {
        int i, j;
        u.lat.locate(p, i, j);
        double val = nonlocal_eval(k, u, i, j, q);
        CHECK(val == doctest::Approx(2.0 * M_PI).epsilon(0.02));
    }
}

TEST_CASE("h-refinement toward the quadratic oracle at order >= 1") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.0, 1.0, 1.0, 2);
    double target = 2.0 * M_PI;
    std::vector<double> errs;
    for (double h : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0}) {
        GridFunction u = sample_with_band(b1, h, 2.0,
                                          [](Pt x) { return norm2(x); });
        auto q = QuadratureScheme::build(k, 2, h, 2.0, -1.0, false);
        int i, j;
        u.lat.locate({0, 0}, i, j);
        errs.push_back(std::abs(nonlocal_eval(k, u, i, j, q) - target));
    }
    CHECK(errs[1] <= errs[0] / 1.8 + 1e-12);
    CHECK(errs[2] <= errs[1] / 1.8 + 1e-12);
}

TEST_CASE("scheme weights: nonnegative and symmetric") {
    auto k = make_subordinate(0.4, 0.6, 2);
    auto q = QuadratureScheme::build(k, 2, 1.0 / 16.0, 1.0);
    int N = q.half_width();
    for (int dj = -N; dj <= N; ++dj) {
        for (int di = -N; di <= N; ++di) {
            CHECK(q.weight(di, dj) >= 0.0);
            CHECK(q.weight(di, dj) == q.weight(-di, -dj));
        }
    }
}

TEST_CASE("translation equivariance away from the band") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.2, 1.0, 2);
    double h = 1.0 / 32.0;
    auto bump = [](Pt x) {
        double r2 = norm2(x);
        return r2 < 0.25 ? std::exp(-1.0 / (0.25 - r2)) : 0.0;
    };
    GridFunction u1 = sample_with_band(b1, h, 3.0, bump);
    int shift = 3;
    GridFunction u2 = sample_with_band(b1, h, 3.0, [&](Pt x) {
        return bump({x.x - shift * h, x.y});
    });
    auto q = QuadratureScheme::build(k, 2, h, 3.0);
    int i, j;
    u1.lat.locate({0.125, 0.0625}, i, j);
    double a1 = nonlocal_eval(k, u1, i, j, q);
    double a2 = nonlocal_eval(k, u2, i + shift, j, q);
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
}

TEST_CASE("quadrature monotonicity") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.5, 1.0, 2);
    double h = 1.0 / 32.0;
    auto q = QuadratureScheme::build(k, 2, h, 3.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        GridFunction u = sample_with_band(b1, h, 3.0, [&](Pt x) {
            return std::sin(3 * x.x + trial) * std::cos(2 * x.y);
        });
        int i, j;
        u.lat.locate({0.25, -0.25}, i, j);
        // v >= u with equality at the evaluation node
        GridFunction v = u;
        Pt x0 = u.lat.point(i, j);
        for (int jj = 0; jj < v.lat.ny(); ++jj)
            for (int ii = 0; ii < v.lat.nx(); ++ii) {
                Pt p = v.lat.point(ii, jj);
                double w = norm2(p - x0);
                v.at(ii, jj) += w > 0 ? unif(rng) * std::min(w, 1.0) : 0.0;
            }
        CHECK(nonlocal_eval(k, u, i, j, q) <=
              nonlocal_eval(k, v, i, j, q) + 1e-12);
    }
}

TEST_CASE("apply_L: torsion field, affine field, quadratic with nonlocal part") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto k = make_fractional(1.0, 1.0, 1.0, 2);
    auto q = QuadratureScheme::build(k, 2, h, b1.diameter() + 1.0, -1.0, false);

    // a = 0: torsion function killed outside the ball; boundary arms make the
    // scheme exact on per-axis quadratics
    GridFunction u = sample_with_band(b1, h, b1.diameter() + 1.0, [&](Pt x) {
        return b1.contains(x) ? (1.0 - norm2(x)) / 4.0 : 0.0;
    });
    GridFunction Lu = apply_L(b1, 0.0, k, u, q, true);
    double max_err = 0.0;
    for (int j = 0; j < u.lat.ny(); ++j)
        for (int i = 0; i < u.lat.nx(); ++i)
            if (b1.signed_distance(u.lat.point(i, j)) > 0.0)
                max_err = std::max(max_err, std::abs(Lu.at(i, j) + 1.0));
    CHECK(max_err <= 5e-3);

    // a = 1 on the full quadratic: L|x|^2 = 4 + 2 pi
    GridFunction w = sample_with_band(b1, h, b1.diameter() + 1.0,
                                      [](Pt x) { return norm2(x); });
    GridFunction Lw = apply_L(b1, 1.0, k, w, q, false);
    int i0, j0;
    w.lat.locate({0.25, 0}, i0, j0);
    CHECK(Lw.at(i0, j0) == doctest::Approx(4.0 + 2.0 * M_PI).epsilon(0.02));

    // R_trunc below the diameter is rejected
    auto q_small = QuadratureScheme::build(k, 2, h, 1.0);
    CHECK_THROWS(apply_L(b1, 0.0, k, u, q_small, true));
}

TEST_CASE("scaled operator: change of variables identity") {
    auto k = make_fractional(1.5, 1.0, 1.0, 2); // truncated: finite moments
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double r = 0.5, h = 1.0 / 32.0;

    // r = 1 reduces to the plain evaluation
    {
        GridFunction u = sample_with_band(b1, h, 2.0,
                                          [](Pt x) { return norm2(x); });
        auto q = QuadratureScheme::build(k, 2, h, 2.0, -1.0, false);
        auto k1 = rescale_kernel(k, 1.0);
        auto q1 = QuadratureScheme::build(k1, 2, h, 2.0, -1.0, false);
        int i, j;
        u.lat.locate({0.25, 0.125}, i, j);
        CHECK(nonlocal_eval(k, u, i, j, q) ==
              doctest::Approx(scaled_nonlocal_eval(k1, 1.0, u, i, j, q1))
                  .epsilon(1e-14));
    }

    // r^{2-alpha} I_r v(x) = r^2 I u(r x) with v(y) = u(r y), u = |x|^2
    auto kr = rescale_kernel(k, r);
    double alpha = k.alpha();
    GridFunction v = sample_with_band(b1, h, 3.0, [&](Pt y) {
        return norm2(r * y);
    });
    auto qv = QuadratureScheme::build(kr, 2, h, 3.0, -1.0, false);
    int iv, jv;
    v.lat.locate({0.25, 0.125}, iv, jv);
    double lhs = std::pow(r, 2.0 - alpha) *
                 scaled_nonlocal_eval(kr, r, v, iv, jv, qv);

    double hr = r * h;
    GridFunction u = sample_with_band(b1, hr, 1.5,
                                      [](Pt x) { return norm2(x); });
    auto qu = QuadratureScheme::build(k, 2, hr, 1.5, -1.0, false);
    int iu, ju;
    u.lat.locate({r * 0.25, r * 0.125}, iu, ju);
    double rhs = r * r * nonlocal_eval(k, u, iu, ju, qu);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));

    // affine annihilation carries over to the scaled operator
    GridFunction aff = sample_with_band(b1, h, 3.0,
                                        [](Pt x) { return 2.0 - 0.7 * x.x; });
    CHECK(std::abs(scaled_nonlocal_eval(kr, r, aff, iv, jv, qv)) < 1e-10);
}

TEST_CASE("z bracket: degenerate cases and the product rule") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto k = make_fractional(1.0, 1.0, 2);
    double R = b1.diameter() + 1.0;
    Lattice lat = Lattice::covering(b1, h, R);
    auto q = QuadratureScheme::build(k, 2, h, R);

    GridFunction delta = GridFunction::sample(
        lat, [&](Pt x) { return b1.signed_distance(x); });
    int i, j;
    lat.locate({0.5, 0.25}, i, j);

    // v constant: first factor vanishes identically
    GridFunction c(lat, 3.0);
    c.exterior_value = 3.0;
    CHECK(z_bracket(c, delta, k, i, j, q) == 0.0);

    // Z[delta, delta] is an integral of squares
    CHECK(z_bracket(delta, delta, k, i, j, q) >= 0.0);

    // product rule: L(v dtilde) = dtilde Lv + v L dtilde + 2 D dtilde . Dv
    //               + Z[v, dtilde] at a = 1
    auto sd = smoothed_distance(b1, 0.5);
    GridFunction dt = GridFunction::sample(lat, [&](Pt x) { return sd(x); });
    GridFunction v = GridFunction::sample(lat, [](Pt x) { return std::cos(x.x); });
    GridFunction vd = GridFunction::sample(
        lat, [&](Pt x) { return std::cos(x.x) * sd(x); });

    double max_resid = 0.0;
    for (Pt p : {Pt{0, 0}, Pt{0.5, 0.25}, Pt{-0.25, 0.625}, Pt{0.84375, 0.0},
                 Pt{0.0, -0.46875}, Pt{0.375, -0.375}}) {
        int ii, jj;
        lat.locate(p, ii, jj);
        auto L_of = [&](const GridFunction& g) {
            return laplace_h(g, ii, jj) + nonlocal_eval(k, g, ii, jj, q);
        };
        double dvx = (v.at(ii + 1, jj) - v.at(ii - 1, jj)) / (2 * h);
        double dvy = (v.at(ii, jj + 1) - v.at(ii, jj - 1)) / (2 * h);
        double ddx = (dt.at(ii + 1, jj) - dt.at(ii - 1, jj)) / (2 * h);
        double ddy = (dt.at(ii, jj + 1) - dt.at(ii, jj - 1)) / (2 * h);
        double resid = L_of(vd) - dt.at(ii, jj) * L_of(v) -
                       v.at(ii, jj) * L_of(dt) -
                       2.0 * (dvx * ddx + dvy * ddy) -
                       z_bracket(v, dt, k, ii, jj, q);
        max_resid = std::max(max_resid, std::abs(resid));
    }
    // O(h^2) identity residual: ~4x the fine-grid (h = 1/128) tolerance
    CHECK(max_resid <= 4.2e-4);
}

TEST_CASE("L delta profile recovers the boundary growth rates") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    LDeltaOptions opt;
    opt.rays = 2;
    opt.levels = 14;

    // alpha = 1.5: |L delta| ~ delta^{1-alpha}
    {
        auto k = make_fractional(1.5, 1.0, 2);
        auto prof = l_delta_profile(b1, k, 1.0, opt);
        CHECK(prof.fitted_exponent == doctest::Approx(-0.5).epsilon(0.3));
        CHECK(std::abs(prof.fitted_exponent - (-0.5)) <= 0.15);
    }
    // alpha = 0.5: bounded profile
    {
        auto k = make_fractional(0.5, 1.0, 2);
        auto prof = l_delta_profile(b1, k, 1.0, opt);
        CHECK(std::abs(prof.fitted_exponent) <= 0.15);
    }
    // alpha = 1: linear in -log delta with a solid fit
    {
        auto k = make_fractional(1.0, 1.0, 2);
        auto prof = l_delta_profile(b1, k, 1.0, opt);
        CHECK(prof.log_r2 >= 0.95);
        CHECK(prof.log_slope > 0.0);
        CHECK(prof.to_csv().rfind("delta,abs_L_delta,ray_id", 0) == 0);
    }
}

TEST_SUITE_END();
