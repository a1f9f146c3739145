#include <doctest.h>

#include "mlnl/overdetermined.hpp"

#include <cmath>
#include <random>

using namespace mlnl;

namespace {

SolveReport serrin_on(const Domain& dom, double h, double a = 0.0,
                      const Kernel* k = nullptr) {
    auto A = DiscreteOperator::assemble(dom, k, a, h);
    return serrin_solve(A, [](double) { return 0.0; },
                        [](double) { return -1.0; });
}

} // namespace

TEST_SUITE_BEGIN("overdetermined");

TEST_CASE("reflection frame") {
    ReflectionFrame f0{{1, 0}, 0.0};
    Pt m = f0.reflect({1, 0});
    CHECK(m.x == doctest::Approx(-1.0));
    CHECK(m.y == doctest::Approx(0.0));

    ReflectionFrame f1{{1, 0}, 0.5};
    Pt fixed = f1.reflect({0.5, 0.3});
    CHECK(fixed.x == doctest::Approx(0.5));
    CHECK(fixed.y == doctest::Approx(0.3));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        double th = u(rng);
        ReflectionFrame fr{{std::cos(th), std::sin(th)}, u(rng)};
        Pt x{u(rng), u(rng)};
        Pt xx = fr.reflect(fr.reflect(x));
        CHECK(std::abs(xx.x - x.x) < 1e-14);
        CHECK(std::abs(xx.y - x.y) < 1e-14);
        // anti-symmetry of differences is exact by construction
        auto v = [&](Pt p) { return std::sin(p.x) - std::cos(p.y); };
        double vx = v(x) - v(fr.reflect(x));
        double vbar = v(fr.reflect(x)) - v(fr.reflect(fr.reflect(x)));
        CHECK(vx == doctest::Approx(-vbar).epsilon(1e-12));
    }
}

TEST_CASE("serrin trace: ball constancy, ellipse deviation") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto ball_rep = serrin_on(b1, 1.0 / 64.0);
    CHECK(ball_rep.mean_normal_derivative == doctest::Approx(0.5).epsilon(0.01));
    CHECK(ball_rep.normal_derivative_dev <= 0.02);

    Domain ell = Domain::ellipse(1.3, 1.0);
    auto ell_rep = serrin_on(ell, 1.0 / 64.0);
    CHECK(ell_rep.normal_derivative_dev >=
          10.0 * ball_rep.normal_derivative_dev);

    // the mixed problem on the ball stays radially constant
    auto k = make_fractional(1.5, 1.0, 2);
    auto mixed = serrin_on(b1, 1.0 / 32.0, 0.5, &k);
    CHECK(mixed.normal_derivative_dev <= 0.05);

    // hypothesis checks: the truncated kernel is not strictly decreasing
    auto kt = make_fractional(1.5, 1.0, 1.0, 2);
    auto At = DiscreteOperator::assemble(b1, &kt, 0.5, 1.0 / 32.0);
    CHECK_THROWS_AS(serrin_solve(At, [](double) { return 0.0; },
                                 [](double) { return -1.0; }),
                    std::invalid_argument);

    // u > 0 inside is enforced
    auto A = DiscreteOperator::assemble(b1, nullptr, 0.0, 1.0 / 32.0);
    CHECK_THROWS_AS(serrin_solve(A, [](double) { return 0.0; },
                                 [](double) { return 1.0; }),
                    SolveError);
}

TEST_CASE("symmetry is equivalent to a vanishing difference field") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    Lattice lat = Lattice::covering(b1, h, 0.5);

    // reflection-symmetric field: v vanishes at lambda = 0
    GridFunction sym = GridFunction::sample(
        lat, [&](Pt x) { return b1.contains(x) ? std::cos(x.x) + x.y * x.y : 0.0; });
    auto st_sym = moving_plane_state(sym, b1, {1, 0}, 0.0);
    double vmax = 0.0;
    for (int lin : st_sym.cap_nodes)
        vmax = std::max(vmax, std::abs(st_sym.v.v[static_cast<size_t>(lin)]));
    CHECK(vmax <= 1e-4); // interpolation tolerance

    // asymmetric field: v does not vanish
    GridFunction asym = GridFunction::sample(
        lat, [&](Pt x) { return b1.contains(x) ? std::exp(x.x) : 0.0; });
    auto st_asym = moving_plane_state(asym, b1, {1, 0}, 0.0);
    double amax = 0.0;
    for (int lin : st_asym.cap_nodes)
        amax = std::max(amax, std::abs(st_asym.v.v[static_cast<size_t>(lin)]));
    CHECK(amax > 0.1);
    // the state detects the symmetric situation at lambda = 0 on the ball
    CHECK(st_sym.situation != MovingPlaneState::Situation::None);
}

TEST_CASE("moving plane scan on the ball") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto rep = serrin_on(b1, h);
    std::vector<double> lambdas;
    for (double l = 1.0 - h; l > -1e-12; l -= h) lambdas.push_back(l);
    auto scan = moving_plane_scan(rep.u, b1, {1, 0}, lambdas, 1e-3);

    CHECK(scan.triggered);
    CHECK(std::abs(scan.lambda0) <= h + 1e-12);
    CHECK(scan.min_v_nonneg);
    CHECK(scan.worst_min_v >= -1e-3);
    CHECK(scan.to_csv().rfind("lambda,min_v,situation_a,situation_b", 0) == 0);

    // at lambda0 = 0 the ball is fully symmetric: v vanishes identically
    std::vector<double> at0{0.0};
    auto scan0 = moving_plane_scan(rep.u, b1, {1, 0}, at0, 1e-3);
    REQUIRE(scan0.rows.size() == 1);
    CHECK(std::abs(scan0.rows[0].min_v) <= 1e-4);

    // equivariance under translating the whole configuration
    Domain b_shift = Domain::ball(2, {0.25, -0.125}, 1.0);
    auto rep_s = serrin_on(b_shift, h);
    std::vector<double> lambdas_s;
    for (double l : lambdas) lambdas_s.push_back(l + 0.25);
    auto scan_s = moving_plane_scan(rep_s.u, b_shift, {1, 0}, lambdas_s, 1e-3);
    CHECK(scan_s.triggered);
    CHECK(std::abs(scan_s.lambda0 - 0.25) <= h + 1e-12);
    CHECK(scan_s.min_v_nonneg);
}

TEST_CASE("moving plane scan on the ellipse") {
    Domain ell = Domain::ellipse(1.3, 1.0);
    double h = 1.0 / 64.0;
    auto rep = serrin_on(ell, h);

    // axis direction: symmetric, situation B at lambda = 0 with v == 0
    std::vector<double> lambdas;
    for (double l = 1.3 - h; l > -1e-12; l -= h) lambdas.push_back(l);
    auto scan = moving_plane_scan(rep.u, ell, {1, 0}, lambdas, 1e-3);
    CHECK(scan.triggered);
    CHECK(std::abs(scan.lambda0) <= 2.0 * h);
    CHECK(scan.min_v_nonneg);

    // diagonal direction: asymmetric case, v not identically zero at lambda0
    Pt e{std::sqrt(0.5), std::sqrt(0.5)};
    std::vector<double> diag;
    double l_sup = 0.0;
    for (Pt p : ell.boundary_sample(512))
        l_sup = std::max(l_sup, dot(p, e));
    for (double l = l_sup - h; l > -l_sup; l -= h) diag.push_back(l);
    auto scan_d = moving_plane_scan(rep.u, ell, e, diag, 1e-3);
    CHECK(scan_d.triggered);
    CHECK(scan_d.min_v_nonneg);
    double vmax_after = 0.0;
    for (const auto& row : scan_d.rows)
        if (row.lambda <= scan_d.lambda0 + 1e-12)
            vmax_after = std::max(vmax_after, std::abs(row.min_v));
    // not the fully symmetric situation: some nontrivial v remains nearby
    bool nontrivial = false;
    for (const auto& row : scan_d.rows)
        if (std::abs(row.min_v) > 1e-4) nontrivial = true;
    CHECK(nontrivial);
}

TEST_CASE("narrow domain check") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto rep = serrin_on(b1, h);
    const auto& lat = rep.u.lat;

    // the anti-symmetric difference is nonnegative on the mirror side of the
    // plane, so the lemma's halfspace H is the mirror one; both frames share
    // the same reflection map
    double lambda = 0.8;
    ReflectionFrame plane{{1, 0}, lambda};
    ReflectionFrame mirror{{-1, 0}, -lambda};

    GridFunction zero(lat, 0.0);
    auto c0 = narrow_domain_check(zero, mirror, {}, 1.0, 0.1);
    CHECK(c0.pass);

    // thin reflected cap D = R(Omega cap {x1 > lambda})
    GridFunction v(lat, 0.0);
    std::vector<int> dnodes;
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            Pt x = lat.point(i, j);
            double vv = rep.u.at(i, j) - rep.u.interp(plane.reflect(x));
            v.at(i, j) = vv;
            Pt xbar = plane.reflect(x);
            if (mirror.in_halfspace(x) && b1.contains(xbar) &&
                plane.in_halfspace(xbar))
                dnodes.push_back(lat.index(i, j));
        }
    }
    REQUIRE(!dnodes.empty());
    auto cert = narrow_domain_check(v, mirror, dnodes, 0.0, 0.1, 1e-3);
    CHECK(cert.premise_ok);
    CHECK(cert.pass);
    CHECK(cert.sup_neg <= 1e-3);

    // injected negative bump in D: the certificate records failure
    GridFunction bad = v;
    int bi, bj;
    lat.locate({0.65, 0.0}, bi, bj);
    bad.at(bi, bj) = -0.5;
    auto cbad = narrow_domain_check(bad, mirror, dnodes, 1.0, 0.1, 1e-3);
    CHECK(!cbad.pass);
    CHECK(cbad.sup_neg == doctest::Approx(0.5));
    CHECK(cbad.fitted_C > 0.0);

    // D must sit inside the half space
    std::vector<int> outside{lat.index(lat.nx() - 1, 0)};
    CHECK_THROWS(narrow_domain_check(v, mirror, outside, 1.0, 0.1));
}

TEST_CASE("hopf quotient") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto rep = serrin_on(b1, h);

    std::vector<double> tgrid;
    for (double t = 0.2; t >= h; t *= 0.7) tgrid.push_back(t);
    auto est = hopf_ratio(rep.u, b1, {1, 0}, tgrid);
    CHECK(est.liminf == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(est.liminf - 0.5) <= 0.05);
    CHECK(est.truncated); // the grid dips below 2h

    GridFunction zero(rep.u.lat, 0.0);
    auto z = hopf_ratio(zero, b1, {1, 0}, tgrid);
    CHECK(z.liminf == 0.0);
}

TEST_CASE("corner growth fits") {
    double h = 1.0 / 256.0;
    Lattice lat = Lattice::covering_box(2, h, {-0.5, -0.5}, {0.5, 0.5});
    std::vector<double> tgrid;
    for (double t = 0.12; t >= 2.0 * h; t *= 0.8) tgrid.push_back(t);

    // w = (-x1) x2 grows exactly quadratically along etabar
    GridFunction w = GridFunction::sample(lat, [](Pt x) { return -x.x * x.y; });
    auto cg = corner_growth(w, tgrid);
    CHECK(cg.exponent == doctest::Approx(2.0).epsilon(0.025));
    CHECK(cg.coefficient == doctest::Approx(1.0).epsilon(0.05));
    CHECK(cg.truncated); // below 4h the grid cannot support the fit

    // symmetric case: the field vanishes identically
    GridFunction zero(lat, 0.0);
    auto cz = corner_growth(zero, tgrid);
    CHECK(cz.degenerate);

    // v = (-x1) delta^{1.3} about the tangent ball: o(t^2) mechanism
    Domain tangent = Domain::ball(2, {0, 0.5}, 0.5);
    GridFunction v = GridFunction::sample(lat, [&](Pt x) {
        return -x.x * std::pow(tangent.signed_distance(x), 1.3);
    });
    auto cv = corner_growth(v, tgrid);
    CHECK(cv.exponent == doctest::Approx(2.3).epsilon(0.05));
    CHECK(cv.exponent > 2.0);
}

TEST_CASE("symmetry report") {
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    double h = 1.0 / 64.0;
    auto rep = serrin_on(b1, h);
    auto sym = symmetry_report(rep.u, b1);
    CHECK(!sym.trivial);
    CHECK(norm(sym.center) <= 2.0 * h);
    CHECK(sym.angular_max_dev <= 1e-3);
    CHECK(sym.monotonicity_violations == 0);

    Domain ell = Domain::ellipse(1.3, 1.0);
    auto rep_e = serrin_on(ell, h);
    auto sym_e = symmetry_report(rep_e.u, ell);
    CHECK(sym_e.angular_max_dev >= 10.0 * sym.angular_max_dev);

    GridFunction zero(rep.u.lat, 0.0);
    auto sym_z = symmetry_report(zero, b1);
    CHECK(sym_z.trivial);
}

TEST_SUITE_END();
