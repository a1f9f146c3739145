#include "mlnl/quadrature.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlnl {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa,
                double b, double fb, double m, double fm, double whole,
                double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double integrate_graded_left(const std::function<double(double)>& f, double a,
                             double b, double tol, double ratio,
                             double floor_frac) {
    if (b <= a) return 0.0;
    double len = b - a;
    double total = 0.0;
    double hi = b;
    double frac = ratio;
    while (frac * len > floor_frac * len) {
        double lo = a + frac * len;
        total += integrate(f, lo, hi, tol * frac);
        hi = lo;
        frac *= ratio;
    }
    // innermost sliver: one more panel down to a, endpoint nudged off the
    // singularity
    double lo = a + frac * len;
    total += integrate(f, lo, hi, tol * frac);
    return total;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    out.npts = static_cast<int>(x.size());
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matched points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    out.slope = (n * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (out.slope * x[i] + out.intercept);
        ss_res += r * r;
    }
    out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    PowerFit out;
    if (lx.size() < 2) {
        out.npts = static_cast<int>(lx.size());
        return out;
    }
    LineFit lf = fit_line(lx, ly);
    out.exponent = lf.slope;
    out.coefficient = std::exp(lf.intercept);
    out.r2 = lf.r2;
    out.npts = lf.npts;
    return out;
}

PowerFit fit_power_with_floor(const std::vector<double>& x,
                              const std::vector<double>& y, double floor_h) {
    PowerFit best;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(x[i]);
            ly.push_back(std::log(y[i]));
        }
    }
    best.npts = static_cast<int>(lx.size());
    if (lx.size() < 2) return best;

    double mean_ly = 0.0, ss_tot = 0.0;
    for (double v : ly) mean_ly += v;
    mean_ly /= static_cast<double>(ly.size());
    for (double v : ly) ss_tot += (v - mean_ly) * (v - mean_ly);

    double best_sse = std::numeric_limits<double>::max();
    for (double p = 0.01; p <= 1.5; p += 0.005) {
        // profile out the amplitude: log C = mean(log y - log model)
        double mc = 0.0;
        std::vector<double> lm(lx.size());
        for (size_t i = 0; i < lx.size(); ++i) {
            lm[i] = std::log(std::pow(lx[i] + floor_h, p) -
                             std::pow(floor_h, p));
            mc += ly[i] - lm[i];
        }
        mc /= static_cast<double>(lx.size());
        double sse = 0.0;
        for (size_t i = 0; i < lx.size(); ++i) {
            double r = ly[i] - (lm[i] + mc);
            sse += r * r;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best.exponent = p;
            best.coefficient = std::exp(mc);
        }
    }
    best.r2 = ss_tot > 0.0 ? 1.0 - best_sse / ss_tot : 1.0;
    return best;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace mlnl
