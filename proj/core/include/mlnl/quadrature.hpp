#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace mlnl {

/// Adaptive Simpson quadrature on [a, b]. Recursion splits until the local
/// Richardson estimate is below tol (absolute).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 40);

/// Same, but with geometric panel grading toward the left endpoint. Use for
/// integrands with an integrable singularity at a (e.g. s^{-beta}, beta < 1).
/// Panels are [a + (b-a) q^{k+1}, a + (b-a) q^k] down to a floor near a.
double integrate_graded_left(const std::function<double(double)>& f, double a,
                             double b, double tol = 1e-12, double ratio = 0.5,
                             double floor_frac = 1e-14);

/// Simple least-squares line fit y = slope*x + intercept with R^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    int npts = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit y = A * x^p through log-log regression; returns {p, A, r2}.
struct PowerFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double r2 = 1.0;
    int npts = 0;
};

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y);

/// Fit y = C ((x + floor)^p - floor^p): the power law seen through difference
/// quotients whose near endpoint sits at the resolution floor. Grid scan over
/// p with the amplitude profiled out; r2 measured on log y.
PowerFit fit_power_with_floor(const std::vector<double>& x,
                              const std::vector<double>& y, double floor_h);

/// Bisection for a continuous function with f(lo)*f(hi) <= 0.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = 1e-12, int max_iter = 200);

} // namespace mlnl
