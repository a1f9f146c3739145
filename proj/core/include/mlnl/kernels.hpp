#pragma once

#include "mlnl/vec.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace mlnl {

/// Surface area of the unit sphere: 2 in 1-d, 2*pi in 2-d.
double sphere_area(int n);

/// Dominating kernel k_hat(y) = Lambda |y|^{-n-alpha} on B_1 and J(y)
/// outside, with finite tail mass kappa1 = int_{|y|>1} J. The tail J is a sum
/// of power laws c |y|^{-e} (possibly none).
struct DominatingKernel {
    double lambda = 1.0;
    double alpha = 1.0;
    int n = 2;
    struct TailTerm {
        double coef;
        double exponent; // e > n, so the mass is finite
    };
    std::vector<TailTerm> tail;
    double kappa1 = 0.0; // computed at construction

    double eval(double s) const;     // radial
    double eval(Pt y) const { return eval(norm(y)); }
    double tail_eval(double s) const;
};

/// Symmetric radial Levy density as a sum of truncated power laws
/// c |y|^{-e} 1_{|y| <= cut}. Covers the fractional family, subordinate
/// Bernstein sums, and the truncate-and-retail modification, all with closed-form
/// radial moments.
class Kernel {
public:
    struct Term {
        double coef;
        double exponent;                                    // e = n + alpha_i
        double cutoff = std::numeric_limits<double>::infinity();
    };

    Kernel(std::vector<Term> terms, int n, double alpha, double lambda,
           DominatingKernel dom, bool strictly_decreasing,
           bool comparability_beta_infinite = false);

    double radial(double s) const;
    double operator()(Pt y) const { return radial(norm(y)); }

    int dim() const { return n_; }
    double alpha() const { return alpha_; }
    double lambda() const { return lambda_; }
    bool is_radial() const { return true; }
    bool strictly_decreasing() const { return strictly_decreasing_; }
    double support_radius() const; // +inf when untruncated
    /// Set on modified kernels: the comparability assumption holds with
    /// beta = infinity.
    bool comparability_beta_infinite() const {
        return comparability_beta_infinite_;
    }
    const DominatingKernel& dominating() const { return dom_; }
    const std::vector<Term>& terms() const { return terms_; }

    /// int_{|y| < r} |y|^2 k(y) dy (closed form per power term).
    double second_moment_within(double r) const;
    /// int_{|y| > r} k(y) dy.
    double mass_beyond(double r) const;
    /// int (|y|^2 ^ 1) k(y) dy, computed once at construction.
    double levy_moment() const { return levy_moment_; }

private:
    std::vector<Term> terms_;
    int n_;
    double alpha_;
    double lambda_;
    DominatingKernel dom_;
    bool strictly_decreasing_;
    bool comparability_beta_infinite_ = false;
    double levy_moment_ = 0.0;
};

/// k(y) = Lambda |y|^{-n-alpha}, optionally cut off at |y| = trunc.
Kernel make_fractional(double alpha, double lambda, double trunc, int n);
Kernel make_fractional(double alpha, double lambda, int n); // untruncated

/// Subordinate-Brownian-type kernel Psi(|y|^{-2})/|y|^n with the Bernstein
/// sum Psi(s) = s^{mu1} + s^{mu2}, 0 < mu1 <= mu2 < 1. The dominating kernel
/// uses alpha = 2 mu2.
Kernel make_subordinate(double mu1, double mu2, int n);

/// Truncate-and-retail modification: k1_{|y| <= beta'} + |y|^{-n-zeta} with
/// zeta in (0, 1 ^ alpha). The result satisfies the comparability assumption
/// with beta = infinity.
Kernel modified_kernel(const Kernel& k, double beta_prime, double zeta);

/// Theta(xi) = int_{|z| > xi} min(1, |z|) k_hat(z) dz in closed form,
/// xi in (0, 1].
double theta(const DominatingKernel& dom, double xi);

/// A(l) = int_0^l Theta(tau) dtau, l in [0, 1]; used by the psi-tilde barrier.
double theta_antiderivative(const DominatingKernel& dom, double l);

/// Monte Carlo verification report for Assumption 1.1: (a) scaling
/// domination r^{n+alpha} k(ry) <= k_hat(y), (b) comparability
/// k(x-z) <= rho k(y-z). Reports max observed ratios; pairs where both
/// densities vanish are skipped (0/0 convention).
struct AssumptionReport {
    double max_ratio_a = 0.0;
    double rho_estimate = 0.0;
    int violations = 0;
    int samples_a = 0;
    int samples_b = 0;
    int skipped_b = 0;
    std::string to_json() const;
};

AssumptionReport check_assumption(const Kernel& k, int samples,
                                  std::uint64_t seed = 12345);

} // namespace mlnl
