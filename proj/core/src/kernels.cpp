#include "mlnl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mlnl {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double sphere_area(int n) {
    if (n == 1) return 2.0;
    if (n == 2) return 2.0 * kPi;
    throw std::invalid_argument("dimension must be 1 or 2");
}

double DominatingKernel::tail_eval(double s) const {
    double v = 0.0;
    for (const auto& t : tail) v += t.coef * std::pow(s, -t.exponent);
    return v;
}

double DominatingKernel::eval(double s) const {
    if (s <= 0.0) return kInf;
    if (s <= 1.0) return lambda * std::pow(s, -(n + alpha));
    return tail_eval(s);
}

Kernel::Kernel(std::vector<Term> terms, int n, double alpha, double lambda,
               DominatingKernel dom, bool strictly_decreasing,
               bool comparability_beta_infinite)
    : terms_(std::move(terms)), n_(n), alpha_(alpha), lambda_(lambda),
      dom_(std::move(dom)), strictly_decreasing_(strictly_decreasing),
      comparability_beta_infinite_(comparability_beta_infinite) {
    dom_.kappa1 = 0.0;
    double omega = sphere_area(n_);
    for (const auto& t : dom_.tail) {
        // int_{|y|>1} c |y|^{-e} dy = omega c / (e - n)
        if (t.exponent <= n_)
            throw std::invalid_argument("dominating tail mass is infinite");
        dom_.kappa1 += omega * t.coef / (t.exponent - n_);
    }
    levy_moment_ = second_moment_within(1.0) + mass_beyond(1.0);
}

double Kernel::radial(double s) const {
    if (s <= 0.0) return kInf;
    double v = 0.0;
    for (const auto& t : terms_)
        if (s <= t.cutoff) v += t.coef * std::pow(s, -t.exponent);
    return v;
}

double Kernel::support_radius() const {
    double r = 0.0;
    for (const auto& t : terms_) r = std::max(r, t.cutoff);
    return r;
}

double Kernel::second_moment_within(double r) const {
    // omega_n * int_0^r s^{n+1-e} ds per term, with n+2-e = 2-alpha_i > 0
    double omega = sphere_area(n_);
    double total = 0.0;
    for (const auto& t : terms_) {
        double hi = std::min(r, t.cutoff);
        if (hi <= 0.0) continue;
        double p = n_ + 2.0 - t.exponent;
        if (p <= 0.0)
            throw std::logic_error("kernel term has non-integrable second moment");
        total += omega * t.coef * std::pow(hi, p) / p;
    }
    return total;
}

double Kernel::mass_beyond(double r) const {
    double omega = sphere_area(n_);
    double total = 0.0;
    for (const auto& t : terms_) {
        if (t.cutoff <= r) continue;
        double p = t.exponent - n_; // alpha_i > 0
        if (p <= 0.0) throw std::logic_error("kernel term has infinite mass");
        double lo_part = std::pow(r, -p);
        double hi_part = std::isinf(t.cutoff) ? 0.0 : std::pow(t.cutoff, -p);
        total += omega * t.coef * (lo_part - hi_part) / p;
    }
    return total;
}

Kernel make_fractional(double alpha, double lambda, double trunc, int n) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("alpha must lie in (0,2)");
    if (lambda <= 0.0) throw std::invalid_argument("Lambda must be positive");
    if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
    if (trunc <= 0.0) throw std::invalid_argument("truncation radius must be positive");

    std::vector<Kernel::Term> terms{{lambda, n + alpha, trunc}};
    DominatingKernel dom;
    dom.lambda = lambda;
    dom.alpha = alpha;
    dom.n = n;
    // r^{n+alpha} k(ry) = lambda |y|^{-n-alpha} 1_{r|y| <= trunc}; the tail
    // must keep the full power law regardless of the cutoff.
    dom.tail.push_back({lambda, n + alpha});
    bool strict = std::isinf(trunc);
    return Kernel(std::move(terms), n, alpha, lambda, std::move(dom), strict);
}

Kernel make_fractional(double alpha, double lambda, int n) {
    return make_fractional(alpha, lambda, kInf, n);
}

Kernel make_subordinate(double mu1, double mu2, int n) {
    if (!(mu1 > 0.0 && mu1 <= mu2 && mu2 < 1.0))
        throw std::invalid_argument("need 0 < mu1 <= mu2 < 1");
    if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
    // Psi(s) = s^{mu1} + s^{mu2}  =>  k(y) = |y|^{-n-2mu1} + |y|^{-n-2mu2}
    std::vector<Kernel::Term> terms{{1.0, n + 2.0 * mu1, kInf},
                                    {1.0, n + 2.0 * mu2, kInf}};
    double alpha = 2.0 * mu2;
    DominatingKernel dom;
    dom.lambda = 2.0; // Psi(1) = 2
    dom.alpha = alpha;
    dom.n = n;
    dom.tail.push_back({2.0, n + 2.0 * mu1});
    return Kernel(std::move(terms), n, alpha, 2.0, std::move(dom), true);
}

Kernel modified_kernel(const Kernel& k, double beta_prime, double zeta) {
    double cap = std::min(1.0, k.alpha());
    if (!(zeta > 0.0 && zeta < cap))
        throw std::invalid_argument("zeta must lie in (0, 1 ^ alpha)");
    if (beta_prime <= 0.0)
        throw std::invalid_argument("beta' must be positive");
    int n = k.dim();
    std::vector<Kernel::Term> terms;
    for (auto t : k.terms()) {
        t.cutoff = std::min(t.cutoff, beta_prime);
        terms.push_back(t);
    }
    terms.push_back({1.0, n + zeta, kInf});

    DominatingKernel dom = k.dominating();
    // the added |y|^{-n-zeta} piece: r^{n+alpha} J(ry) = r^{alpha-zeta} J(y)
    // <= J(y) <= |y|^{-n-alpha} on B_1, so Lambda grows by 1
    dom.lambda += 1.0;
    dom.tail.push_back({1.0, n + zeta});
    return Kernel(std::move(terms), n, k.alpha(), dom.lambda, std::move(dom),
                  k.strictly_decreasing(),
                  /*comparability_beta_infinite=*/true);
}

double theta(const DominatingKernel& dom, double xi) {
    if (!(xi > 0.0 && xi <= 1.0))
        throw std::invalid_argument("theta: xi must lie in (0, 1]");
    double omega = sphere_area(dom.n);
    double core;
    if (dom.alpha > 1.0) {
        core = omega * dom.lambda / (dom.alpha - 1.0) *
               (std::pow(xi, 1.0 - dom.alpha) - 1.0);
    } else if (dom.alpha == 1.0) {
        core = omega * dom.lambda * (-std::log(xi));
    } else {
        core = omega * dom.lambda / (1.0 - dom.alpha) *
               (1.0 - std::pow(xi, 1.0 - dom.alpha));
    }
    return core + dom.kappa1;
}

double theta_antiderivative(const DominatingKernel& dom, double l) {
    if (l < 0.0 || l > 1.0)
        throw std::invalid_argument("theta_antiderivative: l must lie in [0,1]");
    if (l == 0.0) return 0.0;
    double omega = sphere_area(dom.n);
    double oL = omega * dom.lambda;
    double core;
    if (dom.alpha > 1.0) {
        double p = 2.0 - dom.alpha;
        core = oL / (dom.alpha - 1.0) * (std::pow(l, p) / p - l);
    } else if (dom.alpha == 1.0) {
        core = oL * (l - l * std::log(l));
    } else {
        double p = 2.0 - dom.alpha;
        core = oL / (1.0 - dom.alpha) * (l - std::pow(l, p) / p);
    }
    return core + dom.kappa1 * l;
}

std::string AssumptionReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"schema_version\": 1, \"max_ratio_a\": " << max_ratio_a
       << ", \"rho_estimate\": " << rho_estimate
       << ", \"violations\": " << violations << "}";
    return os.str();
}

AssumptionReport check_assumption(const Kernel& k, int samples,
                                  std::uint64_t seed) {
    AssumptionReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = k.dim();
    const auto& dom = k.dominating();

    auto rand_dir = [&]() -> Pt {
        if (n == 1) return {unif(rng) < 0.5 ? -1.0 : 1.0, 0.0};
        double th = 2.0 * kPi * unif(rng);
        return {std::cos(th), std::sin(th)};
    };

    // (a) scaling domination over log-spaced radii
    for (int s = 0; s < samples; ++s) {
        double r = std::pow(10.0, -3.0 * unif(rng)); // r in (1e-3, 1]
        double mag = std::pow(10.0, -3.0 + 4.0 * unif(rng)); // |y| in (1e-3, 10)
        Pt y = mag * rand_dir();
        double lhs = std::pow(r, n + k.alpha()) * k(r * y);
        double rhs = dom.eval(mag);
        rep.samples_a++;
        if (rhs == 0.0) {
            if (lhs > 0.0) rep.violations++;
            continue;
        }
        double ratio = lhs / rhs;
        rep.max_ratio_a = std::max(rep.max_ratio_a, ratio);
        if (ratio > 1.0 + 1e-10) rep.violations++;
    }

    // (b) comparability: x, y in B_{r/2}(x0), z outside B_r(x0)
    for (int s = 0; s < samples; ++s) {
        double r = 0.1 + 0.9 * unif(rng);
        Pt x0 = rand_dir();
        Pt x = x0 + (0.5 * r * unif(rng)) * rand_dir();
        Pt y = x0 + (0.5 * r * unif(rng)) * rand_dir();
        double zr = r * (1.0 + 3.0 * unif(rng));
        Pt z = x0 + zr * rand_dir();
        double kx = k(x - z), ky = k(y - z);
        rep.samples_b++;
        if (kx == 0.0 && ky == 0.0) {
            rep.skipped_b++; // vacuous where both densities vanish
            continue;
        }
        if (ky == 0.0) {
            rep.rho_estimate = std::numeric_limits<double>::infinity();
            continue;
        }
        rep.rho_estimate = std::max(rep.rho_estimate, kx / ky);
    }
    return rep;
}

} // namespace mlnl
