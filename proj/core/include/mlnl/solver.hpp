#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/grid.hpp"
#include "mlnl/kernels.hpp"
#include "mlnl/nonlocal.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mlnl {

struct SolveError : std::runtime_error {
    std::vector<double> residual_history;
    explicit SolveError(const std::string& msg,
                        std::vector<double> hist = {})
        : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

/// Monotone discretization of L = Delta + a I on the interior nodes of a
/// lattice covering the domain. The Laplacian uses boundary-intercept
/// (Shortley-Weller) arms so the Dirichlet condition is imposed on the true
/// boundary; the nonlocal part uses the QuadratureScheme weights, whose
/// near-field compensation rides on the same Laplacian stencil. All
/// off-diagonal coefficients are nonnegative.
class DiscreteOperator {
public:
    static DiscreteOperator assemble(const Domain& dom, const Kernel* k,
                                     double a, double h, double C0 = 1.0,
                                     double A0 = 1.0,
                                     std::size_t memory_cap_bytes = 2ull << 30);

    const Domain& domain() const { return *dom_; }
    const Lattice& lattice() const { return lat_; }
    const NodeSet& nodes() const { return nodes_; }
    double h() const { return h_; }
    double a() const { return a_; }
    double drift_bound() const { return C0_; }
    const std::optional<Kernel>& kernel() const { return kernel_; }
    const std::optional<QuadratureScheme>& scheme() const { return scheme_; }
    int rows() const { return nodes_.rows(); }

    /// y = (-L_h) x for an interior-valued vector x (exterior = 0).
    /// Optional per-row upwind drift table (from a frozen HJB policy) and
    /// drift magnitudes b are applied as -b . D_h.
    void apply_neg(const std::vector<double>& x, std::vector<double>& y,
                   const std::vector<Pt>* drift = nullptr) const;

    /// Materialize one row of -L_h as (lattice node, coefficient) pairs plus
    /// the diagonal; for monotonicity and row-sum checks.
    struct RowEntry {
        int node;
        double coeff;
    };
    std::vector<RowEntry> materialize_row(int row) const;
    /// Row sum of the pure second-difference part over all nodes (0 by
    /// constant annihilation).
    double local_row_sum(int row) const;

    /// Monotone upwind gradient norm per axis: max(D^-u, -D^+u, 0),
    /// square-summed.
    double upwind_gradient_norm(const GridFunction& u, int row) const;
    /// Upwind b . Du at a row.
    double upwind_drift(const GridFunction& u, int row, Pt b) const;

    /// Solve (-L_h) x = b to the given infinity-norm residual; uses the
    /// cached sparse factorization of the local part as preconditioner and
    /// BiCGSTAB when a nonlocal or drift part is present.
    std::vector<double> solve_neg(const std::vector<double>& b, double tol_inf,
                                  const std::vector<Pt>* drift,
                                  std::vector<double>& residual_history,
                                  int& iterations) const;

    struct Arm {
        double theta = 1.0; // fraction of h to the neighbor or boundary
        int nbr = -1;       // lattice linear index of the neighbor, -1 = cut
        Pt intercept{};     // boundary point when cut
    };
    const Arm& arm(int row, int axis, int dir_positive) const {
        return arms_[static_cast<size_t>(row)][static_cast<size_t>(
            2 * axis + dir_positive)];
    }
    double near_factor() const { return near_factor_; }
    double diag_mass() const { return diag_mass_; }

private:
    DiscreteOperator() = default;
    void build_preconditioner() const;

    const Domain* dom_ = nullptr;
    Lattice lat_;
    NodeSet nodes_;
    double h_ = 0.0, a_ = 0.0, C0_ = 1.0;
    std::optional<Kernel> kernel_;
    std::optional<QuadratureScheme> scheme_;
    std::vector<std::array<Arm, 4>> arms_;
    double near_factor_ = 1.0; // (1 + a*near_moment/(2n)) on Delta_h
    double diag_mass_ = 0.0;   // a*(total_mass + tail_mass)
    // box window of the lattice that covers the domain (nonzero support)
    int bi0_ = 0, bi1_ = 0, bj0_ = 0, bj1_ = 0;

    struct Factorization;
    mutable std::shared_ptr<Factorization> fact_;
    mutable std::vector<double> scatter_; // lattice-sized work buffer
};

/// Solution plus diagnostics. The reported residual is recomputed after the
/// solve, not the loop's running value.
struct SolveReport {
    GridFunction u;
    double max_interior_residual = 0.0;
    int iterations = 0;
    std::vector<double> damping_history;
    std::vector<double> residual_history;
    bool max_principle_certificate = true;
    std::string certificate_witness;
    double mean_normal_derivative = 0.0;   // filled by serrin_solve
    double normal_derivative_dev = 0.0;    // max |du/dn - mean| / mean
    std::vector<double> normal_trace;
};

/// Solve L_h u = f in Omega, u = g outside (g = nullptr means 0).
SolveReport solve_linear(const DiscreteOperator& A, const GridFunction& f,
                         const GridFunction* exterior_data = nullptr,
                         double tol_rel = 1e-10);

/// Damped Picard for L u + H(|Du|) = f(u), u = 0 outside.
struct SemilinearOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double omega = 0.5;
    double divergence_bound = 1e8;
};
SolveReport solve_semilinear(const DiscreteOperator& A,
                             const std::function<double(double)>& H,
                             const std::function<double(double)>& f,
                             const SemilinearOptions& opt = {});

/// Howard policy iteration for
/// L u + inf_mu sup_nu { b_{mu,nu}(x) . Du + f_{mu,nu}(x) } = 0.
struct HJBControl {
    std::function<Pt(Pt)> b;
    std::function<double(Pt)> f;
};
struct HJBProblem {
    // controls[mu][nu]
    std::vector<std::vector<HJBControl>> controls;
};
SolveReport solve_hjb(const DiscreteOperator& A, const HJBProblem& prob,
                      double tol = 1e-9, int max_sweeps = 60);

/// Discrete comparison scan: verifies sub <= sup at every lattice node.
struct ComparisonCertificate {
    bool pass = true;
    int witness_node = -1;
    double sub_value = 0.0;
    double sup_value = 0.0;
};
ComparisonCertificate comparison_check(const GridFunction& sub,
                                       const GridFunction& sup,
                                       const DiscreteOperator& A,
                                       double margin = 0.0);

} // namespace mlnl
