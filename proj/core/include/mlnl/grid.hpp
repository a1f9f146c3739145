#pragma once

#include "mlnl/geometry.hpp"
#include "mlnl/vec.hpp"

#include <functional>
#include <vector>

namespace mlnl {

/// Uniform node-centered lattice. Nodes sit at origin + h*(i, j),
/// 0 <= i < nx, 0 <= j < ny (ny == 1 in one dimension). Extents are snapped
/// to multiples of h so that 0 is always a node when the box straddles it.
class Lattice {
public:
    Lattice() = default;
    Lattice(int dim, double h, Pt lo, Pt hi);

    /// Lattice covering the domain's bounding box plus an exterior band of
    /// width `band` on every side.
    static Lattice covering(const Domain& dom, double h, double band);
    static Lattice covering_box(int dim, double h, Pt lo, Pt hi);

    int dim() const { return dim_; }
    double h() const { return h_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int size() const { return nx_ * ny_; }
    Pt origin() const { return origin_; }

    int index(int i, int j) const { return j * nx_ + i; }
    Pt point(int i, int j) const {
        return {origin_.x + h_ * i, origin_.y + h_ * j};
    }
    Pt point(int lin) const { return point(lin % nx_, lin / nx_); }
    bool in_bounds(int i, int j) const {
        return i >= 0 && i < nx_ && j >= 0 && j < ny_;
    }
    /// Nearest node to x (indices may be out of bounds).
    void locate(Pt x, int& i, int& j) const;

private:
    int dim_ = 2;
    double h_ = 1.0 / 64.0;
    Pt origin_{};
    int nx_ = 0, ny_ = 1;
};

/// Values on a lattice plus the constant assumed beyond the stored band
/// (0 for exterior-Dirichlet data). Fields are dense over the whole lattice,
/// interior and exterior band alike.
struct GridFunction {
    Lattice lat;
    std::vector<double> v;
    double exterior_value = 0.0;

    GridFunction() = default;
    explicit GridFunction(const Lattice& l, double fill = 0.0)
        : lat(l), v(static_cast<size_t>(l.size()), fill) {}

    static GridFunction sample(const Lattice& l,
                               const std::function<double(Pt)>& f);

    double& at(int i, int j) { return v[static_cast<size_t>(lat.index(i, j))]; }
    double at(int i, int j) const {
        return v[static_cast<size_t>(lat.index(i, j))];
    }
    /// Value at node (i, j), exterior_value when off the stored band.
    double value_or_exterior(int i, int j) const {
        return lat.in_bounds(i, j) ? at(i, j) : exterior_value;
    }

    /// Bilinear (linear in 1-d) interpolation; exterior_value off the band.
    double interp(Pt x) const;

    double max_abs() const;
};

/// Interior node bookkeeping for a (lattice, domain) pair: linear indices of
/// nodes with delta > 0, the inverse map, and the cached distance field.
struct NodeSet {
    std::vector<int> interior;      // lattice linear indices
    std::vector<int> interior_id;   // lattice linear index -> row, or -1
    GridFunction delta;             // delta sampled at every lattice node

    static NodeSet build(const Domain& dom, const Lattice& lat);
    int rows() const { return static_cast<int>(interior.size()); }
};

} // namespace mlnl
