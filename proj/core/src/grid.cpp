#include "mlnl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlnl {

Lattice::Lattice(int dim, double h, Pt lo, Pt hi) : dim_(dim), h_(h) {
    if (h <= 0.0) throw std::invalid_argument("lattice spacing must be positive");
    // snap to the h-grid anchored at 0 so that 0 is a node
    auto snap_lo = [&](double v) { return h * std::floor(v / h - 1e-9); };
    auto snap_hi = [&](double v) { return h * std::ceil(v / h + 1e-9); };
    origin_ = {snap_lo(lo.x), dim == 2 ? snap_lo(lo.y) : 0.0};
    double hx = snap_hi(hi.x);
    nx_ = static_cast<int>(std::llround((hx - origin_.x) / h)) + 1;
    if (dim == 2) {
        double hy = snap_hi(hi.y);
        ny_ = static_cast<int>(std::llround((hy - origin_.y) / h)) + 1;
    } else {
        ny_ = 1;
    }
}

Lattice Lattice::covering(const Domain& dom, double h, double band) {
    auto bb = dom.bounding_box();
    Pt lo{bb[0].x - band, bb[0].y - band};
    Pt hi{bb[1].x + band, bb[1].y + band};
    return Lattice(dom.dim(), h, lo, hi);
}

Lattice Lattice::covering_box(int dim, double h, Pt lo, Pt hi) {
    return Lattice(dim, h, lo, hi);
}

void Lattice::locate(Pt x, int& i, int& j) const {
    i = static_cast<int>(std::llround((x.x - origin_.x) / h_));
    j = dim_ == 2 ? static_cast<int>(std::llround((x.y - origin_.y) / h_)) : 0;
}

GridFunction GridFunction::sample(const Lattice& l,
                                  const std::function<double(Pt)>& f) {
    GridFunction g(l);
    for (int j = 0; j < l.ny(); ++j)
        for (int i = 0; i < l.nx(); ++i)
            g.at(i, j) = f(l.point(i, j));
    return g;
}

double GridFunction::interp(Pt x) const {
    double fx = (x.x - lat.origin().x) / lat.h();
    int i0 = static_cast<int>(std::floor(fx));
    double tx = fx - i0;
    if (lat.dim() == 1) {
        if (i0 < 0 || i0 + 1 >= lat.nx()) return exterior_value;
        return (1.0 - tx) * at(i0, 0) + tx * at(i0 + 1, 0);
    }
    double fy = (x.y - lat.origin().y) / lat.h();
    int j0 = static_cast<int>(std::floor(fy));
    double ty = fy - j0;
    if (i0 < 0 || i0 + 1 >= lat.nx() || j0 < 0 || j0 + 1 >= lat.ny())
        return exterior_value;
    double v00 = at(i0, j0), v10 = at(i0 + 1, j0);
    double v01 = at(i0, j0 + 1), v11 = at(i0 + 1, j0 + 1);
    return (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 +
           (1.0 - tx) * ty * v01 + tx * ty * v11;
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double val : v) m = std::max(m, std::abs(val));
    return m;
}

NodeSet NodeSet::build(const Domain& dom, const Lattice& lat) {
    NodeSet ns;
    ns.delta = GridFunction(lat);
    ns.interior_id.assign(static_cast<size_t>(lat.size()), -1);
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            double d = dom.signed_distance(lat.point(i, j));
            ns.delta.at(i, j) = d;
            if (d > 0.0) {
                int lin = lat.index(i, j);
                ns.interior_id[static_cast<size_t>(lin)] =
                    static_cast<int>(ns.interior.size());
                ns.interior.push_back(lin);
            }
        }
    }
    return ns;
}

} // namespace mlnl
