#include "cellhom/fields.hpp"

#include <cmath>

#include "cellhom/element.hpp"
#include "cellhom/parallel.hpp"

namespace cellhom {

double pair(const NodalCovector& f, const VecField& u) {
    require_same(f.grid, u.grid, "pair");
    return par::dot(f.flat(), u.flat());
}

MandelVec6 cell_average(const SymField& e) {
    const std::size_t ns = e.samples();
    MandelVec6 avg;
    for (int m = 0; m < 6; ++m) {
        const double* base = e.s.data() + m;
        avg[m] = par::sum(ns, [base](std::size_t q) { return base[6 * q]; });
    }
    // uniform weights: weighted integral / |Y| is the plain sample mean
    return avg / static_cast<double>(ns);
}

double inner(const SymField& a, const SymField& b) {
    require_same(a.grid, b.grid, "inner");
    return a.weight() * par::dot(a.flat(), b.flat());
}

double norm(const SymField& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

double inner(const GradField& a, const GradField& b) {
    require_same(a.grid, b.grid, "inner");
    return a.weight() * par::dot({a.g.data(), a.g.size()}, {b.g.data(), b.g.size()});
}

double norm(const GradField& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

Vec3 nodal_mean(const VecField& u) {
    const std::size_t n = u.grid.node_count();
    Vec3 mean;
    for (int c = 0; c < 3; ++c) {
        const double* base = u.v.data() + c;
        mean[c] = par::sum(n, [base](std::size_t i) { return base[3 * i]; }) /
                  static_cast<double>(n);
    }
    return mean;
}

void subtract_nodal_mean(VecField& u) {
    const Vec3 mean = nodal_mean(u);
    const std::size_t n = u.grid.node_count();
    double* p = u.v.data();
    par::for_each(n, [p, &mean](std::size_t i) {
        p[3 * i + 0] -= mean[0];
        p[3 * i + 1] -= mean[1];
        p[3 * i + 2] -= mean[2];
    });
}

namespace {

// trilinear weights of yhat inside its element; fills the 8 node ids
void interp_stencil(const Grid& g, const Vec3& yhat, std::size_t nodes[8], double w[8]) {
    double t[3];
    int base[3];
    for (int d = 0; d < 3; ++d) {
        const int n = g.extent(d);
        double x = yhat[d] * n;
        double fl = std::floor(x);
        base[d] = static_cast<int>(fl);
        t[d] = x - fl;
    }
    for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
        nodes[c] = g.node_id(base[0] + dx, base[1] + dy, base[2] + dz);
        w[c] = (dx ? t[0] : 1.0 - t[0]) * (dy ? t[1] : 1.0 - t[1]) * (dz ? t[2] : 1.0 - t[2]);
    }
}

} // namespace

double l2_norm(const VecField& u, const Lattice& lat) {
    const auto& tab = detail::element_tables();
    const Grid& g = u.grid;
    const double w = lat.volume / static_cast<double>(8 * g.element_count());
    const double s = par::sum(g.element_count(), [&](std::size_t eid) {
        const auto [i, j, k] = g.node_coords(eid);
        const auto nodes = g.element_nodes(i, j, k);
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) {
            double x = 0.0, y = 0.0, z = 0.0;
            for (int c = 0; c < 8; ++c) {
                const double* p = u.at(nodes[c]);
                const double N = tab.N[q][c];
                x += N * p[0];
                y += N * p[1];
                z += N * p[2];
            }
            acc += x * x + y * y + z * z;
        }
        return acc;
    });
    return std::sqrt(std::max(0.0, w * s));
}

Vec3 eval_periodic(const VecField& phi, const Vec3& yhat) {
    std::size_t nodes[8];
    double w[8];
    interp_stencil(phi.grid, yhat, nodes, w);
    Vec3 r = Vec3::Zero();
    for (int c = 0; c < 8; ++c) {
        const double* p = phi.at(nodes[c]);
        r[0] += w[c] * p[0];
        r[1] += w[c] * p[1];
        r[2] += w[c] * p[2];
    }
    return r;
}

Vec3 eval_lp(const LPField& u, const Lattice& lat, const Vec3& yhat) {
    const Vec3 y = lat.map(yhat);
    return from_mandel(u.A) * y + eval_periodic(u.phi, yhat);
}

} // namespace cellhom
