#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cellhom/geometry.hpp"
#include "cellhom/mandel.hpp"

namespace cellhom {

// Periodic nodal vector field; 3 doubles per node, component fastest.
struct VecField {
    Grid grid;
    std::vector<double> v;

    VecField() = default;
    explicit VecField(const Grid& g) : grid(g), v(3 * g.node_count(), 0.0) {}

    double* at(std::size_t node) { return v.data() + 3 * node; }
    const double* at(std::size_t node) const { return v.data() + 3 * node; }

    std::span<double> flat() { return v; }
    std::span<const double> flat() const { return v; }
};

// Result of pairing-producing operators (weak divergence, stiffness action):
// lives in the dual of VecField. Same storage, different meaning; pair() below
// is the only sanctioned way to consume it.
struct NodalCovector {
    Grid grid;
    std::vector<double> v;

    NodalCovector() = default;
    explicit NodalCovector(const Grid& g) : grid(g), v(3 * g.node_count(), 0.0) {}

    double* at(std::size_t node) { return v.data() + 3 * node; }
    const double* at(std::size_t node) const { return v.data() + 3 * node; }

    std::span<double> flat() { return v; }
    std::span<const double> flat() const { return v; }
};

double pair(const NodalCovector& f, const VecField& u);

// Symmetric tensor field sampled at the 2x2x2 Gauss points of every element:
// Mandel 6-vector per sample, sample id = 8*element + q. The quadrature weight
// is uniform (constant element Jacobian): |Y| / (8 * element_count), and the
// weighted sum of a field is its integral over Y.
struct SymField {
    Grid grid;
    Lattice lattice;
    std::vector<double> s;

    SymField() = default;
    SymField(const Grid& g, const Lattice& lat)
        : grid(g), lattice(lat), s(48 * g.element_count(), 0.0) {}

    std::size_t samples() const { return 8 * grid.element_count(); }
    double weight() const { return lattice.volume / static_cast<double>(samples()); }

    double* at(std::size_t sample) { return s.data() + 6 * sample; }
    const double* at(std::size_t sample) const { return s.data() + 6 * sample; }

    MandelVec6 mandel(std::size_t sample) const {
        return Eigen::Map<const MandelVec6>(at(sample));
    }
    void set(std::size_t sample, const MandelVec6& m) {
        Eigen::Map<MandelVec6>(at(sample)) = m;
    }

    std::span<double> flat() { return s; }
    std::span<const double> flat() const { return s; }
};

// Full (non-symmetric) gradient samples: row-major 3x3 per Gauss point,
// g[3*i + l] = d u_i / d y_l.
struct GradField {
    Grid grid;
    Lattice lattice;
    std::vector<double> g;

    GradField() = default;
    GradField(const Grid& gr, const Lattice& lat)
        : grid(gr), lattice(lat), g(72 * gr.element_count(), 0.0) {}

    std::size_t samples() const { return 8 * grid.element_count(); }
    double weight() const { return lattice.volume / static_cast<double>(samples()); }

    double* at(std::size_t sample) { return g.data() + 9 * sample; }
    const double* at(std::size_t sample) const { return g.data() + 9 * sample; }
};

// Element of LP: v(y) = A y + phi(y) with phi periodic and nodal. The mean
// strain A is a symmetric 3x3 in Mandel form.
struct LPField {
    MandelVec6 A = MandelVec6::Zero();
    VecField phi;

    LPField() = default;
    LPField(const MandelVec6& A_, VecField phi_) : A(A_), phi(std::move(phi_)) {}
    explicit LPField(const Grid& g) : phi(g) {}
};

// --- integrals and averages ------------------------------------------------

// integral mean over Y of each Mandel component
MandelVec6 cell_average(const SymField& e);

// L2(Y) inner product of two quadrature fields
double inner(const SymField& a, const SymField& b);
double norm(const SymField& a);

double inner(const GradField& a, const GradField& b);
double norm(const GradField& a);

// Nodal fields: trilinear elements integrate each hat to |element|/8, so the
// integral mean of the interpolant is the plain nodal mean.
Vec3 nodal_mean(const VecField& u);
void subtract_nodal_mean(VecField& u);

// consistent-mass L2 norm of the interpolant (not the lumped nodal sum)
double l2_norm(const VecField& u, const Lattice& lat);

// point evaluation of A y + phi at lattice coordinates yhat (trilinear
// interpolation of phi, affine part exact); y = lat.map(yhat)
Vec3 eval_lp(const LPField& u, const Lattice& lat, const Vec3& yhat);
Vec3 eval_periodic(const VecField& phi, const Vec3& yhat);

} // namespace cellhom
