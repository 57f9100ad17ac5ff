#include "cellhom/serial_ref.hpp"

namespace cellhom::ref {

SymField sym_gradient(const SymGradOp& op, const MandelVec6& A, const VecField& phi) {
    const Grid& g = op.grid();
    require_same(g, phi.grid, "ref::sym_gradient");
    SymField out(g, op.lattice());
    const Mat3 Amat = from_mandel(A);
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const std::size_t el = g.node_id(i, j, k);
                const auto nodes = g.element_nodes(i, j, k);
                for (int q = 0; q < 8; ++q) {
                    Mat3 H = Amat;
                    for (int c = 0; c < 8; ++c) {
                        const Vec3 gr = Eigen::Map<const Vec3>(op.shape_gradient(q, c));
                        const Vec3 uc = Eigen::Map<const Vec3>(phi.at(nodes[c]));
                        H += uc * gr.transpose();
                    }
                    out.set(8 * el + q, to_mandel(0.5 * (H + H.transpose())));
                }
            }
    return out;
}

NodalCovector weak_divergence(const SymGradOp& op, const SymField& sigma) {
    const Grid& g = op.grid();
    require_same(g, sigma.grid, "ref::weak_divergence");
    NodalCovector out(g);
    const double w = op.quad_weight();
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const std::size_t el = g.node_id(i, j, k);
                const auto nodes = g.element_nodes(i, j, k);
                for (int q = 0; q < 8; ++q) {
                    const Mat3 s = from_mandel(sigma.mandel(8 * el + q));
                    for (int c = 0; c < 8; ++c) {
                        const Vec3 gr = Eigen::Map<const Vec3>(op.shape_gradient(q, c));
                        const Vec3 f = -w * (s * gr);
                        double* o = out.at(nodes[c]);
                        o[0] += f[0];
                        o[1] += f[1];
                        o[2] += f[2];
                    }
                }
            }
    return out;
}

NodalCovector apply_stiffness(const SymGradOp& op, const MaterialMap& m, const VecField& v) {
    SymField e = sym_gradient(op, MandelVec6::Zero(), v);
    require_same(op.grid(), m.grid, "ref::apply_stiffness");
    for (std::size_t el = 0; el < op.grid().element_count(); ++el)
        for (int q = 0; q < 8; ++q) e.set(8 * el + q, m.C(el) * e.mandel(8 * el + q));
    NodalCovector out = weak_divergence(op, e);
    for (auto& x : out.v) x = -x;
    return out;
}

MandelVec6 cell_average(const SymField& e) {
    MandelVec6 a = MandelVec6::Zero();
    for (std::size_t s = 0; s < e.samples(); ++s) a += e.mandel(s);
    return a / static_cast<double>(e.samples());
}

double inner(const SymField& a, const SymField& b) {
    require_same(a.grid, b.grid, "ref::inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.s.size(); ++i) acc += a.s[i] * b.s[i];
    return a.weight() * acc;
}

} // namespace cellhom::ref
