#include "cellhom/discrete.hpp"

#include <cmath>

#include "cellhom/element.hpp"
#include "cellhom/parallel.hpp"

namespace cellhom {

SymGradOp::SymGradOp(const Grid& g, const Lattice& lat) : grid_(g), lattice_(lat) {
    const auto& tab = detail::element_tables();
    w_ = lat.volume / static_cast<double>(8 * g.element_count());
    // dN/dy = G^-T * diag(n1,n2,n3) * dN/dxi
    const Mat3 S = lat.GinvT * Vec3(double(g.n1), double(g.n2), double(g.n3)).asDiagonal();
    for (int q = 0; q < 8; ++q)
        for (int c = 0; c < 8; ++c) {
            const Vec3 d = S * Eigen::Map<const Vec3>(tab.dN[q][c]);
            for (int k = 0; k < 3; ++k) dNdy_[q][c][k] = d[k];
        }
    for (int c = 0; c < 8; ++c)
        for (int cc = 0; cc < 8; ++cc) {
            double m = 0.0;
            for (int q = 0; q < 8; ++q) m += tab.N[q][c] * tab.N[q][cc];
            mass_[c][cc] = w_ * m;
        }
}

double SymGradOp::shape_value(int q, int c) const {
    return detail::element_tables().N[q][c];
}

namespace {

// 3x3 gradient of the nodal part at one Gauss point: H_il = sum_c u_c[i] g_c[l]
inline void gauss_gradient(const double u[8][3], const double g[8][3], double H[3][3]) {
    for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l) H[i][l] = 0.0;
    for (int c = 0; c < 8; ++c)
        for (int i = 0; i < 3; ++i) {
            const double ui = u[c][i];
            H[i][0] += ui * g[c][0];
            H[i][1] += ui * g[c][1];
            H[i][2] += ui * g[c][2];
        }
}

inline void load_corners(const VecField& v, const std::array<std::size_t, 8>& nodes,
                         double u[8][3]) {
    for (int c = 0; c < 8; ++c) {
        const double* p = v.at(nodes[c]);
        u[c][0] = p[0];
        u[c][1] = p[1];
        u[c][2] = p[2];
    }
}

} // namespace

void SymGradOp::sym_gradient(const MandelVec6& A, const VecField& phi, SymField& out) const {
    require_same(grid_, phi.grid, "sym_gradient");
    require_same(grid_, out.grid, "sym_gradient");
    const Grid g = grid_;
    const auto* dN = dNdy_;
    par::for_each(g.element_count(), [&, dN](std::size_t el) {
        const auto [i, j, k] = g.node_coords(el);
        const auto nodes = g.element_nodes(i, j, k);
        double u[8][3];
        load_corners(phi, nodes, u);
        for (int q = 0; q < 8; ++q) {
            double H[3][3];
            gauss_gradient(u, dN[q], H);
            double* s = out.at(8 * el + q);
            s[0] = A[0] + H[0][0];
            s[1] = A[1] + H[1][1];
            s[2] = A[2] + H[2][2];
            s[3] = A[3] + kInvSqrt2 * (H[1][2] + H[2][1]);
            s[4] = A[4] + kInvSqrt2 * (H[0][2] + H[2][0]);
            s[5] = A[5] + kInvSqrt2 * (H[0][1] + H[1][0]);
        }
    });
}

SymField SymGradOp::sym_gradient(const LPField& u) const {
    SymField out(grid_, lattice_);
    sym_gradient(u.A, u.phi, out);
    return out;
}

SymField SymGradOp::sym_gradient(const VecField& periodic) const {
    SymField out(grid_, lattice_);
    sym_gradient(MandelVec6::Zero(), periodic, out);
    return out;
}

GradField SymGradOp::full_gradient(const LPField& u) const {
    require_same(grid_, u.phi.grid, "full_gradient");
    GradField out(grid_, lattice_);
    const Mat3 A = from_mandel(u.A);
    const Grid g = grid_;
    const auto* dN = dNdy_;
    par::for_each(g.element_count(), [&, dN](std::size_t el) {
        const auto [i, j, k] = g.node_coords(el);
        const auto nodes = g.element_nodes(i, j, k);
        double uc[8][3];
        load_corners(u.phi, nodes, uc);
        for (int q = 0; q < 8; ++q) {
            double H[3][3];
            gauss_gradient(uc, dN[q], H);
            double* out_q = out.at(8 * el + q);
            for (int a = 0; a < 3; ++a)
                for (int l = 0; l < 3; ++l) out_q[3 * a + l] = A(a, l) + H[a][l];
        }
    });
    return out;
}

GradField SymGradOp::full_gradient(const VecField& periodic) const {
    LPField u;
    u.phi = periodic;
    return full_gradient(u);
}

void SymGradOp::weak_divergence(const SymField& sigma, NodalCovector& out) const {
    require_same(grid_, sigma.grid, "weak_divergence");
    require_same(grid_, out.grid, "weak_divergence");
    const Grid g = grid_;
    const auto* dN = dNdy_;
    const double w = w_;
    // Gather over the 8 elements whose corner this node is. Writing each node
    // exactly once keeps the kernel deterministic for any thread count.
    par::for_each(g.node_count(), [&, dN, w](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        double r[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const std::size_t el =
                g.node_id(i - dx, j - dy, k - dz); // element ids share the node map
            for (int q = 0; q < 8; ++q) {
                const double* s = sigma.at(8 * el + q);
                const double* gr = dN[q][c];
                // sigma (as 3x3) times the shape gradient
                r[0] += s[0] * gr[0] + kInvSqrt2 * (s[5] * gr[1] + s[4] * gr[2]);
                r[1] += s[1] * gr[1] + kInvSqrt2 * (s[5] * gr[0] + s[3] * gr[2]);
                r[2] += s[2] * gr[2] + kInvSqrt2 * (s[4] * gr[0] + s[3] * gr[1]);
            }
        }
        double* o = out.at(nid);
        o[0] = -w * r[0];
        o[1] = -w * r[1];
        o[2] = -w * r[2];
    });
}

NodalCovector SymGradOp::weak_divergence(const SymField& sigma) const {
    NodalCovector out(grid_);
    weak_divergence(sigma, out);
    return out;
}

NodalCovector SymGradOp::weak_divergence_full(const GradField& h) const {
    require_same(grid_, h.grid, "weak_divergence_full");
    NodalCovector out(grid_);
    const Grid g = grid_;
    const auto* dN = dNdy_;
    const double w = w_;
    par::for_each(g.node_count(), [&, dN, w](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        double r[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const std::size_t el = g.node_id(i - dx, j - dy, k - dz);
            for (int q = 0; q < 8; ++q) {
                const double* hq = h.at(8 * el + q);
                const double* gr = dN[q][c];
                for (int a = 0; a < 3; ++a)
                    r[a] += hq[3 * a + 0] * gr[0] + hq[3 * a + 1] * gr[1] + hq[3 * a + 2] * gr[2];
            }
        }
        double* o = out.at(nid);
        for (int a = 0; a < 3; ++a) o[a] = -w * r[a];
    });
    return out;
}

double SymGradOp::gather_scale(const SymField& sigma) const {
    const Grid g = grid_;
    const auto* dN = dNdy_;
    const double w = w_;
    const double s2 = par::sum(g.node_count(), [&, dN, w](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        double r[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const std::size_t el = g.node_id(i - dx, j - dy, k - dz);
            for (int q = 0; q < 8; ++q) {
                const double* s = sigma.at(8 * el + q);
                const double* gr = dN[q][c];
                r[0] += std::abs(s[0] * gr[0]) +
                        kInvSqrt2 * (std::abs(s[5] * gr[1]) + std::abs(s[4] * gr[2]));
                r[1] += std::abs(s[1] * gr[1]) +
                        kInvSqrt2 * (std::abs(s[5] * gr[0]) + std::abs(s[3] * gr[2]));
                r[2] += std::abs(s[2] * gr[2]) +
                        kInvSqrt2 * (std::abs(s[4] * gr[0]) + std::abs(s[3] * gr[1]));
            }
        }
        return w * w * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    });
    return std::sqrt(std::max(0.0, s2));
}

void SymGradOp::apply_stiffness(const MaterialMap& m, const VecField& v, NodalCovector& out,
                                SymField& scratch) const {
    require_same(grid_, m.grid, "apply_stiffness");
    sym_gradient(MandelVec6::Zero(), v, scratch);
    // scratch <- C * scratch, in place
    const std::size_t nel = grid_.element_count();
    par::for_each(nel, [&](std::size_t el) {
        const MandelMat66& C = m.C(el);
        for (int q = 0; q < 8; ++q) {
            Eigen::Map<MandelVec6> s(scratch.at(8 * el + q));
            s = (C * s).eval();
        }
    });
    weak_divergence(scratch, out);
    for (auto& x : out.v) x = -x;
}

NodalCovector SymGradOp::apply_stiffness(const MaterialMap& m, const VecField& v) const {
    NodalCovector out(grid_);
    SymField scratch(grid_, lattice_);
    apply_stiffness(m, v, out, scratch);
    return out;
}

NodalCovector SymGradOp::apply_mass(const VecField& v) const {
    require_same(grid_, v.grid, "apply_mass");
    NodalCovector out(grid_);
    const Grid g = grid_;
    const auto* M = mass_;
    par::for_each(g.node_count(), [&, M](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        double r[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const auto nodes = g.element_nodes(i - dx, j - dy, k - dz);
            for (int cc = 0; cc < 8; ++cc) {
                const double* p = v.at(nodes[cc]);
                const double mcc = M[c][cc];
                r[0] += mcc * p[0];
                r[1] += mcc * p[1];
                r[2] += mcc * p[2];
            }
        }
        double* o = out.at(nid);
        o[0] = r[0];
        o[1] = r[1];
        o[2] = r[2];
    });
    return out;
}

VecField SymGradOp::stiffness_diagonal(const MaterialMap& m) const {
    require_same(grid_, m.grid, "stiffness_diagonal");
    VecField diag(grid_);
    const Grid g = grid_;
    const auto* dN = dNdy_;
    const double w = w_;
    par::for_each(g.node_count(), [&, dN, w](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        double r[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const std::size_t el = g.node_id(i - dx, j - dy, k - dz);
            const MandelMat66& C = m.C(el);
            for (int q = 0; q < 8; ++q) {
                const Vec3 gr = Eigen::Map<const Vec3>(dN[q][c]);
                for (int a = 0; a < 3; ++a) {
                    const MandelVec6 b = mandel_sym_outer(Vec3::Unit(a), gr);
                    r[a] += w * b.dot(C * b);
                }
            }
        }
        double* o = diag.at(nid);
        o[0] = r[0];
        o[1] = r[1];
        o[2] = r[2];
    });
    return diag;
}

} // namespace cellhom
