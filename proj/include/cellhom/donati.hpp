#pragma once

#include "cellhom/solver.hpp"

namespace cellhom {

// --- orthogonal decompositions ----------------------------------------------

// tau = sym_gradient(phi) + residual with respect to the W inner product;
// the residual is weakly divergence-free up to the solve tolerance.
struct GradientFit {
    VecField phi;
    SymField gradient;
    SymField residual;
    SolveStats stats;
};
GradientFit donati_project_periodic(const SymGradOp& op, const SymField& tau, double tol);

// tau = A + sym_gradient(phi) + residual: the W-orthogonal three-way split
// into constants, gradients of periodic fields, and the divergence-free
// zero-mean remainder. field = (A, phi) is the fitted element of LP.
struct LPFit {
    LPField field;
    SymField gradient; // strain of `field`, constants included
    SymField residual;
    SolveStats stats;
};
LPFit donati_project_lp(const SymGradOp& op, const SymField& tau, double tol);

// --- average products ----------------------------------------------------------

// For v in LP and weakly divergence-free sigma, the mean of the pointwise
// product equals the product of the means:
//   (1/|Y|) inner(sigma, e(v)) == <avg sigma, avg e(v)>.
// Checked inputs: throws PreconditionError if sigma's weak divergence is not
// small relative to its assembly scale.
struct HillMandel {
    double mean_of_product = 0.0;
    double product_of_means = 0.0;
    double div_rel = 0.0; // |weak_divergence(sigma)| / gather_scale(sigma)
    double defect() const { return mean_of_product - product_of_means; }
};
HillMandel hill_mandel(const SymGradOp& op, const LPField& v, const SymField& sigma,
                       double precond_tol = 1e-8);

// --- pointwise compatibility operators ------------------------------------------
//
// These act on nodal samples (plain tensor components, no Mandel weights)
// with periodic central differences; derivatives with respect to y on a
// non-orthonormal lattice combine the lattice-direction differences through
// G^-T. Repeated first differences are used for second derivatives so that
// discrete partials commute exactly.

struct NodalSymField {
    Grid grid;
    Lattice lattice;
    std::vector<double> s; // 6 per node: 11, 22, 33, 23, 13, 12

    NodalSymField() = default;
    NodalSymField(const Grid& g, const Lattice& lat)
        : grid(g), lattice(lat), s(6 * g.node_count(), 0.0) {}

    double* at(std::size_t node) { return s.data() + 6 * node; }
    const double* at(std::size_t node) const { return s.data() + 6 * node; }

    static int comp(int i, int j); // (i,j) -> storage slot
    double value(std::size_t node, int i, int j) const { return at(node)[comp(i, j)]; }
};

struct NodalMatField {
    Grid grid;
    Lattice lattice;
    std::vector<double> m; // 9 per node, row-major

    NodalMatField() = default;
    NodalMatField(const Grid& g, const Lattice& lat)
        : grid(g), lattice(lat), m(9 * g.node_count(), 0.0) {}

    double* at(std::size_t node) { return m.data() + 9 * node; }
    const double* at(std::size_t node) const { return m.data() + 9 * node; }
    double max_abs() const;
};

// R_ijkl(e) = d_l d_j e_ik + d_k d_i e_jl - d_l d_i e_jk - d_k d_j e_il,
// antisymmetric in (i,j) and in (k,l), symmetric under pair exchange.
struct Curvature {
    Grid grid;
    Lattice lattice;
    std::vector<double> r; // 81 per node

    double at(std::size_t node, int i, int j, int k, int l) const {
        return r[81 * node + 27 * i + 9 * j + 3 * k + l];
    }
    double max_abs() const;
};
Curvature saint_venant_residual(const NodalSymField& e);

// (CURL e)_ij = eps_ilk d_l e_jk, and the same formula applied again
NodalMatField curl(const NodalSymField& e);
NodalMatField curl(const NodalMatField& m);
NodalMatField curl_curl(const NodalSymField& e);

// contraction (1/4) eps_ilk eps_jpq R_lkpq; agrees with curl_curl to
// roundoff because the discrete differences commute
NodalMatField curvature_contraction(const Curvature& R);

} // namespace cellhom
