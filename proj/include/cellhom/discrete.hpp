#pragma once

#include "cellhom/fields.hpp"
#include "cellhom/geometry.hpp"
#include "cellhom/material.hpp"

namespace cellhom {

struct SolveStats {
    int iterations = 0;
    // Relative true residual |b - K x| / |b|, recomputed after the iteration
    // ends (0 when |b| sits under the zero floor). The stopping test runs on
    // a smoothed recurrence, so at convergence this can land slightly above
    // the requested tolerance, by up to a factor 1.25.
    double residual = 0.0;
    bool converged = true;
    std::vector<double> history; // one entry per iteration, non-increasing
};

// Discrete operator bundle for one (grid, lattice) pair. Shape-function
// gradients with respect to y are constant across elements (the element map
// is affine: y = G * diag(1/n1,1/n2,1/n3) * (xi + offset)), so a single
// 8x8x3 table drives every kernel.
//
// Conventions, used consistently by everything downstream:
//   sym_gradient:    G : LP -> quadrature fields,  e(Ay + phi)
//   weak_divergence: SymField -> covector, pair(weak_divergence(mu), v) ==
//                    -inner(mu, sym_gradient(v)) for periodic v, exactly
//                    (same table, transposed loop), which is the discrete
//                    integration-by-parts identity with no boundary term.
//   apply_stiffness: v |-> -weak_divergence(C * sym_gradient(v)); symmetric
//                    positive semidefinite with kernel = the 3 translations.
class SymGradOp {
public:
    SymGradOp(const Grid& g, const Lattice& lat);

    const Grid& grid() const { return grid_; }
    const Lattice& lattice() const { return lattice_; }
    double quad_weight() const { return w_; }

    SymField sym_gradient(const LPField& u) const;
    SymField sym_gradient(const VecField& periodic) const;
    void sym_gradient(const MandelVec6& A, const VecField& phi, SymField& out) const;

    GradField full_gradient(const LPField& u) const;
    GradField full_gradient(const VecField& periodic) const;

    NodalCovector weak_divergence(const SymField& sigma) const;
    void weak_divergence(const SymField& sigma, NodalCovector& out) const;

    // transpose of the full (non-symmetrized) gradient
    NodalCovector weak_divergence_full(const GradField& h) const;

    NodalCovector apply_stiffness(const MaterialMap& m, const VecField& v) const;
    void apply_stiffness(const MaterialMap& m, const VecField& v, NodalCovector& out,
                         SymField& scratch) const;

    // consistent mass action and the Jacobi diagonal of apply_stiffness
    NodalCovector apply_mass(const VecField& v) const;
    VecField stiffness_diagonal(const MaterialMap& m) const;

    // Same gather as weak_divergence with every term replaced by its absolute
    // value: the roundoff scale of the assembled covector. A right-hand side
    // whose norm is ~1e-16 of this is structurally zero.
    double gather_scale(const SymField& sigma) const;

    // d N_c / d y at Gauss point q (physical gradient, constant per grid)
    const double* shape_gradient(int q, int c) const { return dNdy_[q][c]; }
    double shape_value(int q, int c) const;

private:
    Grid grid_;
    Lattice lattice_;
    double w_;
    double dNdy_[8][8][3];
    double mass_[8][8]; // element mass matrix (weight included)
};

// W-orthogonal projection of tau onto the divergence-free fields with the
// same cell average: solves the identity-material normal equations
// (G^T W G) z = G^T W tau and returns tau - sym_gradient(z). Idempotent up
// to solver tolerance; preserves cell_average exactly up to roundoff.
SymField make_divfree(const SymGradOp& op, const SymField& tau, double tol,
                      SolveStats* stats = nullptr);

} // namespace cellhom
