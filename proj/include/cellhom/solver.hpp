#pragma once

#include <functional>
#include <span>

#include "cellhom/discrete.hpp"

namespace cellhom {

struct SolverOptions {
    double tol = 1e-8; // relative: stop at |r| <= tol * |b|
    int max_iter = 0;  // 0: max(1000, 10 * cbrt(#unknowns))
};

int default_max_iter(std::size_t unknowns);

// Deflated, Jacobi-preconditioned CG with minimal-residual smoothing over
// flat arrays of 3 components per node.
//
// Deflation: iterates are kept orthogonal to the per-component constants
// (the translation kernel of the stiffness), so the singular systems here
// are solved in the complement where they are SPD.
//
// Smoothing: alongside the CG iterate x a smoothed iterate xs is kept with
// rs_new = rs + eta (r - rs), eta the 1-D least-squares minimizer; since
// eta = 0 is admissible, |rs| never increases. The reported history and the
// stopping test both use |rs|, so the logged sequence is non-increasing by
// construction while converging at the CG rate.
//
// zero_floor: absolute threshold under which b counts as zero (assembled
// right-hand sides cancel only to roundoff; see SymGradOp::gather_scale).
SolveStats pcg(const std::function<void(std::span<const double>, std::span<double>)>& apply,
               std::span<const double> b, std::span<double> x, std::span<const double> jacobi,
               double tol, int max_iter, double zero_floor = 0.0);

// One solved corrector problem: u = A y + phi with
// inner(C e(u), e(v)) = 0 for all periodic v.
struct CellSolution {
    MandelVec6 A = MandelVec6::Zero();
    VecField phi;
    SymField strain; // e(A y + phi); cell average == A
    SymField stress; // C * strain; weakly divergence-free
    SolveStats stats;
};

// Throws SolverError if the tolerance is not reached within max_iter.
CellSolution solve_cell_problem(const SymGradOp& op, const MaterialMap& m, const MandelVec6& A,
                                const SolverOptions& opt = {});

// z minimizing |tau - sym_gradient(z)|_W over zero-mean periodic fields
// (identity-material normal equations). Backs make_divfree and the
// orthogonal-decomposition projections.
VecField fit_gradient(const SymGradOp& op, const SymField& tau, double tol,
                      SolveStats* stats = nullptr);

} // namespace cellhom
