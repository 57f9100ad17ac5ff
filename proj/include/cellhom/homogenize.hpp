#pragma once

#include <array>

#include "cellhom/solver.hpp"

namespace cellhom {

// Effective stiffness computed twice from the same six corrector solves:
//   stress route:  column b = cell average of C e(u_b)
//   energy route:  entry (a,b) = (1/|Y|) inner(C e(u_b), e(u_a))
// The two agree (and the energy route is symmetric) up to solver tolerance;
// their disagreement is reported, never hidden by symmetrization.
struct HomReport {
    Grid grid;
    Lattice lattice;
    double tol = 0.0;
    MandelMat66 ch_stress = MandelMat66::Zero();
    MandelMat66 ch_energy = MandelMat66::Zero();
    MandelMat66 voigt = MandelMat66::Zero();
    MandelMat66 reuss = MandelMat66::Zero();
    std::array<int, 6> iterations{};
    std::array<double, 6> residuals{}; // final relative residual per column

    double route_defect() const; // max |stress - energy| entry / max |entry|
    double symmetry_defect() const;
};

HomReport homogenized_tensor(const SymGradOp& op, const MaterialMap& m,
                             const SolverOptions& opt = {});

// Closed-form effective tensor of a two-phase layer stack: phase 1 with
// volume fraction theta, interfaces orthogonal to the unit vector n. Strain
// is uniform per layer and jumps by sym(a (x) n); traction continuity fixes
// a through the mixed acoustic tensor. Independent of the FEM machinery.
MandelMat66 laminate_oracle(const MandelMat66& C1, const MandelMat66& C2, double theta,
                            const Vec3& n);

} // namespace cellhom
