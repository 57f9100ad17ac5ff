#include "cellhom/homogenize.hpp"

#include <cmath>

namespace cellhom {

double HomReport::route_defect() const {
    const double scale = ch_stress.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (ch_stress - ch_energy).cwiseAbs().maxCoeff() / scale;
}

double HomReport::symmetry_defect() const {
    const double scale = ch_energy.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (ch_energy - ch_energy.transpose()).cwiseAbs().maxCoeff() / scale;
}

HomReport homogenized_tensor(const SymGradOp& op, const MaterialMap& m,
                             const SolverOptions& opt) {
    HomReport rep;
    rep.grid = op.grid();
    rep.lattice = op.lattice();
    rep.tol = opt.tol;

    const auto vr = voigt_reuss(m);
    rep.voigt = vr.voigt;
    rep.reuss = vr.reuss;

    std::array<SymField, 6> strains;
    std::array<SymField, 6> stresses;
    for (int b = 0; b < 6; ++b) {
        CellSolution sol = solve_cell_problem(op, m, MandelVec6::Unit(b), opt);
        rep.iterations[b] = sol.stats.iterations;
        rep.residuals[b] = sol.stats.residual;
        rep.ch_stress.col(b) = cell_average(sol.stress);
        strains[b] = std::move(sol.strain);
        stresses[b] = std::move(sol.stress);
    }
    for (int b = 0; b < 6; ++b)
        for (int a = 0; a < 6; ++a)
            rep.ch_energy(a, b) = inner(stresses[b], strains[a]) / op.lattice().volume;
    return rep;
}

MandelMat66 laminate_oracle(const MandelMat66& C1, const MandelMat66& C2, double theta,
                            const Vec3& n_in) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("laminate fraction outside [0,1]");
    const Vec3 n = n_in.normalized();
    // acoustic tensor of the swapped-weight mix (the coefficient of C1 is the
    // fraction of phase 2): M a = [(1-theta) C1 + theta C2] sym(a x n) n
    const MandelMat66 Cmix = (1.0 - theta) * C1 + theta * C2;
    const Tensor4 T = mandel_to_tensor4(Cmix);
    Mat3 M = Mat3::Zero();
    for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p) {
            double s = 0.0;
            for (int l = 0; l < 3; ++l)
                for (int q = 0; q < 3; ++q) s += T[j][l][p][q] * n[l] * n[q];
            M(j, p) = s;
        }
    const Mat3 Minv = M.inverse();

    MandelMat66 CH;
    for (int b = 0; b < 6; ++b) {
        const MandelVec6 A = MandelVec6::Unit(b);
        const Vec3 t = from_mandel((C2 - C1) * A) * n;
        const Vec3 a = Minv * t;
        const MandelVec6 jump = mandel_sym_outer(a, n);
        const MandelVec6 e1 = A + (1.0 - theta) * jump;
        const MandelVec6 e2 = A - theta * jump;
        CH.col(b) = theta * (C1 * e1) + (1.0 - theta) * (C2 * e2);
    }
    return CH;
}

} // namespace cellhom
