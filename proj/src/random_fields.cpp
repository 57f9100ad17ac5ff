#include "cellhom/random_fields.hpp"

namespace cellhom {

VecField random_periodic(const Grid& g, std::uint64_t seed, double amp) {
    Rng rng(seed);
    VecField f(g);
    for (auto& x : f.v) x = rng.uniform(-amp, amp);
    subtract_nodal_mean(f);
    return f;
}

SymField random_sym_field(const Grid& g, const Lattice& lat, std::uint64_t seed, double amp) {
    Rng rng(seed);
    SymField f(g, lat);
    for (auto& x : f.s) x = rng.uniform(-amp, amp);
    return f;
}

MandelVec6 random_mandel(Rng& rng, double amp) {
    MandelVec6 m;
    for (int i = 0; i < 6; ++i) m[i] = rng.uniform(-amp, amp);
    return m;
}

MandelMat66 random_spd(Rng& rng, double floor) {
    MandelMat66 A;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = rng.uniform();
    MandelMat66 C = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<MandelMat66> es(C);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < floor) C += (floor - lo) * MandelMat66::Identity();
    return C;
}

} // namespace cellhom
