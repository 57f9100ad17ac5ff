#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cellhom/errors.hpp"
#include "cellhom/material.hpp"
#include "cellhom/random_fields.hpp"

#include "support.hpp"

using namespace cellhom;

namespace {

namespace fs = std::filesystem;

// fresh scratch directory per test run
fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cellhom_material_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

MandelMat66 scaled_identity(double c) { return c * MandelMat66::Identity(); }

} // namespace

TEST_CASE("isotropic stiffness: spectrum and closed-form action") {
    const double lambda = 1.0, mu = 1.0;
    const MandelMat66 C = isotropic_tensor(lambda, mu);

    // eigenvalues 3 lambda + 2 mu (hydrostatic) and 2 mu (five-fold)
    Eigen::SelfAdjointEigenSolver<MandelMat66> es(C);
    const auto ev = es.eigenvalues();
    for (int k = 0; k < 5; ++k) CHECK(ev[k] == doctest::Approx(2.0 * mu).epsilon(1e-13));
    CHECK(ev[5] == doctest::Approx(3.0 * lambda + 2.0 * mu).epsilon(1e-13));

    // sigma = lambda tr(e) I + 2 mu e, checked componentwise on random strains
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const MandelVec6 e = random_mandel(rng);
        const Mat3 em = from_mandel(e);
        const Mat3 expect = lambda * em.trace() * Mat3::Identity() + 2.0 * mu * em;
        const Mat3 got = from_mandel(MandelVec6(C * e));
        CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("compliance inverts the stiffness") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const MandelMat66 C = random_spd(rng);
        const MandelMat66 B = compliance(C);
        CHECK((B * C - MandelMat66::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    }

    const MandelMat66 B = compliance(isotropic_tensor(2.0, 0.5));
    Eigen::SelfAdjointEigenSolver<MandelMat66> es(B);
    CHECK(es.eigenvalues()[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-13));
    CHECK(es.eigenvalues()[5] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("phase construction rejects bad tensors") {
    CHECK_THROWS_AS(Phase::isotropic(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(Phase::isotropic(-1.0, 1.0), ConfigError); // bulk modulus < 0
    CHECK_NOTHROW(Phase::isotropic(-0.5, 1.0));                // negative lambda is fine

    MandelMat66 notsym = MandelMat66::Identity();
    notsym(0, 1) = 0.3;
    CHECK_THROWS_AS(Phase::anisotropic(notsym), ConfigError);

    MandelMat66 indefinite = MandelMat66::Identity();
    indefinite(5, 5) = -1.0;
    CHECK_THROWS_AS(Phase::anisotropic(indefinite), ConfigError);

    CHECK(Phase::isotropic(1.0, 1.0).min_eigenvalue() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("volume averages of a 50/50 two-phase mix") {
    const Grid g(8, 8, 8);
    const Phase stiff = Phase::anisotropic(scaled_identity(2.0));
    const Phase soft = Phase::anisotropic(scaled_identity(1.0));
    const MaterialMap m = make_laminate(g, 0, 0.5, stiff, soft);

    const auto frac = m.volume_fractions();
    CHECK(frac[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(frac[1] == doctest::Approx(0.5).epsilon(1e-15));

    // arithmetic mean 1.5 I, harmonic mean (2/(1/2 + 1)) I = (4/3) I
    const VoigtReuss vr = voigt_reuss(m);
    CHECK((vr.voigt - scaled_identity(1.5)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((vr.reuss - scaled_identity(4.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("arithmetic mean dominates harmonic mean") {
    Rng rng(21);
    const Grid g(6, 6, 6);
    for (int trial = 0; trial < 20; ++trial) {
        const Phase p1 = Phase::anisotropic(random_spd(rng));
        const Phase p2 = Phase::anisotropic(random_spd(rng));
        const MaterialMap m = make_random_two_phase(g, 100 + trial, 0.4, p1, p2);
        const VoigtReuss vr = voigt_reuss(m);

        Eigen::SelfAdjointEigenSolver<MandelMat66> es(MandelMat66(vr.voigt - vr.reuss));
        const double scale = vr.voigt.cwiseAbs().maxCoeff();
        CHECK(es.eigenvalues()[0] >= -1e-10 * scale);
    }
}

TEST_CASE("material application multiplies per sample") {
    const Grid g(3, 3, 3);
    const Lattice lat = Lattice::unit_cube();
    const Phase p1 = Phase::isotropic(1.0, 1.0);
    const Phase p2 = Phase::isotropic(10.0, 10.0);
    const MaterialMap m = make_random_two_phase(g, 7, 0.5, p1, p2);

    const SymField e = random_sym_field(g, lat, 12);
    const SymField sigma = apply_material(m, e);
    for (std::size_t s = 0; s < e.samples(); ++s) {
        const MandelVec6 expect = m.C(s / 8) * e.mandel(s);
        CHECK((sigma.mandel(s) - expect).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("laminate generator fills whole layers") {
    const Grid g(10, 4, 4);
    const Phase a = Phase::isotropic(1.0, 1.0, "a");
    const Phase b = Phase::isotropic(2.0, 2.0, "b");

    const MaterialMap m = make_laminate(g, 0, 0.3, a, b);
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const std::uint8_t want = i < 3 ? 0 : 1;
                CHECK(m.id(g.node_id(i, j, k)) == want);
            }

    // axis selection moves the layering direction
    const MaterialMap mz = make_laminate(Grid(4, 4, 10), 2, 0.5, a, b);
    CHECK(mz.id(mz.grid.node_id(3, 3, 4)) == 0);
    CHECK(mz.id(mz.grid.node_id(0, 0, 5)) == 1);

    CHECK_THROWS_AS(make_laminate(g, 3, 0.5, a, b), ConfigError);
    CHECK_THROWS_AS(make_laminate(g, 0, 1.5, a, b), ConfigError);

    CHECK(make_laminate(g, 0, 0.0, a, b).homogeneous());
    CHECK_FALSE(m.homogeneous());
}

TEST_CASE("random microstructure is seed-reproducible") {
    const Grid g(8, 8, 8);
    const Phase p1 = Phase::isotropic(1.0, 1.0);
    const Phase p2 = Phase::isotropic(5.0, 5.0);

    const MaterialMap a = make_random_two_phase(g, 77, 0.35, p1, p2);
    const MaterialMap b = make_random_two_phase(g, 77, 0.35, p1, p2);
    CHECK(a.voxel == b.voxel);

    const MaterialMap c = make_random_two_phase(g, 78, 0.35, p1, p2);
    CHECK(a.voxel != c.voxel);

    const double frac2 = a.volume_fractions()[1];
    CHECK(frac2 > 0.2);
    CHECK(frac2 < 0.5);
}

TEST_CASE("microstructure file round trip") {
    const Grid g(5, 3, 2);
    const Phase p1 = Phase::isotropic(1.0, 2.0, "matrix");
    MandelMat66 C2 = isotropic_tensor(4.0, 1.0);
    C2(0, 1) += 0.25; // make it genuinely anisotropic
    C2(1, 0) += 0.25;
    const Phase p2 = Phase::anisotropic(C2, "inclusion");
    const MaterialMap m = make_random_two_phase(g, 5, 0.5, p1, p2);

    const fs::path geo = scratch() / "round.chom";
    const fs::path tab = scratch() / "round.json";
    save_microstructure(geo, m);

    std::ofstream out(tab);
    out << "{ \"phases\": [\n"
        << "  { \"id\": 0, \"lambda\": 1.0, \"mu\": 2.0, \"label\": \"matrix\" },\n"
        << "  { \"id\": 1, \"mandel_upper\": [";
    for (int a = 0, k = 0; a < 6; ++a)
        for (int b = a; b < 6; ++b, ++k) out << (k ? ", " : "") << C2(a, b);
    out << "], \"label\": \"inclusion\" }\n] }\n";
    out.close();

    const MaterialMap back = load_microstructure(geo, tab);
    CHECK(back.grid == g);
    CHECK(back.voxel == m.voxel);
    CHECK((back.phases[0].C - p1.C).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((back.phases[1].C - C2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(back.phases[1].label == "inclusion");
}

TEST_CASE("geometry loader reports what broke") {
    const fs::path tab = scratch() / "phases.json";
    std::ofstream(tab) << R"({ "phases": [ { "id": 0, "lambda": 1.0, "mu": 1.0 } ] })";

    const fs::path truncated = scratch() / "short.chom";
    std::ofstream(truncated, std::ios::binary) << "CHOM\x04";
    CHECK_THROWS_WITH_AS(load_microstructure(truncated, tab),
                         doctest::Contains("truncated header"), ConfigError);

    const fs::path wrong = scratch() / "wrong.chom";
    {
        std::ofstream o(wrong, std::ios::binary);
        const std::uint32_t n = 2;
        o << "XXXX";
        for (int k = 0; k < 3; ++k) o.write(reinterpret_cast<const char*>(&n), 4);
    }
    CHECK_THROWS_WITH_AS(load_microstructure(wrong, tab), doctest::Contains("bad magic"),
                         ConfigError);

    const fs::path missing_voxels = scratch() / "missing.chom";
    {
        std::ofstream o(missing_voxels, std::ios::binary);
        const std::uint32_t n = 4;
        o << "CHOM";
        for (int k = 0; k < 3; ++k) o.write(reinterpret_cast<const char*>(&n), 4);
        o.write("\0\0\0", 3); // 3 of 64 voxels
    }
    CHECK_THROWS_WITH_AS(load_microstructure(missing_voxels, tab), doctest::Contains("64"),
                         ConfigError);
}

TEST_CASE("phase table validation") {
    const Grid g(2, 2, 2);
    const fs::path geo = scratch() / "geo2.chom";
    save_microstructure(geo, make_homogeneous(g, Phase::isotropic(1, 1)));

    auto table = [&](const char* text) {
        const fs::path p = scratch() / "table_case.json";
        std::ofstream(p) << text;
        return p;
    };

    CHECK_THROWS_WITH_AS(load_microstructure(geo, table(R"({ "phase": [] })")),
                         doctest::Contains("phases"), ConfigError);
    CHECK_THROWS_WITH_AS(
        load_microstructure(geo, table(R"({ "phases": [ { "id": 0 } ] })")),
        doctest::Contains("lambda/mu or mandel_upper"), ConfigError);
    CHECK_THROWS_WITH_AS(
        load_microstructure(
            geo, table(R"({ "phases": [ { "id": 0, "lambda": 1, "mu": 1 },)"
                       R"( { "id": 0, "lambda": 2, "mu": 2 } ] })")),
        doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_WITH_AS(
        load_microstructure(
            geo, table(R"({ "phases": [ { "id": 1, "lambda": 1, "mu": 1 } ] })")),
        doctest::Contains("missing"), ConfigError);
    CHECK_THROWS_WITH_AS(
        load_microstructure(geo, table(R"({ "phases": [ { "id": 0, "mandel_upper": [1, 2] } ] })")),
        doctest::Contains("21"), ConfigError);

    // voxel referencing a phase the table does not define
    const Grid g2(2, 2, 2);
    MaterialMap two = make_laminate(g2, 0, 0.5, Phase::isotropic(1, 1), Phase::isotropic(2, 2));
    save_microstructure(geo, two);
    CHECK_THROWS_WITH_AS(
        load_microstructure(geo, table(R"({ "phases": [ { "id": 0, "lambda": 1, "mu": 1 } ] })")),
        doctest::Contains("phase"), ConfigError);
}
