#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cellhom/fields.hpp"
#include "cellhom/geometry.hpp"
#include "cellhom/mandel.hpp"

namespace cellhom {

MandelMat66 isotropic_tensor(double lambda, double mu);

// B such that B*C = I; input must be SPD (checked at Phase construction)
MandelMat66 compliance(const MandelMat66& C);

// One material phase: a symmetric positive definite stiffness tensor.
struct Phase {
    MandelMat66 C = MandelMat66::Identity();
    std::string label;

    static Phase isotropic(double lambda, double mu, std::string label = {});
    static Phase anisotropic(const MandelMat66& C, std::string label = {});

    double min_eigenvalue() const;
};

// Voxel -> phase assignment over an element grid. Element ids follow the grid
// linearization (i fastest).
struct MaterialMap {
    Grid grid;
    Lattice lattice;
    std::vector<Phase> phases;
    std::vector<std::uint8_t> voxel; // one phase id per element

    MaterialMap() = default;
    MaterialMap(const Grid& g, const Lattice& lat, std::vector<Phase> ph,
                std::vector<std::uint8_t> vox);

    const MandelMat66& C(std::size_t element) const { return phases[voxel[element]].C; }
    std::uint8_t id(std::size_t element) const { return voxel[element]; }
    bool homogeneous() const;
    std::vector<double> volume_fractions() const;
};

// arithmetic and harmonic volume averages: upper/lower stiffness bounds
struct VoigtReuss {
    MandelMat66 voigt;
    MandelMat66 reuss;
};
VoigtReuss voigt_reuss(const MaterialMap& m);

// sigma(q) = C(element of q) * e(q)
SymField apply_material(const MaterialMap& m, const SymField& e);

// --- file loading ------------------------------------------------------------
//
// Geometry file: 16-byte header (magic "CHOM", then u32 n1, n2, n3, little
// endian), followed by n1*n2*n3 phase ids (u8), i fastest. Phase table: JSON
// { "phases": [ { "id": 0, "lambda": .., "mu": .. } |
//               { "id": 1, "mandel_upper": [21 numbers, row-major upper
//                 triangle of the 6x6 Mandel matrix] } ] }
// Errors carry file, offset/voxel or phase id context.
MaterialMap load_microstructure(const std::filesystem::path& geometry,
                                const std::filesystem::path& phase_table,
                                const Lattice& lat = Lattice::unit_cube());

std::vector<Phase> load_phase_table(const std::filesystem::path& path);

void save_microstructure(const std::filesystem::path& geometry, const MaterialMap& m);

// --- built-in generators -----------------------------------------------------

MaterialMap make_homogeneous(const Grid& g, const Phase& p,
                             const Lattice& lat = Lattice::unit_cube());

// Layers of p1 filling the first round(theta * n_axis) voxel layers along
// `axis`, p2 elsewhere. theta is quantized to whole layers.
MaterialMap make_laminate(const Grid& g, int axis, double theta, const Phase& p1,
                          const Phase& p2, const Lattice& lat = Lattice::unit_cube());

// Bernoulli(fraction) draw of p2 per voxel, seeded and reproducible.
MaterialMap make_random_two_phase(const Grid& g, std::uint64_t seed, double fraction,
                                  const Phase& p1, const Phase& p2,
                                  const Lattice& lat = Lattice::unit_cube());

} // namespace cellhom
