#include "cellhom/material.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cellhom/parallel.hpp"

namespace cellhom {

MandelMat66 isotropic_tensor(double lambda, double mu) {
    MandelMat66 C = 2.0 * mu * MandelMat66::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) C(i, j) += lambda;
    return C;
}

MandelMat66 compliance(const MandelMat66& C) { return C.inverse(); }

Phase Phase::isotropic(double lambda, double mu, std::string label) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
        throw ConfigError("isotropic phase needs mu > 0 and 3*lambda + 2*mu > 0 (got lambda=" +
                          std::to_string(lambda) + ", mu=" + std::to_string(mu) + ")");
    Phase p;
    p.C = isotropic_tensor(lambda, mu);
    p.label = label.empty() ? "isotropic" : std::move(label);
    return p;
}

Phase Phase::anisotropic(const MandelMat66& C, std::string label) {
    const double scale = C.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw ConfigError("zero stiffness tensor");
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ConfigError("stiffness tensor is not symmetric");
    Eigen::SelfAdjointEigenSolver<MandelMat66> es(0.5 * (C + C.transpose()));
    if (!(es.eigenvalues().minCoeff() > 1e-12 * scale))
        throw ConfigError("stiffness tensor is not positive definite (min eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()) + ")");
    Phase p;
    p.C = 0.5 * (C + C.transpose());
    p.label = label.empty() ? "anisotropic" : std::move(label);
    return p;
}

double Phase::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MandelMat66> es(C);
    return es.eigenvalues().minCoeff();
}

MaterialMap::MaterialMap(const Grid& g, const Lattice& lat, std::vector<Phase> ph,
                         std::vector<std::uint8_t> vox)
    : grid(g), lattice(lat), phases(std::move(ph)), voxel(std::move(vox)) {
    if (voxel.size() != grid.element_count())
        throw DimensionError("voxel array has " + std::to_string(voxel.size()) +
                             " entries, grid has " + std::to_string(grid.element_count()) +
                             " elements");
    if (phases.empty()) throw ConfigError("material map without phases");
    for (std::size_t e = 0; e < voxel.size(); ++e)
        if (voxel[e] >= phases.size()) {
            const auto c = grid.node_coords(e);
            throw ConfigError("voxel (" + std::to_string(c[0]) + "," + std::to_string(c[1]) +
                              "," + std::to_string(c[2]) + ") references phase id " +
                              std::to_string(int(voxel[e])) + " but only " +
                              std::to_string(phases.size()) + " phases are defined");
        }
}

bool MaterialMap::homogeneous() const {
    for (std::size_t e = 1; e < voxel.size(); ++e)
        if (voxel[e] != voxel[0]) return false;
    return true;
}

std::vector<double> MaterialMap::volume_fractions() const {
    std::vector<double> f(phases.size(), 0.0);
    for (auto id : voxel) f[id] += 1.0;
    for (auto& x : f) x /= static_cast<double>(voxel.size());
    return f;
}

VoigtReuss voigt_reuss(const MaterialMap& m) {
    const auto f = m.volume_fractions();
    MandelMat66 cavg = MandelMat66::Zero();
    MandelMat66 bavg = MandelMat66::Zero();
    for (std::size_t p = 0; p < m.phases.size(); ++p) {
        if (f[p] == 0.0) continue;
        cavg += f[p] * m.phases[p].C;
        bavg += f[p] * compliance(m.phases[p].C);
    }
    return {cavg, bavg.inverse()};
}

SymField apply_material(const MaterialMap& m, const SymField& e) {
    require_same(m.grid, e.grid, "apply_material");
    SymField sigma(e.grid, e.lattice);
    const std::size_t nel = e.grid.element_count();
    par::for_each(nel, [&](std::size_t el) {
        const MandelMat66& C = m.C(el);
        for (int q = 0; q < 8; ++q) {
            const std::size_t s = 8 * el + q;
            Eigen::Map<MandelVec6>(sigma.at(s)).noalias() =
                C * Eigen::Map<const MandelVec6>(e.at(s));
        }
    });
    return sigma;
}

// --- binary geometry + JSON phase table --------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'H', 'O', 'M'};

std::uint32_t read_u32_le(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

MaterialMap load_microstructure(const std::filesystem::path& geometry,
                                const std::filesystem::path& phase_table,
                                const Lattice& lat) {
    std::ifstream in(geometry, std::ios::binary);
    if (!in) throw ConfigError("cannot open geometry file " + geometry.string());
    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    if (in.gcount() != 16)
        throw ConfigError(geometry.string() + ": truncated header (" +
                          std::to_string(in.gcount()) + " of 16 bytes)");
    if (std::memcmp(header, kMagic, 4) != 0)
        throw ConfigError(geometry.string() + ": bad magic, expected \"CHOM\"");
    const std::uint32_t n1 = read_u32_le(header + 4);
    const std::uint32_t n2 = read_u32_le(header + 8);
    const std::uint32_t n3 = read_u32_le(header + 12);
    if (n1 < 2 || n2 < 2 || n3 < 2 || n1 > (1u << 16) || n2 > (1u << 16) || n3 > (1u << 16))
        throw ConfigError(geometry.string() + ": unreasonable dimensions " + std::to_string(n1) +
                          "x" + std::to_string(n2) + "x" + std::to_string(n3));
    const std::size_t count = std::size_t(n1) * n2 * n3;
    std::vector<std::uint8_t> vox(count);
    in.read(reinterpret_cast<char*>(vox.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw ConfigError(geometry.string() + ": expected " + std::to_string(count) +
                          " voxels, file holds " + std::to_string(in.gcount()));
    char extra;
    if (in.read(&extra, 1))
        throw ConfigError(geometry.string() + ": trailing bytes after voxel data");

    auto phases = load_phase_table(phase_table);
    return MaterialMap(Grid(int(n1), int(n2), int(n3)), lat, std::move(phases), std::move(vox));
}

std::vector<Phase> load_phase_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open phase table " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.contains("phases") || !j["phases"].is_array())
        throw ConfigError(path.string() + ": missing \"phases\" array");

    std::vector<Phase> phases;
    std::vector<bool> seen;
    for (const auto& entry : j["phases"]) {
        if (!entry.contains("id") || !entry["id"].is_number_unsigned())
            throw ConfigError(path.string() + ": phase entry without unsigned \"id\"");
        const std::size_t id = entry["id"].get<std::size_t>();
        if (id > 255) throw ConfigError(path.string() + ": phase id > 255");
        if (id >= phases.size()) {
            phases.resize(id + 1);
            seen.resize(id + 1, false);
        }
        if (seen[id]) throw ConfigError(path.string() + ": duplicate phase id " + std::to_string(id));
        seen[id] = true;

        const std::string label = entry.value("label", std::string{});
        try {
            if (entry.contains("lambda") && entry.contains("mu")) {
                phases[id] = Phase::isotropic(entry["lambda"].get<double>(),
                                              entry["mu"].get<double>(), label);
            } else if (entry.contains("mandel_upper")) {
                const auto& u = entry["mandel_upper"];
                if (!u.is_array() || u.size() != 21)
                    throw ConfigError("\"mandel_upper\" must hold 21 numbers");
                MandelMat66 C;
                std::size_t t = 0;
                for (int r = 0; r < 6; ++r)
                    for (int c = r; c < 6; ++c) {
                        C(r, c) = u[t++].get<double>();
                        C(c, r) = C(r, c);
                    }
                phases[id] = Phase::anisotropic(C, label);
            } else {
                throw ConfigError("needs either lambda/mu or mandel_upper");
            }
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ": phase " + std::to_string(id) + ": " + e.what());
        }
    }
    for (std::size_t id = 0; id < phases.size(); ++id)
        if (!seen[id])
            throw ConfigError(path.string() + ": phase ids not contiguous, missing " +
                              std::to_string(id));
    if (phases.empty()) throw ConfigError(path.string() + ": empty phase table");
    return phases;
}

void save_microstructure(const std::filesystem::path& geometry, const MaterialMap& m) {
    std::ofstream out(geometry, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + geometry.string());
    out.write(kMagic, 4);
    write_u32_le(out, std::uint32_t(m.grid.n1));
    write_u32_le(out, std::uint32_t(m.grid.n2));
    write_u32_le(out, std::uint32_t(m.grid.n3));
    out.write(reinterpret_cast<const char*>(m.voxel.data()),
              static_cast<std::streamsize>(m.voxel.size()));
    if (!out) throw ConfigError("write failed on " + geometry.string());
}

// --- generators ----------------------------------------------------------------

MaterialMap make_homogeneous(const Grid& g, const Phase& p, const Lattice& lat) {
    return MaterialMap(g, lat, {p}, std::vector<std::uint8_t>(g.element_count(), 0));
}

MaterialMap make_laminate(const Grid& g, int axis, double theta, const Phase& p1,
                          const Phase& p2, const Lattice& lat) {
    if (axis < 0 || axis > 2) throw ConfigError("laminate axis must be 0, 1 or 2");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("laminate fraction outside [0,1]");
    const int n = g.extent(axis);
    const int layers = static_cast<int>(std::lround(theta * n));
    std::vector<std::uint8_t> vox(g.element_count());
    for (std::size_t e = 0; e < vox.size(); ++e)
        vox[e] = g.node_coords(e)[axis] < layers ? 0 : 1;
    return MaterialMap(g, lat, {p1, p2}, std::move(vox));
}

MaterialMap make_random_two_phase(const Grid& g, std::uint64_t seed, double fraction,
                                  const Phase& p1, const Phase& p2, const Lattice& lat) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("fraction outside [0,1]");
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> vox(g.element_count());
    // draw by threshold on the raw 64-bit stream so the assignment depends
    // only on (seed, fraction), not on distribution internals
    const double denom = static_cast<double>(std::mt19937_64::max()) + 1.0;
    for (auto& v : vox) v = (static_cast<double>(rng()) / denom < fraction) ? 1 : 0;
    return MaterialMap(g, lat, {p1, p2}, std::move(vox));
}

} // namespace cellhom
