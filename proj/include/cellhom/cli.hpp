#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cellhom/material.hpp"

namespace cellhom {

// Material source of a run: one of the built-in generators or a voxel file
// plus phase table. Generators draw their randomness from the run seed.
struct MaterialSpec {
    enum class Kind { homogeneous, laminate, random, file };

    Kind kind = Kind::homogeneous;
    Phase phase1 = Phase::isotropic(1.0, 1.0);
    Phase phase2 = Phase::isotropic(10.0, 10.0);
    int axis = 0;          // laminate: layer normal direction
    double theta = 0.5;    // laminate: volume fraction of phase1
    double fraction = 0.5; // random: Bernoulli probability of phase2
    std::filesystem::path geometry;
    std::filesystem::path phase_table;
};

// Everything a command needs; a run is reproducible from this plus nothing.
struct RunConfig {
    Grid grid{16, 16, 16};
    Lattice lattice = Lattice::unit_cube();
    MaterialSpec material;
    double tol = 1e-8;
    int max_iter = 0; // 0: solver default
    std::uint64_t seed = 1;
    std::filesystem::path out;      // report path; empty: per-command default
    std::filesystem::path field_in; // binary field input for donati / divcurl
    std::string suite = "all";      // verify
    int threads = 0;                // 0: hardware count
    bool deterministic = true;      // thread-count independent reductions
    bool vtk = false;               // also write VTK artifacts where sensible
};

// config file is a JSON document mirroring the fields above; unknown keys
// are rejected so typos fail loudly
RunConfig load_config(const std::filesystem::path& path);

MaterialMap build_material(const RunConfig& cfg);

// Subcommands. Each writes its report/artifacts and returns the process
// exit code: 0 ok, 2 bad config or input file, 3 solver failure, 4 a
// verification or cross-check failed (the report is still written).
int cmd_homogenize(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_donati(const RunConfig& cfg);
int cmd_korn(const RunConfig& cfg);
int cmd_divcurl(const RunConfig& cfg);

// argv-level entry point used by main() and by the CLI tests; maps thrown
// errors onto the exit-code contract and prints them to stderr
int run_cli(const std::vector<std::string>& args);

} // namespace cellhom
