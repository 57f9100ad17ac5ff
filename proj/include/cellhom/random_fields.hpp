#pragma once

#include <cstdint>
#include <random>

#include "cellhom/fields.hpp"
#include "cellhom/material.hpp"

// Seeded random inputs shared by the verification suites and the tests.
// Draws come from the raw mt19937_64 stream (not std distributions), so a
// given seed produces the same values on every standard library.
namespace cellhom {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53; // [0,1)
        return lo + (hi - lo) * u;
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// zero-mean periodic nodal field with entries in [-amp, amp]
VecField random_periodic(const Grid& g, std::uint64_t seed, double amp = 1.0);

// quadrature symmetric field with Mandel entries in [-amp, amp]
SymField random_sym_field(const Grid& g, const Lattice& lat, std::uint64_t seed, double amp = 1.0);

MandelVec6 random_mandel(Rng& rng, double amp = 1.0);

// SPD Mandel matrix: A^T A shifted to a minimum eigenvalue of `floor`
MandelMat66 random_spd(Rng& rng, double floor = 0.5);

} // namespace cellhom
