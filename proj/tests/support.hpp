#pragma once

// Shared helpers for the unit tests: closed-form field construction on the
// quadrature / nodal layouts, and the Gauss sample coordinates. The sample
// layout (8 points per element, bit order qx + 2 qy + 4 qz, offsets
// 0.5 -+ 1/(2 sqrt 3)) is re-derived here from the documented convention so
// the tests do not read it out of the library tables.

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "cellhom/fields.hpp"
#include "cellhom/geometry.hpp"

namespace testsup {

inline constexpr double kPi = 3.14159265358979323846;

inline std::array<double, 2> gauss_offsets() {
    const double g = 0.5 / std::sqrt(3.0);
    return {0.5 - g, 0.5 + g};
}

// lattice coordinates of quadrature sample id (8 * element + q)
inline cellhom::Vec3 sample_point(const cellhom::Grid& g, std::size_t sample) {
    const auto off = gauss_offsets();
    const int q = static_cast<int>(sample % 8);
    const auto el = g.node_coords(sample / 8);
    const int n[3] = {g.n1, g.n2, g.n3};
    cellhom::Vec3 yhat;
    for (int d = 0; d < 3; ++d)
        yhat[d] = (el[d] + off[(q >> d) & 1]) / n[d];
    return yhat;
}

// f(yhat) -> Mandel 6-vector, evaluated at every quadrature sample
template <class F>
cellhom::SymField make_sym(const cellhom::Grid& g, const cellhom::Lattice& lat, F&& f) {
    cellhom::SymField e(g, lat);
    for (std::size_t s = 0; s < e.samples(); ++s)
        e.set(s, f(sample_point(g, s)));
    return e;
}

// f(yhat) -> Vec3, evaluated at every node
template <class F>
cellhom::VecField make_nodal(const cellhom::Grid& g, F&& f) {
    cellhom::VecField u(g);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
        const auto c = g.node_coords(n);
        const cellhom::Vec3 y = g.node_point(c[0], c[1], c[2]);
        const cellhom::Vec3 v = f(y);
        for (int d = 0; d < 3; ++d) u.at(n)[d] = v[d];
    }
    return u;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace testsup
