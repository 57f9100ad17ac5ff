#include "cellhom/element.hpp"

#include <cmath>

namespace cellhom::detail {

namespace {

ElementTables build() {
    ElementTables t{};
    const double g = 0.5 / std::sqrt(3.0);
    const double coord[2] = {0.5 - g, 0.5 + g};
    for (int q = 0; q < 8; ++q) {
        const int qb[3] = {q & 1, (q >> 1) & 1, (q >> 2) & 1};
        for (int d = 0; d < 3; ++d) t.xi[q][d] = coord[qb[d]];
        for (int c = 0; c < 8; ++c) {
            const int cb[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
            double f[3], df[3];
            for (int d = 0; d < 3; ++d) {
                const double x = t.xi[q][d];
                f[d] = cb[d] ? x : 1.0 - x;
                df[d] = cb[d] ? 1.0 : -1.0;
            }
            t.N[q][c] = f[0] * f[1] * f[2];
            t.dN[q][c][0] = df[0] * f[1] * f[2];
            t.dN[q][c][1] = f[0] * df[1] * f[2];
            t.dN[q][c][2] = f[0] * f[1] * df[2];
        }
    }
    return t;
}

} // namespace

const ElementTables& element_tables() {
    static const ElementTables t = build();
    return t;
}

} // namespace cellhom::detail
