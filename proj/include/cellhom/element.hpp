#pragma once

#include "cellhom/mandel.hpp"

namespace cellhom::detail {

// Trilinear hexahedron on the unit reference cell [0,1]^3 with the 2x2x2
// Gauss rule. Corners c = dx + 2*dy + 4*dz, Gauss points q = qx + 2*qy + 4*qz.
// The rule integrates the reference cell exactly up to degree 3 per variable,
// which covers every bilinear-form integrand assembled here.
struct ElementTables {
    double xi[8][3];      // Gauss point coordinates
    double N[8][8];       // N[q][c]: shape value of corner c at point q
    double dN[8][8][3];   // dN[q][c][d]: d N_c / d xi_d at point q
};

const ElementTables& element_tables();

} // namespace cellhom::detail
