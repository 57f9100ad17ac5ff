#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "cellhom/errors.hpp"
#include "cellhom/mandel.hpp"

namespace cellhom {

// Periodicity cell Y spanned by three lattice vectors (the columns of G).
// Points are y = G * yhat with yhat in [0,1)^3; yhat are the "lattice
// coordinates" used everywhere internally.
struct Lattice {
    Mat3 G = Mat3::Identity();
    Mat3 Ginv = Mat3::Identity();
    Mat3 GinvT = Mat3::Identity(); // inverse transpose: maps yhat-gradients to y-gradients
    double volume = 1.0;           // |det G|

    static Lattice unit_cube() { return {}; }
    static Lattice from_vectors(const Vec3& g1, const Vec3& g2, const Vec3& g3);

    Vec3 vector(int k) const { return G.col(k); }
    Vec3 map(const Vec3& yhat) const { return G * yhat; }

    // unit normal of the cell face spanned by the two vectors other than g_k
    Vec3 face_normal(int k) const { return GinvT.col(k).normalized(); }
};

inline Lattice Lattice::from_vectors(const Vec3& g1, const Vec3& g2, const Vec3& g3) {
    Lattice lat;
    lat.G.col(0) = g1;
    lat.G.col(1) = g2;
    lat.G.col(2) = g3;
    const double det = lat.G.determinant();
    const double scale = lat.G.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-12 * scale * scale * scale))
        throw ConfigError("lattice vectors are (near-)linearly dependent");
    lat.Ginv = lat.G.inverse();
    lat.GinvT = lat.Ginv.transpose();
    lat.volume = std::abs(det);
    return lat;
}

// Periodic voxel grid: n1*n2*n3 nodes and the same number of hexahedral
// elements. There is no duplicated boundary layer; node (n1, j, k) is node
// (0, j, k). Linear ids run with i fastest.
struct Grid {
    int n1 = 0, n2 = 0, n3 = 0;

    Grid() = default;
    Grid(int a, int b, int c) : n1(a), n2(b), n3(c) {
        if (n1 < 2 || n2 < 2 || n3 < 2)
            throw ConfigError("grid needs at least 2 cells per direction");
    }

    std::size_t node_count() const {
        return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) *
               static_cast<std::size_t>(n3);
    }
    std::size_t element_count() const { return node_count(); }
    int extent(int d) const { return d == 0 ? n1 : d == 1 ? n2 : n3; }

    static int wrap(int i, int n) {
        i %= n;
        return i < 0 ? i + n : i;
    }

    std::size_t node_id(int i, int j, int k) const {
        i = wrap(i, n1);
        j = wrap(j, n2);
        k = wrap(k, n3);
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n1) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(n2) * static_cast<std::size_t>(k));
    }

    std::array<int, 3> node_coords(std::size_t id) const {
        const int i = static_cast<int>(id % static_cast<std::size_t>(n1));
        const std::size_t r = id / static_cast<std::size_t>(n1);
        const int j = static_cast<int>(r % static_cast<std::size_t>(n2));
        const int k = static_cast<int>(r / static_cast<std::size_t>(n2));
        return {i, j, k};
    }

    // node yhat position
    Vec3 node_point(int i, int j, int k) const {
        return {static_cast<double>(i) / n1, static_cast<double>(j) / n2,
                static_cast<double>(k) / n3};
    }

    // Corners of element (i,j,k), local corner c = dx + 2*dy + 4*dz.
    std::array<std::size_t, 8> element_nodes(int i, int j, int k) const {
        std::array<std::size_t, 8> n;
        for (int c = 0; c < 8; ++c)
            n[c] = node_id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        return n;
    }

    bool operator==(const Grid&) const = default;
};

inline void require_same(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw DimensionError(std::string("grid mismatch in ") + what);
}

} // namespace cellhom
