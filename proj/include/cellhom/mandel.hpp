#pragma once

#include <array>

#include <Eigen/Dense>

namespace cellhom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Symmetric 3x3 tensors and 4th-order tensors with minor symmetries live in
// the Mandel representation: component order
//   (t11, t22, t33, sqrt(2) t23, sqrt(2) t13, sqrt(2) t12)
// so that the Euclidean dot of two 6-vectors equals the full tensor
// contraction t : s, and a 4th-order tensor acts as a plain 6x6 matrix.
using MandelVec6 = Eigen::Matrix<double, 6, 1>;
using MandelMat66 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;
inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

inline MandelVec6 to_mandel(const Mat3& t) {
    MandelVec6 m;
    m << t(0, 0), t(1, 1), t(2, 2),
         kSqrt2 * 0.5 * (t(1, 2) + t(2, 1)),
         kSqrt2 * 0.5 * (t(0, 2) + t(2, 0)),
         kSqrt2 * 0.5 * (t(0, 1) + t(1, 0));
    return m;
}

inline Mat3 from_mandel(const MandelVec6& m) {
    Mat3 t;
    t << m[0], kInvSqrt2 * m[5], kInvSqrt2 * m[4],
         kInvSqrt2 * m[5], m[1], kInvSqrt2 * m[3],
         kInvSqrt2 * m[4], kInvSqrt2 * m[3], m[2];
    return t;
}

// sym(a (x) b) as a Mandel vector
inline MandelVec6 mandel_sym_outer(const Vec3& a, const Vec3& b) {
    MandelVec6 m;
    m << a[0] * b[0], a[1] * b[1], a[2] * b[2],
         kInvSqrt2 * (a[1] * b[2] + a[2] * b[1]),
         kInvSqrt2 * (a[0] * b[2] + a[2] * b[0]),
         kInvSqrt2 * (a[0] * b[1] + a[1] * b[0]);
    return m;
}

// 4th-order tensor with minor symmetries as a 3x3x3x3 array; used where an
// index expression is clearer than Mandel algebra (laminate formula, acoustic
// tensors). C_full[i][j][k][l] = C_ijkl.
using Tensor4 = std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3>;

Tensor4 mandel_to_tensor4(const MandelMat66& C);
MandelMat66 tensor4_to_mandel(const Tensor4& C);

// Mandel slot of the (i,j) tensor component, e.g. (1,2) -> 3
int mandel_pair_index(int i, int j);

} // namespace cellhom
