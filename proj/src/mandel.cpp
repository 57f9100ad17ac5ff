#include "cellhom/mandel.hpp"

namespace cellhom {

namespace {
constexpr int kPair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
constexpr int kIndex[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};
inline double weight(int I) { return I < 3 ? 1.0 : kSqrt2; }
} // namespace

Tensor4 mandel_to_tensor4(const MandelMat66& C) {
    Tensor4 T{};
    for (int I = 0; I < 6; ++I) {
        for (int J = 0; J < 6; ++J) {
            const double c = C(I, J) / (weight(I) * weight(J));
            const int i = kPair[I][0], j = kPair[I][1];
            const int k = kPair[J][0], l = kPair[J][1];
            T[i][j][k][l] = c;
            T[j][i][k][l] = c;
            T[i][j][l][k] = c;
            T[j][i][l][k] = c;
        }
    }
    return T;
}

MandelMat66 tensor4_to_mandel(const Tensor4& T) {
    MandelMat66 C;
    for (int I = 0; I < 6; ++I)
        for (int J = 0; J < 6; ++J)
            C(I, J) = weight(I) * weight(J) *
                      T[kPair[I][0]][kPair[I][1]][kPair[J][0]][kPair[J][1]];
    return C;
}

int mandel_pair_index(int i, int j) { return kIndex[i][j]; }

} // namespace cellhom
