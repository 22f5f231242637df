#pragma once

#include <random>

#include "qdyn/types.hpp"

namespace qdyn::testing {

inline CMatrix random_complex(int rows, int cols, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = cplx(g(rng), g(rng));
        }
    }
    return m;
}

inline CMatrix random_hermitian(int n, std::mt19937_64 &rng) {
    const CMatrix g = random_complex(n, n, rng);
    return (g + g.adjoint()) * 0.5;
}

inline CMatrix random_density(int n, std::mt19937_64 &rng) {
    const CMatrix g = random_complex(n, n, rng);
    CMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline CVector ket(std::initializer_list<cplx> amps) {
    CVector v(static_cast<Eigen::Index>(amps.size()));
    int i = 0;
    for (auto a : amps) {
        v(i++) = a;
    }
    return v;
}

}  // namespace qdyn::testing
