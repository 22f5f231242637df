#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "qdyn/linalg.hpp"
#include "test_util.hpp"

using namespace qdyn;
using namespace qdyn::linalg;
using qdyn::testing::random_complex;
using qdyn::testing::random_hermitian;

namespace {

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

CMatrix phi_plus() {
    CVector v = CVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v * v.adjoint();
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier, then roots by
// Durand-Kerner iteration. Independent of any eigensolver.
std::vector<double> charpoly_roots(const CMatrix &h) {
    const int n = static_cast<int>(h.rows());
    std::vector<cplx> c(n + 1);
    c[n] = 1.0;
    CMatrix m = CMatrix::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        m = h * m + c[n - k + 1] * CMatrix::Identity(n, n);
        c[n - k] = -(h * m).trace() / static_cast<double>(k);
    }
    auto poly = [&](cplx z) {
        cplx acc = 0.0;
        for (int i = n; i >= 0; --i) {
            acc = acc * z + c[i];
        }
        return acc;
    };
    std::vector<cplx> z(n);
    for (int i = 0; i < n; ++i) {
        z[i] = std::pow(cplx(0.4, 0.9), i);
    }
    for (int iter = 0; iter < 2000; ++iter) {
        for (int i = 0; i < n; ++i) {
            cplx denom = 1.0;
            for (int j = 0; j < n; ++j) {
                if (j != i) {
                    denom *= (z[i] - z[j]);
                }
            }
            z[i] -= poly(z[i]) / denom;
        }
    }
    std::vector<double> roots;
    for (auto r : z) {
        roots.push_back(r.real());
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

TEST(linalg, kron_identity) {
    const CMatrix i2 = CMatrix::Identity(2, 2);
    EXPECT_TRUE(kron(i2, i2).isApprox(CMatrix::Identity(4, 4)));
}

TEST(linalg, kron_zz_diagonal) {
    const CMatrix zz = kron(pauli_z(), pauli_z());
    EXPECT_EQ(zz(0, 0), cplx(1));
    EXPECT_EQ(zz(1, 1), cplx(-1));
    EXPECT_EQ(zz(2, 2), cplx(-1));
    EXPECT_EQ(zz(3, 3), cplx(1));
    EXPECT_DOUBLE_EQ((zz - zz.diagonal().asDiagonal().toDenseMatrix()).norm(), 0.0);
}

TEST(linalg, kron_xx_flips_both_bits) {
    CVector k00 = CVector::Zero(4);
    k00(0) = 1.0;
    const CVector out = kron(pauli_x(), pauli_x()) * k00;
    EXPECT_EQ(out(3), cplx(1));
    EXPECT_DOUBLE_EQ(out.head(3).norm(), 0.0);
}

TEST(linalg, kron_is_associative) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const CMatrix a = random_complex(2, 3, rng);
        const CMatrix b = random_complex(3, 2, rng);
        const CMatrix c = random_complex(2, 2, rng);
        const CMatrix lhs = kron(kron(a, b), c);
        const CMatrix rhs = kron(a, kron(b, c));
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(linalg, partial_trace_of_product) {
    std::mt19937_64 rng(3);
    const CMatrix rho = random_hermitian(2, rng);
    const CMatrix sigma = random_hermitian(3, rng);
    const CMatrix m = kron(rho, sigma);
    const CMatrix first = partial_trace(m, {2, 3}, Subsystem::First);
    const CMatrix second = partial_trace(m, {2, 3}, Subsystem::Second);
    EXPECT_LE((first - rho.trace() * sigma).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((second - sigma.trace() * rho).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(linalg, partial_trace_maximally_entangled) {
    const CMatrix red = partial_trace(phi_plus(), {2, 2}, Subsystem::First);
    EXPECT_LE((red - 0.5 * CMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(linalg, partial_trace_preserves_trace) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const CMatrix m = random_complex(6, 6, rng);
        EXPECT_NEAR(std::abs(partial_trace(m, {3, 2}, Subsystem::First).trace() - m.trace()), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(partial_trace(m, {3, 2}, Subsystem::Second).trace() - m.trace()), 0.0, 1e-12);
    }
}

TEST(linalg, partial_trace_rejects_bad_dims) {
    EXPECT_THROW(partial_trace(CMatrix::Identity(5, 5), {2, 2}, Subsystem::First), DimensionError);
    EXPECT_THROW(partial_transpose(CMatrix::Identity(4, 3), {2, 2}, Subsystem::First), DimensionError);
}

TEST(linalg, partial_transpose_of_product) {
    std::mt19937_64 rng(7);
    const CMatrix rho = random_complex(2, 2, rng);
    const CMatrix sigma = random_complex(2, 2, rng);
    const CMatrix pt = partial_transpose(kron(rho, sigma), {2, 2}, Subsystem::Second);
    EXPECT_LE((pt - kron(rho, sigma.transpose())).cwiseAbs().maxCoeff(), 1e-14);
    const CMatrix pt1 = partial_transpose(kron(rho, sigma), {2, 2}, Subsystem::First);
    EXPECT_LE((pt1 - kron(rho.transpose(), sigma)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(linalg, partial_transpose_of_bell_state_is_half_swap) {
    CMatrix swap = CMatrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = 1.0;
    swap(1, 2) = swap(2, 1) = 1.0;
    const CMatrix pt = partial_transpose(phi_plus(), {2, 2}, Subsystem::Second);
    EXPECT_LE((pt - 0.5 * swap).norm(), 1e-15);
    EXPECT_NEAR(min_eigenvalue(pt), -0.5, 1e-12);
}

TEST(linalg, partial_transpose_is_involution) {
    std::mt19937_64 rng(9);
    const CMatrix m = random_complex(6, 6, rng);
    for (auto which : {Subsystem::First, Subsystem::Second}) {
        const CMatrix back = partial_transpose(partial_transpose(m, {2, 3}, which), {2, 3}, which);
        EXPECT_LE((back - m).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(linalg, eig_identity_and_z) {
    const auto id = eig_hermitian(CMatrix::Identity(4, 4));
    EXPECT_LE((id.values - RVector::Ones(4)).norm(), 1e-14);
    const auto z = eig_hermitian(pauli_z());
    EXPECT_NEAR(z.values(0), -1.0, 1e-14);
    EXPECT_NEAR(z.values(1), 1.0, 1e-14);
}

TEST(linalg, eig_matches_characteristic_polynomial_roots) {
    std::mt19937_64 rng(17);
    for (int n = 2; n <= 4; ++n) {
        for (int t = 0; t < 10; ++t) {
            const CMatrix h = random_hermitian(n, rng);
            const auto roots = charpoly_roots(h);
            const auto e = eig_hermitian(h);
            for (int i = 0; i < n; ++i) {
                EXPECT_NEAR(e.values(i), roots[i], 1e-8);
            }
        }
    }
}

TEST(linalg, eig_reconstruction_and_trace) {
    std::mt19937_64 rng(19);
    for (int n : {2, 4, 16, 64}) {
        const CMatrix h = random_hermitian(n, rng);
        const auto e = eig_hermitian(h);
        const CMatrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LE((rec - h).norm(), 1e-9 * std::max(1.0, h.norm()));
        EXPECT_NEAR(e.values.sum(), h.trace().real(), 1e-9 * std::max(1.0, std::abs(h.trace())));
        for (int i = 1; i < n; ++i) {
            EXPECT_LE(e.values(i - 1), e.values(i));
        }
    }
}

TEST(linalg, eig_rejects_non_hermitian) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(eig_hermitian(m), NotHermitianError);
}

TEST(linalg, project_psd_fixed_point_and_clip) {
    std::mt19937_64 rng(23);
    const CMatrix g = random_complex(4, 4, rng);
    const CMatrix psd = g * g.adjoint();
    EXPECT_LE((project_psd(psd) - psd).norm(), 1e-12);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    CMatrix expect = CMatrix::Zero(2, 2);
    expect(0, 0) = 1.0;
    EXPECT_LE((project_psd(d) - expect).norm(), 1e-15);
}

TEST(linalg, project_psd_idempotent_nonexpansive) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 30; ++t) {
        const CMatrix a = random_hermitian(5, rng);
        const CMatrix b = random_hermitian(5, rng);
        const CMatrix pa = project_psd(a);
        const CMatrix pb = project_psd(b);
        EXPECT_GE(min_eigenvalue(pa), -1e-10);
        EXPECT_LE((project_psd(pa) - pa).norm(), 1e-10);
        EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
    }
}
