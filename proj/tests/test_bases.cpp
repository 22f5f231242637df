#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "qdyn/bases.hpp"
#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"
#include "test_util.hpp"

using namespace qdyn;
using namespace qdyn::bases;
using qdyn::testing::ket;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

bool same_ray(const CVector &a, const CVector &b, double tol = 1e-12) {
    return std::abs(std::abs(a.dot(b)) - 1.0) < tol;
}

std::map<std::string, double> as_map(const std::vector<PauliTerm> &terms) {
    std::map<std::string, double> m;
    for (const auto &t : terms) {
        m[t.pauli] = t.coeff;
    }
    return m;
}

}  // namespace

TEST(Bases, QubitFourierIsPlusMinus) {
    const auto u = fourier_basis(computational_basis(2));
    ASSERT_EQ(u.size(), 2);
    EXPECT_TRUE(same_ray(u.states[0], ket({kS, kS})));
    EXPECT_TRUE(same_ray(u.states[1], ket({kS, -kS})));
    EXPECT_LT(unbiasedness_deviation(u, computational_basis(2)), 1e-14);
}

TEST(Bases, FusionComplementIsPhiPlusMinus) {
    const auto f = aoqpt_families(channels::builtin_fusion());
    ASSERT_EQ(f.u.size(), 2);
    EXPECT_TRUE(same_ray(f.u.states[0], ket({kS, 0.0, 0.0, kS})));
    EXPECT_TRUE(same_ray(f.u.states[1], ket({kS, 0.0, 0.0, -kS})));
    // S acts as identity on the subspace
    for (int m = 0; m < 2; ++m) {
        EXPECT_TRUE(same_ray(f.v.states[m], f.u.states[m]));
    }
}

TEST(Bases, CnotComplementIsProductXBasis) {
    const auto f = aoqpt_families(channels::builtin_cnot());
    ASSERT_EQ(f.u.size(), 4);
    const CVector p = ket({kS, kS});
    const CVector m = ket({kS, -kS});
    EXPECT_TRUE(same_ray(f.u.states[0], linalg::kron(p, p)));
    EXPECT_TRUE(same_ray(f.u.states[1], linalg::kron(p, m)));
    EXPECT_TRUE(same_ray(f.u.states[2], linalg::kron(m, p)));
    EXPECT_TRUE(same_ray(f.u.states[3], linalg::kron(m, m)));
    for (const auto *fam : {&f.x, &f.y, &f.u, &f.v}) {
        EXPECT_LT(gram_deviation(*fam), 1e-14);
        for (const auto &s : fam->states) {
            // first nonzero amplitude real positive
            for (Eigen::Index i = 0; i < s.size(); ++i) {
                if (std::abs(s(i)) > 1e-12) {
                    EXPECT_NEAR(s(i).imag(), 0.0, 1e-14);
                    EXPECT_GT(s(i).real(), 0.0);
                    break;
                }
            }
        }
    }
    EXPECT_LT(unbiasedness_deviation(f.x, f.u), 1e-14);
    EXPECT_LT(unbiasedness_deviation(f.y, f.v), 1e-14);
}

TEST(Bases, MixedRadixUnbiasedForRandomBases) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix u = channels::random_unitary(4, rng);
        BasisFamily b{Label::X, 4, {}};
        for (int i = 0; i < 4; ++i) {
            b.states.push_back(u.col(i));
        }
        for (const std::vector<int> &f : {std::vector<int>{4}, std::vector<int>{2, 2}}) {
            const auto c = complementary_basis(b, f);
            EXPECT_LT(gram_deviation(c), 1e-12);
            EXPECT_LT(unbiasedness_deviation(b, c), 1e-12);
        }
    }
    const auto b = computational_basis(4);
    EXPECT_THROW(complementary_basis(b, std::vector<int>{3}), DimensionError);
}

TEST(Bases, PauliDecompositionExamples) {
    const CVector phi = ket({kS, 0.0, 0.0, kS});
    const auto bell = as_map(pauli_decompose(linalg::projector(phi)));
    const std::map<std::string, double> expected{{"II", 0.25}, {"XX", 0.25}, {"YY", -0.25}, {"ZZ", 0.25}};
    ASSERT_EQ(bell.size(), expected.size());
    for (const auto &[k, v] : expected) {
        EXPECT_NEAR(bell.at(k), v, 1e-14) << k;
    }
    const auto zero = as_map(pauli_decompose(linalg::projector(ket({1.0, 0.0}))));
    ASSERT_EQ(zero.size(), 2u);
    EXPECT_NEAR(zero.at("I"), 0.5, 1e-15);
    EXPECT_NEAR(zero.at("Z"), 0.5, 1e-15);
    const auto mixed = pauli_decompose(CMatrix::Identity(4, 4) / 4.0);
    ASSERT_EQ(mixed.size(), 1u);
    EXPECT_EQ(mixed[0].pauli, "II");
    EXPECT_NEAR(mixed[0].coeff, 0.25, 1e-15);
    CMatrix nh = CMatrix::Zero(2, 2);
    nh(0, 1) = 1.0;
    EXPECT_THROW(pauli_decompose(nh), NotHermitianError);
}

TEST(Bases, PauliDecompositionParsevalAndReconstruct) {
    std::mt19937_64 rng(9);
    for (int n : {1, 2, 3}) {
        const int d = 1 << n;
        for (int trial = 0; trial < 5; ++trial) {
            const CMatrix h = qdyn::testing::random_hermitian(d, rng);
            const auto terms = pauli_decompose(h);
            double sum = 0.0;
            for (const auto &t : terms) {
                sum += t.coeff * t.coeff;
            }
            // Tr(H^2) = d sum c_P^2
            EXPECT_NEAR((h * h).trace().real(), d * sum, 1e-10);
            EXPECT_LT((pauli_reconstruct(terms, n) - h).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Bases, SettingsCounts) {
    const auto cnot = channels::builtin_cnot();
    const auto fusion = channels::builtin_fusion();
    EXPECT_EQ(plan_settings(cnot, Scheme::Sqpt).total(), 81);
    EXPECT_EQ(plan_settings(cnot, Scheme::Aoqpt).total(), 2);
    EXPECT_EQ(plan_settings(fusion, Scheme::Aoqpt).total(), 10);
    EXPECT_EQ(plan_settings(fusion, Scheme::Sqpt).total(), 81);
    for (int n = 1; n <= 3; ++n) {
        const int expected = static_cast<int>(std::pow(3, 2 * n));
        EXPECT_EQ(plan_settings(channels::builtin_identity(n), Scheme::Sqpt).total(), expected);
    }
    EXPECT_EQ(plan_settings(channels::builtin_identity(1), Scheme::Aoqpt).total(), 2);
}

TEST(Bases, AoqptSettingsCoverEveryProjector) {
    for (const auto &t : {channels::builtin_cnot(), channels::builtin_fusion()}) {
        const auto f = aoqpt_families(t);
        const auto plan = plan_settings(t, Scheme::Aoqpt);
        std::set<std::string> preps;
        std::set<std::string> meas;
        for (const auto &s : plan.settings) {
            preps.insert(s.prep);
            meas.insert(s.meas);
        }
        auto covered = [](const BasisFamily &fam, const std::set<std::string> &settings) {
            for (const auto &st : fam.states) {
                for (const auto &term : pauli_decompose(linalg::projector(st))) {
                    bool ok = false;
                    for (const auto &s : settings) {
                        ok = ok || pauli::covered_by(term.pauli, s);
                    }
                    if (!ok) {
                        return false;
                    }
                }
            }
            return true;
        };
        EXPECT_TRUE(covered(f.x, preps)) << t.name;
        EXPECT_TRUE(covered(f.u, preps)) << t.name;
        EXPECT_TRUE(covered(f.y, meas)) << t.name;
        EXPECT_TRUE(covered(f.v, meas)) << t.name;
    }
}
