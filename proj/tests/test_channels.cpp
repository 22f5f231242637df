#include <gtest/gtest.h>

#include <cmath>

#include "qdyn/channels.hpp"
#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"
#include "test_util.hpp"

using namespace qdyn;
using namespace qdyn::channels;
using qdyn::testing::ket;
using qdyn::testing::random_density;

namespace {

// chi_mn = sum_k Tr(E_m^+ A_k) Tr(E_n^+ A_k)^*
CMatrix chi_oracle(const KrausSet &k, const OperatorBasis &basis) {
    const int n = basis.size();
    CMatrix chi = CMatrix::Zero(n, n);
    for (const auto &a : k.operators) {
        CVector c(n);
        for (int m = 0; m < n; ++m) {
            c(m) = (basis.element(m).adjoint() * a).trace();
        }
        chi += c * c.adjoint();
    }
    return chi;
}

double max_abs(const CMatrix &m) {
    return m.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Pauli, StringMatrices) {
    EXPECT_LT(max_abs(pauli::string_matrix("ZZ") - linalg::kron(pauli::matrix('Z'), pauli::matrix('Z'))), 1e-15);
    EXPECT_EQ(pauli::all_strings(2).size(), 16u);
    EXPECT_EQ(pauli::all_strings(2).front(), "II");
    EXPECT_EQ(pauli::measurement_strings(2).size(), 9u);
    EXPECT_THROW(pauli::string_matrix("XQ"), ParameterError);
}

TEST(Pauli, EigenstatesMatchSigns) {
    for (const auto &s : pauli::measurement_strings(2)) {
        const CMatrix p = pauli::string_matrix(s);
        for (int a = 0; a < 4; ++a) {
            const CVector v = pauli::eigenstate(s, a);
            EXPECT_NEAR(v.norm(), 1.0, 1e-14);
            EXPECT_LT((p * v - double(pauli::outcome_sign(s, a)) * v).norm(), 1e-14) << s << " " << a;
        }
    }
    EXPECT_TRUE(pauli::covered_by("IX", "ZX"));
    EXPECT_FALSE(pauli::covered_by("YX", "ZX"));
}

TEST(Channels, IdentityChiSingleEntry) {
    const auto p = kraus_to_chi(identity_channel(2), OperatorBasis::computational(2));
    // identity = |0><0| + |1><1| = E_0 + E_3
    CMatrix expected = CMatrix::Zero(4, 4);
    expected(0, 0) = expected(0, 3) = expected(3, 0) = expected(3, 3) = 1.0;
    EXPECT_LT(max_abs(p.chi - expected), 1e-14);
    const auto pp = kraus_to_chi(identity_channel(2), OperatorBasis::pauli(1));
    CMatrix single = CMatrix::Zero(4, 4);
    single(0, 0) = 2.0;
    EXPECT_LT(max_abs(pp.chi - single), 1e-14);
}

TEST(Channels, CnotChiRankOneTraceFour) {
    const auto t = builtin_cnot();
    const auto p = kraus_to_chi(make_kraus({t.kraus}), OperatorBasis::computational(4));
    EXPECT_NEAR(p.chi.trace().real(), 4.0, 1e-12);
    const auto ev = linalg::eig_hermitian(p.chi).values;
    EXPECT_NEAR(ev(15), 4.0, 1e-12);
    EXPECT_NEAR(ev(14), 0.0, 1e-12);
}

TEST(Channels, FullyDepolarizingPauliChi) {
    const auto k = noise_channel({NoiseTerm::Kind::Depolarizing, 1.0}, 1);
    const auto p = kraus_to_chi(k, OperatorBasis::pauli(1));
    EXPECT_LT(max_abs(p.chi - CMatrix::Identity(4, 4) / 2.0), 1e-14);
    std::mt19937_64 rng(3);
    const CMatrix rho = random_density(2, rng);
    EXPECT_LT(max_abs(apply_kraus(k, rho) - CMatrix::Identity(2, 2) / 2.0), 1e-14);
}

TEST(Channels, KrausToChiMatchesOracle) {
    std::mt19937_64 rng(11);
    for (int d : {2, 4}) {
        const int n = d == 2 ? 1 : 2;
        for (int trial = 0; trial < 10; ++trial) {
            const auto k = random_kraus_channel(d, 3, rng);
            EXPECT_TRUE(k.is_trace_preserving());
            for (const auto &basis : {OperatorBasis::computational(d), OperatorBasis::pauli(n)}) {
                EXPECT_LT(max_abs(kraus_to_chi(k, basis).chi - chi_oracle(k, basis)), 1e-12);
            }
        }
    }
}

TEST(Channels, ApplyProcessAgreesWithKraus) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = trial % 2 ? 4 : 2;
        const auto k = random_kraus_channel(d, 1 + trial % 4, rng);
        const CMatrix rho = random_density(d, rng);
        const CMatrix expected = apply_kraus(k, rho);
        const auto comp = kraus_to_chi(k, OperatorBasis::computational(d));
        const auto pa = kraus_to_chi(k, OperatorBasis::pauli(d == 2 ? 1 : 2));
        EXPECT_LT(max_abs(apply_process(comp, rho) - expected), 1e-10);
        EXPECT_LT(max_abs(apply_process(pa, rho) - expected), 1e-10);
        EXPECT_LT(max_abs(choi_apply(comp.chi / double(d), rho) - expected), 1e-10);
        EXPECT_LT(max_abs(choi_apply(choi_state(pa), rho) - expected), 1e-10);
    }
}

TEST(Channels, ChoiApplyOnUnnormalizedChoi) {
    // choi_apply(chi_comp / d, rho) reproduces E(rho)
    std::mt19937_64 rng(8);
    const auto k = random_kraus_channel(2, 2, rng);
    const auto comp = kraus_to_chi(k, OperatorBasis::computational(2));
    const CMatrix rho = random_density(2, rng);
    EXPECT_LT(max_abs(choi_apply(comp.chi / 2.0, rho) - apply_kraus(k, rho)), 1e-12);
    EXPECT_LT(max_abs(choi_state(comp) - comp.chi / 2.0), 1e-14);
}

TEST(Channels, BasisChangePreservesSpectrum) {
    std::mt19937_64 rng(21);
    const auto t = builtin_cnot();
    for (int trial = 0; trial < 10; ++trial) {
        const auto k = random_kraus_channel(4, 2, rng);
        const auto p = kraus_to_chi(k, OperatorBasis::pauli(2));
        const auto a = change_basis(p, adapted_basis(t));
        const auto c = to_computational(a);
        const RVector e0 = linalg::eig_hermitian(p.chi).values;
        EXPECT_LT((linalg::eig_hermitian(a.chi).values - e0).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((linalg::eig_hermitian(c.chi).values - e0).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT(max_abs(c.chi - kraus_to_chi(k, OperatorBasis::computational(4)).chi), 1e-10);
    }
}

TEST(Channels, CnotMapsPlusZeroToBell) {
    const auto t = builtin_cnot();
    const auto p = ideal_process(t);
    const CVector plus0 = ket({1.0, 0.0, 1.0, 0.0}) / std::sqrt(2.0);
    const CVector phi = ket({1.0, 0.0, 0.0, 1.0}) / std::sqrt(2.0);
    EXPECT_LT(max_abs(apply_process(p, linalg::projector(plus0)) - linalg::projector(phi)), 1e-12);
}

TEST(Channels, FusionHalvesProductInput) {
    const auto t = builtin_fusion();
    const auto p = ideal_process(t);
    EXPECT_EQ(p.tp_mode, TpMode::TraceNonIncreasing);
    const CVector pp = ket({0.5, 0.5, 0.5, 0.5});
    const CMatrix out = apply_process(p, linalg::projector(pp));
    EXPECT_NEAR(out.trace().real(), 0.5, 1e-12);
    const CVector phi = ket({1.0, 0.0, 0.0, 1.0}) / std::sqrt(2.0);
    EXPECT_LT(max_abs(out - 0.5 * linalg::projector(phi)), 1e-12);
    EXPECT_LT(trace_condition_violation(p), 1e-12);
}

TEST(Channels, IncoherentCnotIsPermutationWithFidelityQuarter) {
    const auto t = builtin_cnot();
    const auto ideal = change_basis(ideal_process(t), adapted_basis(t));
    const auto inc = incoherent_part(ideal);
    // diagonal chi: only the 4 mapped dyads |m_y><m_x|
    const CMatrix chi = inc.chi;
    EXPECT_LT(max_abs(chi - CMatrix(chi.diagonal().asDiagonal())), 1e-14);
    for (int m = 0; m < 4; ++m) {
        EXPECT_NEAR(chi(m * 4 + m, m * 4 + m).real(), 1.0, 1e-12);
    }
    // classical permutation on computational inputs
    for (int a = 0; a < 4; ++a) {
        CVector e = CVector::Zero(4);
        e(a) = 1.0;
        EXPECT_LT(max_abs(apply_process(inc, linalg::projector(e)) - linalg::projector(t.kraus * e)), 1e-12);
    }
    const CMatrix ji = ideal.chi / ideal.chi.trace();
    const CMatrix jn = chi / chi.trace();
    EXPECT_NEAR((ji * jn).trace().real(), 0.25, 1e-12);
    EXPECT_THROW(incoherent_part(kraus_to_chi(identity_channel(2), OperatorBasis::pauli(1))), ParameterError);
}

TEST(Channels, NoiseLimits) {
    const auto t = builtin_cnot();
    const auto clean = kraus_to_chi(make_noisy(t, NoiseSpec::parse("depolarizing:0")), OperatorBasis::computational(4));
    EXPECT_LT(max_abs(clean.chi - ideal_process(t).chi), 1e-12);
    const auto full = make_noisy(t, NoiseSpec::parse("depolarizing:1"));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5; ++i) {
        EXPECT_LT(max_abs(apply_kraus(full, random_density(4, rng)) - CMatrix::Identity(4, 4) / 4.0), 1e-12);
    }
    const auto spec = NoiseSpec::parse("depolarizing:0.1+dephasing:0.05");
    EXPECT_EQ(spec.terms.size(), 2u);
    EXPECT_EQ(NoiseSpec::parse(spec.to_string()).to_string(), spec.to_string());
    EXPECT_TRUE(NoiseSpec::parse("none").terms.empty());
    EXPECT_THROW(NoiseSpec::parse("depolarizing:1.5"), ParameterError);
    EXPECT_THROW(NoiseSpec::parse("bogus:0.1"), ParameterError);
}

TEST(Channels, AmplitudeDampingIsTracePreserving) {
    for (double g : {0.0, 0.3, 1.0}) {
        const auto k = noise_channel({NoiseTerm::Kind::AmplitudeDamping, g}, 2);
        EXPECT_TRUE(k.is_trace_preserving());
        CMatrix ones = CMatrix::Zero(4, 4);
        ones(3, 3) = 1.0;
        EXPECT_NEAR(apply_kraus(k, ones)(0, 0).real(), g * g, 1e-14);
    }
}

TEST(Channels, FidelityToIdealDecreasesLinearlyWithDepolarizing) {
    const auto t = builtin_cnot();
    const CMatrix ji = ideal_process(t).chi / 4.0;
    for (double p : {0.0, 0.1, 0.2, 0.5, 1.0}) {
        const auto chi = kraus_to_chi(make_noisy(t, NoiseSpec{{{NoiseTerm::Kind::Depolarizing, p}}}),
                                      OperatorBasis::computational(4))
                             .chi;
        // closed form: 1 - p + p / d^2
        EXPECT_NEAR((ji * chi / 4.0).trace().real(), 1.0 - p + p / 16.0, 1e-12);
    }
}

TEST(Channels, TargetValidation) {
    const CMatrix s = CMatrix::Identity(2, 2) * 2.0;
    EXPECT_THROW(make_target("bad", s, {ket({1.0, 0.0}), ket({0.0, 1.0})}, {2}), ParameterError);
    EXPECT_THROW(target_by_name("toffoli"), ParameterError);
    EXPECT_EQ(builtin_fusion().k, 2);
    EXPECT_EQ(builtin_cnot().default_tp_mode(), TpMode::TracePreserving);
}
