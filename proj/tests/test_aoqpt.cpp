#include <gtest/gtest.h>

#include <cmath>

#include "qdyn/aoqpt.hpp"
#include "qdyn/linalg.hpp"
#include "test_util.hpp"

using namespace qdyn;
using namespace qdyn::aoqpt;
using channels::OperatorBasis;
using channels::ProcessMatrix;
using channels::TpMode;

namespace {

ProcessMatrix noisy(const channels::TargetOperation &t, const std::string &noise) {
    return channels::kraus_to_chi(channels::make_noisy(t, channels::NoiseSpec::parse(noise)),
                                  OperatorBasis::computational(t.dim()));
}

double max_abs(const RMatrix &m) {
    return m.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Aoqpt, IdealTargetsGiveIdentityTransitions) {
    for (const auto &t : {channels::builtin_cnot(), channels::builtin_fusion()}) {
        const auto tp = transitions_from_process(channels::ideal_process(t), t);
        EXPECT_LT(max_abs(tp.xy.t - RMatrix::Identity(t.k, t.k)), 1e-12) << t.name;
        EXPECT_LT(max_abs(tp.uv.t - RMatrix::Identity(t.k, t.k)), 1e-12) << t.name;
    }
}

TEST(Aoqpt, IncoherentCnotHasUniformComplementaryRows) {
    const auto t = channels::builtin_cnot();
    const auto inc = channels::incoherent_part(channels::change_basis(channels::ideal_process(t), channels::adapted_basis(t)));
    const auto tp = transitions_from_process(inc, t);
    EXPECT_LT(max_abs(tp.xy.t - RMatrix::Identity(4, 4)), 1e-12);
    EXPECT_LT(max_abs(tp.uv.t - RMatrix::Constant(4, 4, 0.25)), 1e-12);
}

TEST(Aoqpt, ChiIdentityOnRandomChannels) {
    std::mt19937_64 rng(31);
    const channels::TargetOperation targets[] = {channels::builtin_identity(1), channels::builtin_cnot(),
                                                 channels::builtin_fusion()};
    for (const auto &t : targets) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = channels::kraus_to_chi(channels::random_kraus_channel(t.dim(), 1 + trial % 3, rng),
                                                  OperatorBasis::pauli(t.n_qubits));
            EXPECT_LT(verify_chi_identity(p, t).max_error(), 1e-10) << t.name;
        }
    }
}

TEST(Aoqpt, DiagonalChiGivesFlatComplementaryMatrix) {
    // with r = p and s = q the double sum reduces to sum_pq chi_pq,pq / k^2
    std::mt19937_64 rng(2);
    const auto t = channels::builtin_cnot();
    const auto f = bases::aoqpt_families(t);
    const CMatrix u = fourier_coefficients(f);
    CMatrix chi = CMatrix::Zero(16, 16);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double diag_sum = 0.0;
    for (int j = 0; j < 16; ++j) {
        chi(j, j) = uni(rng);
        diag_sum += chi(j, j).real();
    }
    const RMatrix tuv = fourier_double_sum(chi, u, 4);
    EXPECT_LT(max_abs(tuv - RMatrix::Constant(4, 4, diag_sum / 16.0)), 1e-12);
}

TEST(Aoqpt, ProjectTransition) {
    RMatrix row(2, 2);
    row << 0.7, 0.4, 0.3, 0.7;
    const auto tp = project_transition(row, Setting::XY, TpMode::TracePreserving);
    EXPECT_NEAR(tp.t(0, 0), 0.65, 1e-14);
    EXPECT_NEAR(tp.t(0, 1), 0.35, 1e-14);
    EXPECT_NEAR(tp.t(1, 0), 0.3, 1e-14);
    EXPECT_NEAR(tp.t(1, 1), 0.7, 1e-14);

    RMatrix stoch(2, 2);
    stoch << 0.2, 0.8, 1.0, 0.0;
    EXPECT_LT(max_abs(project_transition(stoch, Setting::UV, TpMode::TracePreserving).t - stoch), 1e-15);

    RMatrix sub(2, 2);
    sub << 0.3, 0.2, -0.1, 0.4;
    const auto tni = project_transition(sub, Setting::XY, TpMode::TraceNonIncreasing);
    EXPECT_NEAR(tni.t(0, 0), 0.3, 1e-15);
    EXPECT_NEAR(tni.t(0, 1), 0.2, 1e-15);
    EXPECT_NEAR(tni.t(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(tni.t(1, 1), 0.4, 1e-15);

    RMatrix zero = RMatrix::Zero(2, 2);
    zero(1, 1) = 1.0;
    EXPECT_THROW(project_transition(zero, Setting::XY, TpMode::TracePreserving), ParameterError);
}

TEST(Aoqpt, BellProjectorFromPauliExpectations) {
    const CVector phi = qdyn::testing::ket({1.0, 0.0, 0.0, 1.0}) / std::sqrt(2.0);
    const auto dec = bases::pauli_decompose(linalg::projector(phi));
    // on |Phi+><Phi+| itself: <XX> = 1, <YY> = -1, <ZZ> = 1
    EXPECT_NEAR(projector_probability(dec, {{"XX", 1.0}, {"YY", -1.0}, {"ZZ", 1.0}}), 1.0, 1e-15);
    // on |00><00|: <XX> = <YY> = 0, <ZZ> = 1
    EXPECT_NEAR(projector_probability(dec, {{"XX", 0.0}, {"YY", 0.0}, {"ZZ", 1.0}}), 0.5, 1e-15);
    EXPECT_THROW(projector_probability(dec, {{"XX", 1.0}}), ParameterError);
}

TEST(Aoqpt, DatasetAssemblyMatchesBornRule) {
    std::mt19937_64 rng(44);
    for (const auto &t : {channels::builtin_cnot(), channels::builtin_fusion()}) {
        const auto f = bases::aoqpt_families(t);
        const auto plan = bases::plan_settings(t, bases::Scheme::Aoqpt);
        for (int trial = 0; trial < 3; ++trial) {
            const auto k = channels::compose(channels::random_kraus_channel(4, 2, rng), channels::make_kraus({t.kraus}));
            const auto p = channels::kraus_to_chi(k, OperatorBasis::computational(4));
            const auto data = tomo::simulate_counts(p, plan.settings, 0, 0, true);
            const auto truth = transitions_from_process(p, t);
            EXPECT_LT(max_abs(raw_transition_from_dataset(data, f.x, f.y) - truth.xy.t), 1e-12) << t.name;
            EXPECT_LT(max_abs(raw_transition_from_dataset(data, f.u, f.v) - truth.uv.t), 1e-12) << t.name;
        }
    }
}

TEST(Aoqpt, FeasibleSetContainsTruth) {
    for (const auto &t : {channels::builtin_cnot(), channels::builtin_fusion()}) {
        const auto p = noisy(t, "depolarizing:0.1+amplitude_damping:0.05");
        const auto tp = transitions_from_process(p, t);
        const auto spec = build_feasible_set(tp.xy, tp.uv, t, t.default_tp_mode());
        EXPECT_EQ(static_cast<int>(spec.constraints.size()), 2 * t.k * t.k);
        const auto rep = check_feasible(spec, p);
        EXPECT_LT(rep.max_data_residual, 1e-12);
        EXPECT_GT(rep.min_eigenvalue, -1e-12);
        EXPECT_LT(rep.trace_violation, 1e-12);
        // a different process violates the data
        const auto other = check_feasible(spec, noisy(t, "depolarizing:0.5"));
        EXPECT_GT(other.max_data_residual, 1e-3);
    }
    const auto tp = transitions_from_process(channels::ideal_process(channels::builtin_cnot()), channels::builtin_cnot());
    EXPECT_THROW(build_feasible_set(tp.xy, tp.uv, channels::builtin_fusion(), TpMode::TraceNonIncreasing),
                 DimensionError);
}
