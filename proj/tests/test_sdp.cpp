#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <sstream>

#include "qdyn/linalg.hpp"
#include "qdyn/sdp.hpp"
#include "test_util.hpp"

using namespace qdyn;
using namespace qdyn::sdp;
using qdyn::testing::random_hermitian;

namespace {

// Largest eigenvalue through the general (non-Hermitian) Schur-based solver,
// independent of the Hermitian eigensolver used by the library.
double oracle_lambda_max(const CMatrix &h) {
    Eigen::ComplexEigenSolver<CMatrix> es(h);
    double best = -1e300;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        best = std::max(best, es.eigenvalues()(i).real());
    }
    return best;
}

CMatrix bell_pt() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    m(1, 2) = m(2, 1) = 0.5;
    return m;
}

}  // namespace

TEST(sdp, svec_is_isometry_and_roundtrips) {
    std::mt19937_64 rng(1);
    for (int n : {1, 2, 3, 5}) {
        const CMatrix a = random_hermitian(n, rng);
        const CMatrix b = random_hermitian(n, rng);
        EXPECT_LE((smat(svec(a), n) - a).norm(), 1e-14);
        EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace().real(), 1e-12);
    }
}

TEST(sdp, embed_hermitian_doubles_spectrum) {
    std::mt19937_64 rng(2);
    const CMatrix h = random_hermitian(3, rng);
    const RMatrix e = embed_hermitian(h);
    EXPECT_LE((e - e.transpose()).norm(), 0.0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(e);
    const RVector w = linalg::eig_hermitian(h).values;
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(es.eigenvalues()(2 * i), w(i), 1e-12);
        EXPECT_NEAR(es.eigenvalues()(2 * i + 1), w(i), 1e-12);
    }
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    EXPECT_THROW(embed_hermitian(bad), NotHermitianError);
}

TEST(sdp, lambda_max_of_random_hermitian) {
    std::mt19937_64 rng(3);
    for (int n : {2, 4, 6}) {
        const CMatrix h = random_hermitian(n, rng);
        Problem p;
        const Var x = p.add_psd("X", n);
        p.add_equality("trace", Expr::of(x).trace() - Expr::scalar(1.0));
        p.set_objective(Sense::Maximize, Expr::of(x).inner(h));
        const Solution s = solve(p);
        ASSERT_EQ(s.status, Status::Optimal);
        EXPECT_NEAR(s.objective, oracle_lambda_max(h), 1e-6);
    }
}

TEST(sdp, epigraph_dual_is_top_eigenprojector) {
    std::mt19937_64 rng(4);
    const CMatrix h = random_hermitian(4, rng);
    Problem p;
    const Var t = p.add_free("t", 1);
    const CMatrix one = CMatrix::Identity(4, 4);
    const int c = p.add_psd_constraint(
        "tI-H", Expr::of(t).map(4, [&](const CMatrix &v) -> CMatrix { return v(0, 0) * one; }) - Expr::constant(h));
    p.set_objective(Sense::Minimize, Expr::of(t).trace());
    const Solution s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal);
    const double lmax = oracle_lambda_max(h);
    EXPECT_NEAR(s.objective, lmax, 1e-6);
    const CMatrix &z = s.duals[c];
    EXPECT_GE(linalg::min_eigenvalue(z), -1e-6);
    EXPECT_NEAR(z.trace().real(), 1.0, 1e-5);
    EXPECT_NEAR((z * h).trace().real(), lmax, 1e-5);
}

TEST(sdp, min_trace_with_fixed_corner) {
    Problem p;
    const Var x = p.add_psd("X", 2);
    CMatrix e00 = CMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    p.add_equality("corner", Expr::of(x).inner(e00) - Expr::scalar(1.0));
    p.set_objective(Sense::Minimize, Expr::of(x).trace());
    const Solution s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.objective, 1.0, 1e-6);
    const CMatrix expect = e00;
    EXPECT_LE((s.value(x) - expect).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(sdp, entangled_partial_transpose_is_infeasible) {
    Problem p;
    const Var x = p.add_psd("X", 4);
    p.add_equality("fix", Expr::of(x) - Expr::constant(bell_pt()));
    p.set_objective(Sense::Minimize, Expr::scalar(0.0));
    const Solution s = solve(p);
    EXPECT_EQ(s.status, Status::Infeasible);
}

TEST(sdp, separable_partial_transpose_is_feasible) {
    CMatrix rho = CMatrix::Zero(4, 4);
    rho(0, 0) = rho(3, 3) = 0.5;
    Problem p;
    const Var x = p.add_psd("X", 4);
    p.add_equality("fix", Expr::of(x) - Expr::constant(linalg::partial_transpose(rho, {2, 2}, linalg::Subsystem::Second)));
    p.set_objective(Sense::Minimize, Expr::scalar(0.0));
    EXPECT_EQ(solve(p).status, Status::Optimal);
}

TEST(sdp, solutions_pass_independent_residual_check) {
    std::mt19937_64 rng(5);
    const CMatrix h = random_hermitian(4, rng);
    const CMatrix g = random_hermitian(2, rng);
    Problem p;
    const Var x = p.add_psd("X", 4);
    p.add_equality("trace", Expr::of(x).trace() - Expr::scalar(1.0));
    p.add_psd_constraint("ptr", Expr::constant(CMatrix::Identity(2, 2)) -
                                    Expr::of(x).map(2, [](const CMatrix &v) {
                                        return linalg::partial_trace(v, {2, 2}, linalg::Subsystem::First);
                                    }) * 1.5);
    p.set_objective(Sense::Maximize, Expr::of(x).inner(h) + Expr::of(x).map(2, [](const CMatrix &v) {
                                          return linalg::partial_trace(v, {2, 2}, linalg::Subsystem::Second);
                                      }).inner(g));
    const Solution s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal);
    const ConstraintReport r = check_point(p, s.values);
    EXPECT_LE(r.max_equality_violation, 1e-6);
    EXPECT_GE(r.min_psd_eigenvalue, -1e-6);
    EXPECT_NEAR(r.objective, s.objective, 1e-6);
}

TEST(sdp, deterministic_repeat) {
    std::mt19937_64 rng(6);
    const CMatrix h = random_hermitian(5, rng);
    Problem p;
    const Var x = p.add_psd("X", 5);
    p.add_equality("trace", Expr::of(x).trace() - Expr::scalar(1.0));
    p.set_objective(Sense::Minimize, Expr::of(x).inner(h));
    const Solution a = solve(p);
    const Solution b = solve(p);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ((a.values[0] - b.values[0]).norm(), 0.0);
}

TEST(sdp, warm_started_objective_update) {
    std::mt19937_64 rng(7);
    const CMatrix h1 = random_hermitian(4, rng);
    const CMatrix h2 = random_hermitian(4, rng);
    Problem p;
    const Var x = p.add_psd("X", 4);
    p.add_equality("trace", Expr::of(x).trace() - Expr::scalar(1.0));
    p.set_objective(Sense::Maximize, Expr::of(x).inner(h1));
    Solver solver(p);
    EXPECT_NEAR(solver.solve().objective, oracle_lambda_max(h1), 1e-6);
    solver.set_objective(Sense::Maximize, Expr::of(x).inner(h2));
    EXPECT_NEAR(solver.solve().objective, oracle_lambda_max(h2), 1e-6);
    solver.set_objective(Sense::Minimize, Expr::of(x).inner(h2));
    EXPECT_NEAR(solver.solve().objective, -oracle_lambda_max(-h2), 1e-6);
}

TEST(sdp, map_rejects_wrong_shape) {
    Problem p;
    const Var x = p.add_psd("X", 2);
    EXPECT_THROW(Expr::of(x).map(3, [](const CMatrix &v) { return v; }), DimensionError);
    EXPECT_THROW(p.set_objective(Sense::Minimize, Expr::of(x)), DimensionError);
}

TEST(sdp, sdpa_export_layout) {
    Problem p;
    const Var x = p.add_psd("X", 2);
    p.add_equality("trace", Expr::of(x).trace() - Expr::scalar(1.0));
    CMatrix c = CMatrix::Zero(2, 2);
    c(0, 0) = 1.0;
    p.set_objective(Sense::Minimize, Expr::of(x).inner(c));
    std::ostringstream out;
    write_sdpa(p, out);
    std::istringstream in(out.str());
    std::string comment;
    std::getline(in, comment);
    EXPECT_EQ(comment.front(), '"');
    int m = 0, nblocks = 0, b1 = 0, b2 = 0;
    in >> m >> nblocks >> b1 >> b2;
    EXPECT_EQ(m, 4);
    EXPECT_EQ(nblocks, 2);
    EXPECT_EQ(b1, 4);
    EXPECT_EQ(b2, -2);
    double c0 = 0;
    in >> c0;
    EXPECT_EQ(c0, 1.0);  // coordinate 0 is X(0,0)
}
