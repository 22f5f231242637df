#include "qdyn/measures.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>

#include "qdyn/linalg.hpp"
#include "qdyn/pauli.hpp"

namespace qdyn::measures {

using aoqpt::FeasibleSetSpec;
using channels::ProcessMatrix;
using sdp::Expr;
using sdp::Problem;
using sdp::Sense;
using sdp::Var;

const char *to_string(Kind k) {
    return k == Kind::Dyn ? "dyn" : "cre";
}

const char *to_string(Measure m) {
    switch (m) {
        case Measure::AlphaDyn:
            return "alpha_dyn";
        case Measure::BetaDyn:
            return "beta_dyn";
        case Measure::AlphaCre:
            return "alpha_cre";
        case Measure::BetaCre:
            return "beta_cre";
        case Measure::Fidelity:
            return "fidelity";
    }
    return "?";
}

Measure measure_from_string(std::string_view s) {
    for (Measure m : all_measures()) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw ParameterError("unknown measure '" + std::string(s) + "'");
}

std::vector<Measure> all_measures() {
    return {Measure::AlphaDyn, Measure::BetaDyn, Measure::AlphaCre, Measure::BetaCre, Measure::Fidelity};
}

Kind kind_of(Measure m) {
    return (m == Measure::AlphaDyn || m == Measure::BetaDyn) ? Kind::Dyn : Kind::Cre;
}

bool is_alpha(Measure m) {
    return m == Measure::AlphaDyn || m == Measure::AlphaCre;
}

namespace {

Measure measure_of(Kind k, bool alpha) {
    if (k == Kind::Dyn) {
        return alpha ? Measure::AlphaDyn : Measure::BetaDyn;
    }
    return alpha ? Measure::AlphaCre : Measure::BetaCre;
}

int qubits_of(int d) {
    int n = 0;
    while ((1 << n) < d) {
        ++n;
    }
    if ((1 << n) != d) {
        throw DimensionError("dimension is not a power of two");
    }
    return n;
}

// Tr_1[(rho^T (x) 1) m]
CMatrix transfer(const CMatrix &m, const CMatrix &rho) {
    const int d = static_cast<int>(rho.rows());
    CMatrix out = CMatrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
        for (int c = 0; c < d; ++c) {
            if (rho(a, c) != cplx(0.0)) {
                out += rho(a, c) * m.block(a * d, c * d, d, d);
            }
        }
    }
    return out;
}

CMatrix pt_second(const CMatrix &m) {
    return linalg::partial_transpose(m, {2, 2}, linalg::Subsystem::Second);
}

void require_kind(Kind kind, int d) {
    if (kind == Kind::Cre && d != 4) {
        throw DimensionError("entanglement-creation measures need a two-qubit process");
    }
    if (kind == Kind::Dyn && d != 2 && d != 4) {
        throw DimensionError("dynamics measures support one or two qubits");
    }
}

// Constrains the d^2 x d^2 expression x to the cone of unnormalized incapable
// processes.
void add_incapable(Problem &prob, const Expr &x, Kind kind, int d) {
    require_kind(kind, d);
    if (kind == Kind::Dyn) {
        const RealismModel model = build_realism_model(qubits_of(d));
        std::vector<Var> rho;
        for (int mu = 0; mu < model.objects; ++mu) {
            rho.push_back(prob.add_psd("rho" + std::to_string(mu), d));
        }
        for (size_t sx = 0; sx < model.settings.size(); ++sx) {
            for (int a = 0; a < model.outcomes; ++a) {
                const CMatrix &sigma = model.sigma[sx][a];
                Expr e = x.map(d, [&](const CMatrix &m) { return transfer(m, sigma); });
                for (int mu = 0; mu < model.objects; ++mu) {
                    if (model.response(mu, static_cast<int>(sx), a)) {
                        e -= Expr::of(rho[mu]);
                    }
                }
                prob.add_equality("realism_" + model.settings[sx] + "_" + std::to_string(a), std::move(e));
            }
        }
        return;
    }
    const auto inputs = product_inputs();
    for (size_t m = 0; m < inputs.size(); ++m) {
        const CMatrix &rho = inputs[m];
        prob.add_psd_constraint("ppt" + std::to_string(m),
                                x.map(d, [&](const CMatrix &v) { return pt_second(transfer(v, rho)); }));
    }
}

struct DualModel {
    Problem prob;
    Var cert;
    std::vector<Var> ks;
};

DualModel build_dual(Kind kind, bool alpha, int d) {
    require_kind(kind, d);
    DualModel dm;
    const int d2 = d * d;
    dm.cert = dm.prob.add_psd(alpha ? "F" : "G", d2);
    Expr sum(d2);
    if (kind == Kind::Dyn) {
        const RealismModel model = build_realism_model(qubits_of(d));
        for (size_t sx = 0; sx < model.settings.size(); ++sx) {
            for (int a = 0; a < model.outcomes; ++a) {
                const Var k = dm.prob.add_free("K_" + model.settings[sx] + "_" + std::to_string(a), d);
                dm.ks.push_back(k);
                const CMatrix st = model.sigma[sx][a].transpose();
                sum += Expr::of(k).map(d2, [&](const CMatrix &m) { return linalg::kron(st, m); });
            }
        }
        for (int mu = 0; mu < model.objects; ++mu) {
            Expr e(d);
            for (size_t sx = 0; sx < model.settings.size(); ++sx) {
                for (int a = 0; a < model.outcomes; ++a) {
                    if (model.response(mu, static_cast<int>(sx), a)) {
                        e += Expr::of(dm.ks[sx * model.outcomes + a]);
                    }
                }
            }
            dm.prob.add_psd_constraint("object" + std::to_string(mu), std::move(e));
        }
    } else {
        const auto inputs = product_inputs();
        for (size_t m = 0; m < inputs.size(); ++m) {
            const Var k = dm.prob.add_psd("K" + std::to_string(m), d);
            dm.ks.push_back(k);
            const CMatrix rt = inputs[m].transpose();
            sum += Expr::of(k).map(d2, [&](const CMatrix &v) { return linalg::kron(rt, pt_second(v)); });
        }
    }
    const Expr one = Expr::constant(CMatrix::Identity(d2, d2));
    if (alpha) {
        dm.prob.add_psd_constraint("stationarity", Expr::of(dm.cert) - sum - one);
    } else {
        dm.prob.add_psd_constraint("stationarity", one - Expr::of(dm.cert) - sum);
    }
    return dm;
}

Expr dual_objective(const DualModel &dm, bool alpha, const CMatrix &j) {
    const Expr tr = Expr::of(dm.cert).inner(linalg::hermitian_part(j));
    return alpha ? Expr::scalar(1.0) - tr : tr - Expr::scalar(1.0);
}

void record(SolverInfo &info, const sdp::Solution &s) {
    if (info.solves == 0 || s.status != sdp::Status::Optimal) {
        info.status = s.status;
    }
    info.iterations += s.iterations;
    info.primal_residual = std::max(info.primal_residual, s.primal_residual);
    info.dual_residual = std::max(info.dual_residual, s.dual_residual);
    info.gap = std::max(info.gap, s.gap_estimate);
    ++info.solves;
}

// Unit-trace PSD part; numerically negative eigenvalues would make X = 0
// infeasible in the alpha primal.
CMatrix clipped(const CMatrix &j) {
    const CMatrix c = linalg::project_psd(j);
    return c / c.trace().real();
}

MeasureResult primal(const ProcessMatrix &p, Kind kind, bool alpha, const sdp::Settings &s) {
    const int d = p.dim();
    const CMatrix j = clipped(normalized_choi(p));
    Problem prob;
    // For alpha, 0 <= X <= J confines X to the range of J: X = V Z V^dagger.
    CMatrix v = CMatrix::Identity(d * d, d * d);
    RVector lambda;
    if (alpha) {
        const auto e = linalg::eig_hermitian(j);
        const double cut = 1e-10 * e.values.maxCoeff();
        int rank = 0;
        for (Eigen::Index i = 0; i < e.values.size(); ++i) {
            rank += e.values(i) > cut ? 1 : 0;
        }
        if (rank < d * d) {
            v = e.vectors.rightCols(rank);
            lambda = e.values.tail(rank);
        }
    }
    const bool reduced = lambda.size() > 0;
    const Var z = prob.add_psd("X", static_cast<int>(v.cols()));
    const Expr x = reduced ? Expr::of(z).map(d * d, [&v](const CMatrix &m) { return CMatrix(v * m * v.adjoint()); })
                           : Expr::of(z);
    add_incapable(prob, x, kind, d);
    if (alpha) {
        prob.add_psd_constraint("J-X", reduced ? Expr::constant(lambda.cast<cplx>().asDiagonal().toDenseMatrix()) -
                                                     Expr::of(z)
                                               : Expr::constant(j) - Expr::of(z));
        prob.set_objective(Sense::Minimize, Expr::scalar(1.0) - Expr::of(z).trace());
    } else {
        prob.add_psd_constraint("X-J", x - Expr::constant(j));
        prob.set_objective(Sense::Minimize, x.trace() - Expr::scalar(1.0));
    }
    const auto sol = sdp::solve(prob, s);
    MeasureResult r;
    r.measure = measure_of(kind, alpha);
    r.value = sol.objective;
    r.incapable = v * sol.value(z) * v.adjoint();
    r.complement = alpha ? CMatrix(j - r.incapable) : CMatrix(r.incapable - j);
    record(r.solver, sol);
    return r;
}

MeasureResult dual(const ProcessMatrix &p, Kind kind, bool alpha, const sdp::Settings &s) {
    const CMatrix j = clipped(normalized_choi(p));
    DualModel dm = build_dual(kind, alpha, p.dim());
    dm.prob.set_objective(Sense::Maximize, dual_objective(dm, alpha, j));
    const auto sol = sdp::solve(dm.prob, s);
    MeasureResult r;
    r.measure = measure_of(kind, alpha);
    r.value = sol.objective;
    r.certificate = sol.value(dm.cert);
    for (const auto &k : dm.ks) {
        r.multipliers.push_back(sol.value(k));
    }
    record(r.solver, sol);
    return r;
}

struct FeasVars {
    Var y;
    Var s;
};

// Charnes-Cooper form of the data-consistent set: Y = chi'/Tr chi', s = 1/Tr chi'.
FeasVars add_feasible_set(Problem &prob, const FeasibleSetSpec &spec) {
    const int d = spec.dim();
    FeasVars v{prob.add_psd("Y", d * d), prob.add_psd("s", 1)};
    const Expr y = Expr::of(v.y);
    const Expr s = Expr::of(v.s);
    for (const auto &c : spec.constraints) {
        prob.add_equality(std::string("data_") + aoqpt::to_string(c.setting) + "_" + std::to_string(c.m) + "_" +
                              std::to_string(c.n),
                          y.inner(c.weight) - c.value * s);
    }
    prob.add_equality("unit_trace", y.trace() - Expr::scalar(1.0));
    const Expr red = y.map(d, [d](const CMatrix &m) {
        return linalg::partial_trace(m, {d, d}, linalg::Subsystem::Second);
    });
    const CMatrix id = CMatrix::Identity(d, d);
    const Expr s_one = s.map(d, [&](const CMatrix &m) -> CMatrix { return m(0, 0) * id; });
    if (spec.tp_mode == channels::TpMode::TracePreserving) {
        prob.add_equality("trace_preserving", red - s_one);
    } else {
        prob.add_psd_constraint("trace_non_increasing", s_one - red);
    }
    return v;
}

CMatrix random_psd_unit(int n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = cplx(g(rng), g(rng));
        }
    }
    CMatrix p = a * a.adjoint();
    return p / p.norm();
}

}  // namespace

int RealismModel::response(int mu, int x, int a) const {
    const std::string &s = settings.at(x);
    const int n = n_qubits;
    for (int q = 0; q < n; ++q) {
        const int obj = (mu >> (3 * (n - 1 - q))) & 7;
        const int axis = s[q] == 'X' ? 0 : (s[q] == 'Y' ? 1 : 2);
        const int assigned = (obj >> axis) & 1;
        const int bit = (a >> (n - 1 - q)) & 1;
        if (assigned != bit) {
            return 0;
        }
    }
    return 1;
}

RealismModel build_realism_model(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 2) {
        throw ParameterError("build_realism_model: supported for one or two qubits");
    }
    RealismModel m;
    m.n_qubits = n_qubits;
    m.settings = pauli::measurement_strings(n_qubits);
    m.outcomes = 1 << n_qubits;
    m.objects = 1 << (3 * n_qubits);
    for (const auto &s : m.settings) {
        std::vector<CMatrix> proj;
        for (int a = 0; a < m.outcomes; ++a) {
            proj.push_back(linalg::projector(pauli::eigenstate(s, a)));
        }
        m.sigma.push_back(std::move(proj));
    }
    return m;
}

std::vector<CMatrix> product_inputs() {
    std::vector<CMatrix> single;
    for (char c : {'Z', 'X', 'Y'}) {
        for (int a = 0; a < 2; ++a) {
            single.push_back(linalg::projector(pauli::eigenstate(std::string(1, c), a)));
        }
    }
    std::vector<CMatrix> out;
    for (const auto &a : single) {
        for (const auto &b : single) {
            out.push_back(linalg::kron(a, b));
        }
    }
    return out;
}

CMatrix normalized_choi(const ProcessMatrix &p) {
    const CMatrix c = channels::to_computational(p).chi;
    const double tr = c.trace().real();
    if (!(tr > 0.0)) {
        throw ParameterError("process matrix has zero trace");
    }
    return linalg::hermitian_part(c / tr);
}

MeasureResult alpha_direct(const ProcessMatrix &p, Kind kind, const sdp::Settings &s) {
    return primal(p, kind, true, s);
}

MeasureResult beta_direct(const ProcessMatrix &p, Kind kind, const sdp::Settings &s) {
    return primal(p, kind, false, s);
}

MeasureResult alpha_dual(const ProcessMatrix &p, Kind kind, const sdp::Settings &s) {
    return dual(p, kind, true, s);
}

MeasureResult beta_dual(const ProcessMatrix &p, Kind kind, const sdp::Settings &s) {
    return dual(p, kind, false, s);
}

double certificate_violation(const MeasureResult &r, int dim) {
    if (r.measure == Measure::Fidelity) {
        throw ParameterError("certificate_violation: fidelity has no dual certificate");
    }
    const DualModel dm = build_dual(kind_of(r.measure), is_alpha(r.measure), dim);
    std::vector<CMatrix> values{r.certificate};
    values.insert(values.end(), r.multipliers.begin(), r.multipliers.end());
    const auto rep = sdp::check_point(dm.prob, values);
    return rep.min_psd_eigenvalue;
}

double process_fidelity(const ProcessMatrix &a, const ProcessMatrix &b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("process_fidelity: dimension mismatch");
    }
    return (normalized_choi(a) * normalized_choi(b)).trace().real();
}

MeasureResult direct(const ProcessMatrix &p, Measure m, const channels::TargetOperation &target,
                     const sdp::Settings &s) {
    if (m == Measure::Fidelity) {
        MeasureResult r;
        r.measure = m;
        r.value = process_fidelity(p, channels::ideal_process(target));
        r.solver.status = sdp::Status::Optimal;
        return r;
    }
    return primal(p, kind_of(m), is_alpha(m), s);
}

CMatrix least_squares_point(const FeasibleSetSpec &spec) {
    const int d = spec.dim();
    const int n = sdp::herm_size(d * d);
    std::vector<RVector> rows;
    std::vector<double> rhs;
    for (const auto &c : spec.constraints) {
        rows.push_back(sdp::svec(linalg::hermitian_part(c.weight)));
        rhs.push_back(c.value);
    }
    if (spec.tp_mode == channels::TpMode::TracePreserving) {
        // Tr_2 chi' = 1; the adjoint of Tr_2 is D -> D (x) 1
        const RVector id = sdp::svec(CMatrix::Identity(d, d));
        RVector unit = RVector::Zero(sdp::herm_size(d));
        for (int c = 0; c < sdp::herm_size(d); ++c) {
            unit(c) = 1.0;
            rows.push_back(sdp::svec(linalg::kron(sdp::smat(unit, d), CMatrix::Identity(d, d))));
            rhs.push_back(id(c));
            unit(c) = 0.0;
        }
    }
    RMatrix a(static_cast<Eigen::Index>(rows.size()), n);
    for (size_t i = 0; i < rows.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    const RVector b = Eigen::Map<const RVector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(a);
    const RVector x = cod.solve(b);
    CMatrix chi = linalg::project_psd(sdp::smat(x, d * d));
    const double tr = chi.trace().real();
    if (!(tr > 1e-12)) {
        return CMatrix::Identity(d * d, d * d) / static_cast<double>(d * d);
    }
    return chi / tr;
}

MeasureResult aoqpt_lower(const FeasibleSetSpec &spec, Measure m, const sdp::Settings &s) {
    const int d = spec.dim();
    Problem prob;
    const FeasVars fv = add_feasible_set(prob, spec);
    const Expr y = Expr::of(fv.y);
    MeasureResult r;
    r.measure = m;
    Var x{};
    if (m == Measure::Fidelity) {
        const CMatrix ji = normalized_choi(channels::ideal_process(spec.target));
        prob.set_objective(Sense::Minimize, y.inner(ji));
    } else {
        x = prob.add_psd("X", d * d);
        add_incapable(prob, Expr::of(x), kind_of(m), d);
        if (is_alpha(m)) {
            prob.add_psd_constraint("Y-X", y - Expr::of(x));
            prob.set_objective(Sense::Minimize, Expr::scalar(1.0) - Expr::of(x).trace());
        } else {
            prob.add_psd_constraint("X-Y", Expr::of(x) - y);
            prob.set_objective(Sense::Minimize, Expr::of(x).trace() - Expr::scalar(1.0));
        }
    }
    const auto sol = sdp::solve(prob, s);
    record(r.solver, sol);
    r.lower = sol.objective;
    r.chi_worst = sol.value(fv.y);
    if (m != Measure::Fidelity) {
        r.incapable = sol.value(x);
        r.complement = is_alpha(m) ? CMatrix(r.chi_worst - r.incapable) : CMatrix(r.incapable - r.chi_worst);
    }
    return r;
}

MeasureResult aoqpt_upper(const FeasibleSetSpec &spec, Measure m, const SeesawOptions &opt) {
    const int d = spec.dim();
    MeasureResult r;
    r.measure = m;
    Problem fp;
    const FeasVars fv = add_feasible_set(fp, spec);
    const Expr y = Expr::of(fv.y);

    if (m == Measure::Fidelity) {
        const CMatrix ji = normalized_choi(channels::ideal_process(spec.target));
        fp.set_objective(Sense::Maximize, y.inner(ji));
        const auto sol = sdp::solve(fp, opt.sdp);
        record(r.solver, sol);
        r.upper = sol.objective;
        r.chi_best = sol.value(fv.y);
        return r;
    }

    const bool alpha = is_alpha(m);
    DualModel dm = build_dual(kind_of(m), alpha, d);
    dm.prob.set_objective(Sense::Maximize, dual_objective(dm, alpha, CMatrix::Identity(d * d, d * d) / (d * d)));
    sdp::Settings step_settings = opt.sdp;
    step_settings.max_iter = std::min(step_settings.max_iter, opt.step_max_iter);
    sdp::Solver dual_solver(dm.prob, step_settings);
    sdp::Solver feas_solver(fp, step_settings);
    // Degenerate steps can stall on the gap with the residuals converged.
    auto usable = [&](const sdp::Solution &sol) {
        if (sol.status == sdp::Status::Optimal) {
            return true;
        }
        return sol.status == sdp::Status::MaxIter && sol.primal_residual <= 10 * step_settings.tol &&
               sol.dual_residual <= 10 * step_settings.tol && sol.gap_estimate <= opt.accept_gap;
    };

    struct Step {
        bool ok;
        double value;
        CMatrix cert;
        std::vector<CMatrix> ks;
    };
    auto f_step = [&](const CMatrix &yv) {
        dual_solver.set_objective(Sense::Maximize, dual_objective(dm, alpha, yv));
        dual_solver.reset_warm_start();
        const auto sol = dual_solver.solve();
        record(r.solver, sol);
        Step st{usable(sol), sol.objective, sol.value(dm.cert), {}};
        for (const auto &k : dm.ks) {
            st.ks.push_back(sol.value(k));
        }
        return st;
    };
    auto y_step = [&](const CMatrix &cert, CMatrix &out) {
        // alpha: minimize Tr(F Y); beta: maximize Tr(G Y)
        feas_solver.set_objective(alpha ? Sense::Minimize : Sense::Maximize, y.inner(linalg::hermitian_part(cert)));
        const auto sol = feas_solver.solve();
        record(r.solver, sol);
        out = clipped(sol.value(fv.y));
        return usable(sol);
    };

    const CMatrix y0 = least_squares_point(spec);
    const Step s0 = f_step(y0);
    double best = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
        CMatrix cert = s0.cert;
        std::vector<double> trace;
        CMatrix ycur = y0;
        Step cur = s0;
        if (restart == 0) {
            if (!s0.ok) {
                continue;
            }
            trace.push_back(s0.value);
        } else {
            std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(restart));
            cert = s0.cert + 0.1 * s0.cert.norm() * random_psd_unit(d * d, rng);
        }
        bool failed = false;
        for (int round = 0; round < opt.max_rounds; ++round) {
            CMatrix ynext;
            if (!y_step(cert, ynext)) {
                failed = true;
                break;
            }
            const Step st = f_step(ynext);
            if (!st.ok) {
                failed = true;
                break;
            }
            if (!trace.empty() && st.value < trace.back()) {
                r.seesaw_rejected = std::max(r.seesaw_rejected, trace.back() - st.value);
                break;
            }
            trace.push_back(st.value);
            ycur = ynext;
            cur = st;
            cert = st.cert;
            if (trace.size() >= 2 && trace.back() - trace[trace.size() - 2] < opt.tol) {
                break;
            }
        }
        ++r.restarts;
        if (trace.empty() || (failed && trace.size() < 2 && restart > 0)) {
            continue;
        }
        if (trace.back() > best) {
            best = trace.back();
            r.upper = best;
            r.chi_best = ycur;
            r.certificate = cur.cert;
            r.multipliers = cur.ks;
            r.seesaw_trace = trace;
        }
    }
    return r;
}

}  // namespace qdyn::measures
