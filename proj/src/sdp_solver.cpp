#include <cstdio>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "qdyn/sdp.hpp"

namespace qdyn::sdp {

namespace {

enum class Cone { Zero, Psd };

struct Block {
    Cone cone;
    int row;   // first row
    int size;  // number of rows
    int dim;   // matrix dimension for Psd blocks
};

double inf_norm(const RVector &v) {
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

void project_psd_coords(double *v, int dim) {
    if (dim == 1) {
        v[0] = std::max(v[0], 0.0);
        return;
    }
    const CMatrix h = smat(v, dim);
    Eigen::LLT<CMatrix> llt(h);
    if (llt.info() == Eigen::Success) {
        return;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const RVector &w = es.eigenvalues();
    if (w(dim - 1) <= 0.0) {
        std::fill(v, v + herm_size(dim), 0.0);
        return;
    }
    int first_pos = 0;
    while (w(first_pos) <= 0.0) {
        ++first_pos;
    }
    const int k = dim - first_pos;
    const CMatrix vk = es.eigenvectors().rightCols(k);
    const CMatrix p = vk * w.tail(k).cast<cplx>().asDiagonal() * vk.adjoint();
    svec(p, v);
}

}  // namespace

Settings Settings::from_env() {
    return from_env(Settings{});
}

Settings Settings::from_env(Settings base) {
    if (const char *t = std::getenv("QDYN_SDP_TOL")) {
        base.tol = std::strtod(t, nullptr);
    }
    if (const char *t = std::getenv("QDYN_SDP_MAX_ITER")) {
        base.max_iter = std::atoi(t);
    }
    return base;
}

struct Solver::Impl {
    Settings st;
    int n = 0;
    int m = 0;
    SparseMatrix A;
    SparseMatrix At;
    RVector b;
    RVector q;
    double q0 = 0.0;
    double sign = 1.0;  // -1 for maximization
    std::vector<Block> blocks;
    std::vector<int> var_offset;
    std::vector<int> var_dim;
    std::vector<int> con_block;  // block index per user constraint
    std::vector<bool> row_is_eq;

    double rho = 0.1;
    RVector R;
    SparseMatrix K;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    bool analyzed = false;

    RVector x, s, y;
    bool warm = false;

    void compile(const Problem &p) {
        const auto &vars = p.vars();
        var_offset.resize(vars.size());
        var_dim.resize(vars.size());
        for (size_t i = 0; i < vars.size(); ++i) {
            var_offset[i] = n;
            var_dim[i] = vars[i].dim;
            n += herm_size(vars[i].dim);
        }
        std::vector<Eigen::Triplet<double>> trip;
        std::vector<double> bvals;
        auto add_block = [&](Cone cone, int size, int dim) {
            blocks.push_back({cone, m, size, dim});
            m += size;
            bvals.resize(m, 0.0);
        };
        for (size_t i = 0; i < vars.size(); ++i) {
            if (vars[i].kind != VarKind::Psd) {
                continue;
            }
            const int row = m;
            add_block(Cone::Psd, herm_size(vars[i].dim), vars[i].dim);
            for (int k = 0; k < herm_size(vars[i].dim); ++k) {
                trip.emplace_back(row + k, var_offset[i] + k, -1.0);
            }
        }
        for (const auto &c : p.constraints()) {
            const int row = m;
            const int size = herm_size(c.expr.dim());
            const bool eq = c.kind == ConstraintKind::Equality;
            con_block.push_back(static_cast<int>(blocks.size()));
            add_block(eq ? Cone::Zero : Cone::Psd, size, c.expr.dim());
            const double sgn = eq ? 1.0 : -1.0;
            for (const auto &[id, t] : c.expr.terms()) {
                for (int col = 0; col < t.outerSize(); ++col) {
                    for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
                        trip.emplace_back(row + static_cast<int>(it.row()), var_offset[id] + col, sgn * it.value());
                    }
                }
            }
            for (int k = 0; k < size; ++k) {
                bvals[row + k] = -sgn * c.expr.constant_coords()(k);
            }
        }
        A.resize(m, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        At = A.transpose();
        b = Eigen::Map<RVector>(bvals.data(), m);
        row_is_eq.assign(m, false);
        for (const auto &blk : blocks) {
            if (blk.cone == Cone::Zero) {
                std::fill(row_is_eq.begin() + blk.row, row_is_eq.begin() + blk.row + blk.size, true);
            }
        }
        x = RVector::Zero(n);
        s = RVector::Zero(m);
        y = RVector::Zero(m);
    }

    void set_objective(Sense sense, const Expr &e) {
        sign = sense == Sense::Minimize ? 1.0 : -1.0;
        q = RVector::Zero(n);
        for (const auto &[id, t] : e.terms()) {
            for (int col = 0; col < t.outerSize(); ++col) {
                for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
                    q(var_offset[id] + col) += sign * it.value();
                }
            }
        }
        q0 = e.constant_coords()(0);
    }

    void factorize() {
        R.resize(m);
        for (int i = 0; i < m; ++i) {
            R(i) = row_is_eq[i] ? rho * st.eq_rho_scale : rho;
        }
        K = At * R.asDiagonal() * A;
        SparseMatrix id(n, n);
        id.setIdentity();
        K += st.sigma * id;
        if (!analyzed) {
            ldlt.analyzePattern(K);
            analyzed = true;
        }
        ldlt.factorize(K);
    }

    void project(RVector &v) const {
        for (const auto &blk : blocks) {
            if (blk.cone == Cone::Zero) {
                v.segment(blk.row, blk.size).setZero();
            } else {
                project_psd_coords(v.data() + blk.row, blk.dim);
            }
        }
    }

    struct Residuals {
        double primal, dual, gap;
    };

    Residuals residuals() const {
        const RVector ax = A * x;
        const RVector aty = At * y;
        const double pscale = std::max({1.0, inf_norm(ax), inf_norm(s), inf_norm(b)});
        const double dscale = std::max({1.0, inf_norm(aty), inf_norm(q)});
        const double pobj = q.dot(x);
        const double dobj = b.dot(y);
        const double gscale = std::max({1.0, std::abs(pobj), std::abs(dobj)});
        return {inf_norm(ax + s - b) / pscale, inf_norm(q - aty) / dscale, std::abs(pobj - dobj) / gscale};
    }

    bool infeasibility_certificate(const RVector &dy) const {
        const double ndy = inf_norm(dy);
        if (ndy < 1e-12) {
            return false;
        }
        const double tol = st.infeasibility_tol;
        if (inf_norm(At * dy) > tol * ndy || b.dot(dy) <= tol * ndy) {
            return false;
        }
        // dy must lie in the polar cone: its projection onto K vanishes
        RVector pk = dy;
        project(pk);
        return inf_norm(pk) <= tol * ndy;
    }

    Solution run() {
        if (!warm) {
            x.setZero();
            s.setZero();
            y.setZero();
            rho = st.rho;
        }
        factorize();
        const char *te = std::getenv("QDYN_SDP_TRACE");
        const int trace_every = te ? std::atoi(te) : 0;
        const double a = st.alpha;
        RVector rhs(n), xt(n), st_(m), shat(m), v(m);
        RVector y_check = y;
        Residuals res{1.0, 1.0, 1.0};
        Status status = Status::MaxIter;
        int it = 0;
        long adapt_every = st.adapt_interval;
        long next_adapt = adapt_every;
        for (it = 1; it <= st.max_iter; ++it) {
            rhs = st.sigma * x - q + At * (R.cwiseProduct(b - s) + y);
            xt = ldlt.solve(rhs);
            for (int r = 0; r < st.refine_steps; ++r) {
                xt += ldlt.solve(rhs - K * xt);
            }
            st_ = b - A * xt;
            x = a * xt + (1.0 - a) * x;
            shat = a * st_ + (1.0 - a) * s;
            v = shat + y.cwiseQuotient(R);
            s = v;
            project(s);
            y = R.cwiseProduct(v - s);

            if (it % st.check_interval == 0 || it == st.max_iter) {
                res = residuals();
                if (trace_every > 0 && it % trace_every == 0) {
                    std::fprintf(stderr, "it %d rho %.3g p %.3e d %.3e g %.3e obj %.10f\n", it, rho, res.primal, res.dual, res.gap, sign * q.dot(x) + q0);
                }
                if (res.primal <= st.tol && res.dual <= st.tol && res.gap <= st.tol) {
                    status = Status::Optimal;
                    break;
                }
                if (res.primal > 10 * st.tol && infeasibility_certificate(y - y_check)) {
                    status = Status::Infeasible;
                    break;
                }
                y_check = y;
            }
            if (st.adapt_interval > 0 && it >= next_adapt) {
                next_adapt = it + adapt_every;
                const double ratio = res.primal / std::max(res.dual, 1e-300);
                double next = rho;
                if (ratio > st.adapt_threshold) {
                    next = std::min(rho * st.adapt_factor, st.rho_max);
                } else if (ratio < 1.0 / st.adapt_threshold) {
                    next = std::max(rho / st.adapt_factor, st.rho_min);
                }
                if (next != rho) {
                    rho = next;
                    factorize();
                    // back off so rho cannot oscillate between two values
                    adapt_every *= 2;
                    next_adapt = it + adapt_every;
                }
            }
        }
        if (status == Status::MaxIter && res.primal > st.plateau_residual) {
            status = Status::Infeasible;
        }
        warm = true;

        Solution sol;
        sol.status = status;
        sol.iterations = std::min(it, st.max_iter);
        sol.primal_residual = res.primal;
        sol.dual_residual = res.dual;
        sol.gap_estimate = res.gap;
        sol.objective = sign * q.dot(x) + q0;
        for (size_t i = 0; i < var_offset.size(); ++i) {
            sol.values.push_back(smat(x.data() + var_offset[i], var_dim[i]));
        }
        // y lies in the polar cone; the multipliers of the user constraints are -y.
        for (int bi : con_block) {
            const Block &blk = blocks[bi];
            const RVector lam = -y.segment(blk.row, blk.size);
            sol.duals.push_back(smat(lam.data(), blk.dim));
        }
        return sol;
    }
};

Solver::Solver(const Problem &p, Settings s) : impl_(std::make_unique<Impl>()) {
    impl_->st = s;
    impl_->compile(p);
    impl_->set_objective(p.sense(), p.objective());
}

Solver::~Solver() = default;
Solver::Solver(Solver &&) noexcept = default;
Solver &Solver::operator=(Solver &&) noexcept = default;

void Solver::set_objective(Sense sense, const Expr &scalar_expr) {
    if (scalar_expr.dim() != 1) {
        throw DimensionError("Solver::set_objective: objective must be scalar");
    }
    impl_->set_objective(sense, scalar_expr);
}

Solution Solver::solve() {
    return impl_->run();
}

void Solver::reset_warm_start() {
    impl_->warm = false;
}

int Solver::num_variables() const {
    return impl_->n;
}

int Solver::num_rows() const {
    return impl_->m;
}

Solution solve(const Problem &p, Settings s) {
    Solver solver(p, s);
    return solver.solve();
}

}  // namespace qdyn::sdp
