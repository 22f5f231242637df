#include <cmath>
#include <sstream>

#include "qdyn/linalg.hpp"
#include "qdyn/sdp.hpp"

namespace qdyn::sdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kDropTol = 1e-14;

SparseMatrix to_sparse(const RMatrix &m) {
    return m.sparseView(1.0, kDropTol);
}

}  // namespace

void svec(const CMatrix &h, double *out) {
    const Eigen::Index n = h.rows();
    int k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            out[k++] = kSqrt2 * h(i, j).real();
            out[k++] = kSqrt2 * h(i, j).imag();
        }
        out[k++] = h(j, j).real();
    }
}

RVector svec(const CMatrix &h) {
    RVector out(h.rows() * h.rows());
    svec(h, out.data());
    return out;
}

CMatrix smat(const double *coords, int n) {
    CMatrix h(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const cplx v(coords[k] / kSqrt2, coords[k + 1] / kSqrt2);
            h(i, j) = v;
            h(j, i) = std::conj(v);
            k += 2;
        }
        h(j, j) = coords[k++];
    }
    return h;
}

CMatrix smat(const RVector &coords, int n) {
    if (coords.size() != static_cast<Eigen::Index>(n) * n) {
        throw DimensionError("smat: coordinate count does not match dimension");
    }
    return smat(coords.data(), n);
}

RMatrix embed_hermitian(const CMatrix &h) {
    if (!linalg::is_hermitian(h)) {
        throw NotHermitianError("embed_hermitian: input is not Hermitian");
    }
    const Eigen::Index n = h.rows();
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    return out;
}

const char *to_string(Status s) {
    switch (s) {
        case Status::Optimal:
            return "optimal";
        case Status::MaxIter:
            return "max_iter";
        case Status::Infeasible:
            return "infeasible";
    }
    return "unknown";
}

Status status_from_string(std::string_view s) {
    for (Status st : {Status::Optimal, Status::MaxIter, Status::Infeasible}) {
        if (s == to_string(st)) {
            return st;
        }
    }
    throw ParameterError("unknown solver status '" + std::string(s) + "'");
}

Expr::Expr(int dim) : dim_(dim), constant_(RVector::Zero(herm_size(dim))) {}

Expr Expr::of(const Var &v) {
    Expr e(v.dim);
    SparseMatrix id(herm_size(v.dim), herm_size(v.dim));
    id.setIdentity();
    e.terms_.emplace(v.id, std::move(id));
    return e;
}

Expr Expr::constant(const CMatrix &c) {
    if (!linalg::is_hermitian(c, 1e-10)) {
        throw NotHermitianError("Expr::constant: matrix is not Hermitian");
    }
    Expr e(static_cast<int>(c.rows()));
    e.constant_ = svec(linalg::hermitian_part(c));
    return e;
}

Expr Expr::scalar(double c) {
    Expr e(1);
    e.constant_(0) = c;
    return e;
}

Expr Expr::map(int out_dim, const LinearMap &f) const {
    const int in_size = herm_size(dim_);
    RMatrix m(herm_size(out_dim), in_size);
    RVector basis = RVector::Zero(in_size);
    for (int c = 0; c < in_size; ++c) {
        basis(c) = 1.0;
        const CMatrix image = f(smat(basis.data(), dim_));
        basis(c) = 0.0;
        if (image.rows() != out_dim || image.cols() != out_dim) {
            throw DimensionError("Expr::map: map returned a matrix of the wrong dimension");
        }
        if (!linalg::is_hermitian(image, 1e-9)) {
            throw NotHermitianError("Expr::map: map does not preserve Hermiticity");
        }
        svec(image, m.col(c).data());
    }
    Expr out(out_dim);
    const SparseMatrix ms = to_sparse(m);
    for (const auto &[id, t] : terms_) {
        SparseMatrix composed = (ms * t).pruned(1.0, kDropTol);
        out.terms_.emplace(id, std::move(composed));
    }
    out.constant_ = m * constant_;
    return out;
}

Expr Expr::inner(const CMatrix &c) const {
    if (c.rows() != dim_ || c.cols() != dim_) {
        throw DimensionError("Expr::inner: dimension mismatch");
    }
    if (!linalg::is_hermitian(c, 1e-10)) {
        throw NotHermitianError("Expr::inner: weight matrix is not Hermitian");
    }
    const RVector w = svec(linalg::hermitian_part(c));
    Expr out(1);
    const SparseMatrix row = to_sparse(w.transpose());
    for (const auto &[id, t] : terms_) {
        out.terms_.emplace(id, (row * t).pruned(1.0, kDropTol));
    }
    out.constant_(0) = w.dot(constant_);
    return out;
}

Expr Expr::trace() const {
    return inner(CMatrix::Identity(dim_, dim_));
}

Expr &Expr::operator+=(const Expr &o) {
    if (o.dim_ != dim_) {
        throw DimensionError("Expr: adding expressions of different dimensions");
    }
    for (const auto &[id, t] : o.terms_) {
        auto it = terms_.find(id);
        if (it == terms_.end()) {
            terms_.emplace(id, t);
        } else {
            it->second = it->second + t;
        }
    }
    constant_ += o.constant_;
    return *this;
}

Expr &Expr::operator-=(const Expr &o) {
    Expr neg = o;
    neg *= -1.0;
    return *this += neg;
}

Expr &Expr::operator*=(double a) {
    for (auto &[id, t] : terms_) {
        t *= a;
    }
    constant_ *= a;
    return *this;
}

CMatrix Expr::evaluate(std::span<const CMatrix> values) const {
    RVector acc = constant_;
    for (const auto &[id, t] : terms_) {
        acc += t * svec(values[id]);
    }
    return smat(acc, dim_);
}

Var Problem::add_psd(std::string name, int dim) {
    if (dim <= 0) {
        throw DimensionError("Problem::add_psd: dimension must be positive");
    }
    vars_.push_back({std::move(name), dim, VarKind::Psd});
    return {static_cast<int>(vars_.size()) - 1, dim};
}

Var Problem::add_free(std::string name, int dim) {
    if (dim <= 0) {
        throw DimensionError("Problem::add_free: dimension must be positive");
    }
    vars_.push_back({std::move(name), dim, VarKind::Free});
    return {static_cast<int>(vars_.size()) - 1, dim};
}

void Problem::check_expr(const Expr &e) const {
    for (const auto &[id, t] : e.terms()) {
        if (id < 0 || id >= static_cast<int>(vars_.size())) {
            throw std::invalid_argument("Problem: expression refers to an unknown variable");
        }
        if (t.cols() != herm_size(vars_[id].dim) || t.rows() != herm_size(e.dim())) {
            throw DimensionError("Problem: expression term has inconsistent shape");
        }
    }
}

int Problem::add_equality(std::string name, Expr expr) {
    check_expr(expr);
    constraints_.push_back({std::move(name), ConstraintKind::Equality, std::move(expr)});
    return static_cast<int>(constraints_.size()) - 1;
}

int Problem::add_psd_constraint(std::string name, Expr expr) {
    check_expr(expr);
    constraints_.push_back({std::move(name), ConstraintKind::Psd, std::move(expr)});
    return static_cast<int>(constraints_.size()) - 1;
}

void Problem::set_objective(Sense sense, Expr scalar_expr) {
    if (scalar_expr.dim() != 1) {
        throw DimensionError("Problem::set_objective: objective must be scalar");
    }
    check_expr(scalar_expr);
    sense_ = sense;
    objective_ = std::move(scalar_expr);
}

ConstraintReport check_point(const Problem &p, std::span<const CMatrix> values) {
    ConstraintReport r;
    r.min_psd_eigenvalue = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < p.vars().size(); ++i) {
        if (p.vars()[i].kind == VarKind::Psd) {
            r.min_psd_eigenvalue = std::min(r.min_psd_eigenvalue, linalg::min_eigenvalue(values[i]));
        }
    }
    for (const auto &c : p.constraints()) {
        const CMatrix v = c.expr.evaluate(values);
        if (c.kind == ConstraintKind::Equality) {
            r.max_equality_violation = std::max(r.max_equality_violation, v.cwiseAbs().maxCoeff());
        } else {
            r.min_psd_eigenvalue = std::min(r.min_psd_eigenvalue, linalg::min_eigenvalue(v));
        }
    }
    if (!std::isfinite(r.min_psd_eigenvalue)) {
        r.min_psd_eigenvalue = 0.0;
    }
    r.objective = p.objective().evaluate(values)(0, 0).real();
    return r;
}

}  // namespace qdyn::sdp
