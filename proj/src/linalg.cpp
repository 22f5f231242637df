#include "qdyn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace qdyn::linalg {

namespace {

void require_bipartite(const CMatrix &m, Dims2 dims, const char *op) {
    const Eigen::Index n = static_cast<Eigen::Index>(dims.first) * dims.second;
    if (dims.first <= 0 || dims.second <= 0 || m.rows() != n || m.cols() != n) {
        std::ostringstream ss;
        ss << op << ": expected a square matrix of dimension " << dims.first << "x" << dims.second
           << " = " << n << ", got " << m.rows() << "x" << m.cols();
        throw DimensionError(ss.str());
    }
}

}  // namespace

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (const auto &f : factors) {
        out = kron(out, f);
    }
    return out;
}

CMatrix partial_trace(const CMatrix &m, Dims2 dims, Subsystem traced) {
    require_bipartite(m, dims, "partial_trace");
    const int d1 = dims.first;
    const int d2 = dims.second;
    if (traced == Subsystem::First) {
        CMatrix out = CMatrix::Zero(d2, d2);
        for (int a = 0; a < d1; ++a) {
            out += m.block(a * d2, a * d2, d2, d2);
        }
        return out;
    }
    CMatrix out(d1, d1);
    for (int a = 0; a < d1; ++a) {
        for (int c = 0; c < d1; ++c) {
            out(a, c) = m.block(a * d2, c * d2, d2, d2).trace();
        }
    }
    return out;
}

CMatrix partial_transpose(const CMatrix &m, Dims2 dims, Subsystem which) {
    require_bipartite(m, dims, "partial_transpose");
    const int d1 = dims.first;
    const int d2 = dims.second;
    CMatrix out(m.rows(), m.cols());
    for (int a = 0; a < d1; ++a) {
        for (int c = 0; c < d1; ++c) {
            if (which == Subsystem::Second) {
                out.block(a * d2, c * d2, d2, d2) = m.block(a * d2, c * d2, d2, d2).transpose();
            } else {
                out.block(a * d2, c * d2, d2, d2) = m.block(c * d2, a * d2, d2, d2);
            }
        }
    }
    return out;
}

bool is_hermitian(const CMatrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) {
                return false;
            }
        }
    }
    return m.allFinite();
}

CMatrix hermitian_part(const CMatrix &m) {
    return (m + m.adjoint()) * 0.5;
}

EigenDecomposition eig_hermitian(const CMatrix &h, double tol) {
    if (h.rows() != h.cols()) {
        throw DimensionError("eig_hermitian: matrix is not square");
    }
    if (!is_hermitian(h, tol)) {
        throw NotHermitianError("eig_hermitian: matrix is not Hermitian within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
    return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix project_psd(const CMatrix &h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
    const RVector clipped = solver.eigenvalues().cwiseMax(0.0);
    const CMatrix &v = solver.eigenvectors();
    return v * clipped.cast<cplx>().asDiagonal() * v.adjoint();
}

double min_eigenvalue(const CMatrix &h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

double max_eigenvalue(const CMatrix &h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(solver.eigenvalues().size() - 1);
}

CMatrix projector(const CVector &v) {
    return v * v.adjoint();
}

double frobenius_distance(const CMatrix &a, const CMatrix &b) {
    return (a - b).norm();
}

}  // namespace qdyn::linalg
