#pragma once

#include <span>

#include "qdyn/types.hpp"

/// Dense complex linear algebra used throughout the library. All functions are
/// pure; inputs are never modified.
namespace qdyn::linalg {

/// Absolute elementwise tolerance for the Hermiticity check.
inline constexpr double kHermitianTol = 1e-12;

/// Dimensions of a bipartite space H_first (x) H_second.
struct Dims2 {
    int first;
    int second;
};

enum class Subsystem { First, Second };

CMatrix kron(const CMatrix &a, const CMatrix &b);
CMatrix kron_all(std::span<const CMatrix> factors);

/// Traces out `traced` of a bipartite operator and returns the reduced operator
/// on the other factor.
CMatrix partial_trace(const CMatrix &m, Dims2 dims, Subsystem traced);

/// Transposes the `which` tensor factor of a bipartite operator.
CMatrix partial_transpose(const CMatrix &m, Dims2 dims, Subsystem which);

bool is_hermitian(const CMatrix &m, double tol = kHermitianTol);

/// (M + M^dagger) / 2.
CMatrix hermitian_part(const CMatrix &m);

struct EigenDecomposition {
    RVector values;   // ascending
    CMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized before
/// factorization; throws NotHermitianError if it deviates by more than `tol`.
EigenDecomposition eig_hermitian(const CMatrix &h, double tol = kHermitianTol);

/// Nearest positive semidefinite matrix in Frobenius norm.
CMatrix project_psd(const CMatrix &h);

double min_eigenvalue(const CMatrix &h);
double max_eigenvalue(const CMatrix &h);

/// |v><v|
CMatrix projector(const CVector &v);

double frobenius_distance(const CMatrix &a, const CMatrix &b);

}  // namespace qdyn::linalg
