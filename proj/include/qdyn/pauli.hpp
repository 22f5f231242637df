#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qdyn/types.hpp"

/// Pauli matrices and strings. Qubit 0 is the leftmost character and the most
/// significant bit of the computational index.
namespace qdyn::pauli {

/// 'I', 'X', 'Y' or 'Z'.
CMatrix matrix(char p);

/// Tensor product of the single-qubit Paulis named by `s`, e.g. "XZ".
CMatrix string_matrix(std::string_view s);

/// All 4^n strings over {I,X,Y,Z} in lexicographic order I < X < Y < Z.
std::vector<std::string> all_strings(int n);

/// All 3^n strings over {X,Y,Z} in lexicographic order.
std::vector<std::string> measurement_strings(int n);

/// Eigenvalue sign (+1/-1) of outcome `a` for string `s`: outcome bit i = 0
/// means the +1 eigenstate on qubit i. Identity factors contribute +1.
int outcome_sign(std::string_view s, int a);

/// Eigenstate |a> of the product observable `s` (identity factors use Z).
CVector eigenstate(std::string_view s, int a);

/// Number of non-identity factors.
int weight(std::string_view s);

/// True when every non-identity factor of `s` matches `setting`.
bool covered_by(std::string_view s, std::string_view setting);

void check_string(std::string_view s);

}  // namespace qdyn::pauli
