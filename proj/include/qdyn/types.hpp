#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qdyn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Raised when operand shapes are incompatible with an operation.
struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string &what) : std::invalid_argument(what) {}
};

/// Raised when a matrix that must be Hermitian is not.
struct NotHermitianError : std::invalid_argument {
    explicit NotHermitianError(const std::string &what) : std::invalid_argument(what) {}
};

/// Raised when a parameter is outside its admissible range.
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string &what) : std::invalid_argument(what) {}
};

}  // namespace qdyn
