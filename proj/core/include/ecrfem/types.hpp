#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace ecrfem {

/// Point or vector in R^n with n <= 3. Stack storage, no heap traffic.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
/// Small dense n x n matrix (tensor values, Jacobians).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr int kMaxDim = 3;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad mesh files, invalid arguments, incompatible data.
class InputError : public Error {
public:
  using Error::Error;
};

/// A linear or eigen solver failed to reach its tolerance.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double achieved_residual)
      : Error(what), achieved_residual_(achieved_residual) {}

  double achieved_residual() const noexcept { return achieved_residual_; }

private:
  double achieved_residual_;
};

} // namespace ecrfem
