#pragma once

#include "ecrfem/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace ecrfem {

enum class SpdMethod { Direct, ConjugateGradient };

struct SolverConfig {
  double tolerance = 1e-12;       ///< relative residual for linear solves
  int max_iterations = 2000;      ///< CG iterations / eigen subspace sweeps
  double eigen_shift = 0.0;
  int num_eigenpairs = 1;
  double eigen_tolerance = 1e-10; ///< relative eigen residual
  int dense_threshold = 2000;     ///< dense fallback below this size if the iteration fails
  SpdMethod spd_method = SpdMethod::Direct;
};

/// x with ||Ax - b|| <= tol ||b|| for symmetric positive definite A.
/// Throws SolverError on breakdown (non-positive pivot) or non-convergence.
Vector solve_spd(const SparseMatrix& A, const Vector& b, const SolverConfig& config = {});

/// Symmetric block system
///
///   [ A   B^T  C   0 ] [x]   [f]
///   [ B   0    0   D ] [y] = [g]
///   [ C^T 0    0   0 ] [a]   [0]
///   [ 0   D^T  0   0 ] [b]   [0]
///
/// where the columns of C (D) are scalar constraints c^T x = 0 on the primal
/// (d^T y = 0 on the dual) unknowns, each carried by one Lagrange multiplier.
/// B may have zero rows.
struct SaddleSystem {
  SparseMatrix A;
  SparseMatrix B;
  Vector f;
  Vector g;
  std::vector<Vector> primal_constraints;
  std::vector<Vector> dual_constraints;

  Eigen::Index primal_size() const { return A.rows(); }
  Eigen::Index dual_size() const { return B.rows(); }
  Eigen::Index multiplier_count() const {
    return static_cast<Eigen::Index>(primal_constraints.size() + dual_constraints.size());
  }
  Eigen::Index total_size() const { return primal_size() + dual_size() + multiplier_count(); }

  /// Throws InputError when block dimensions disagree.
  void validate() const;
  SparseMatrix kkt_matrix() const;
};

struct SaddleSolution {
  Vector primal;
  Vector dual;
  Vector multipliers;
  double relative_residual = 0.0;
};

/// Factorization of a SaddleSystem's matrix, reusable for many right-hand
/// sides (sparse LU with partial pivoting).
class SaddleFactorization {
public:
  SaddleFactorization(const SaddleSystem& system, const SolverConfig& config = {});
  ~SaddleFactorization();
  SaddleFactorization(SaddleFactorization&&) noexcept;
  SaddleFactorization& operator=(SaddleFactorization&&) noexcept;

  SaddleSolution solve(const Vector& f, const Vector& g) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SaddleSolution solve_saddle(const SaddleSystem& system, const SolverConfig& config = {});

struct EigenPair {
  double value;
  Vector vector; ///< M-normalized
};

/// k smallest finite eigenvalues of A x = lambda M x, ascending, with A SPD
/// and M symmetric positive semidefinite. Directions in ker(M) (infinite
/// eigenvalues) never appear: the iteration works on (A - shift M)^{-1} M.
/// Returned vectors satisfy x_i^T M x_j = delta_ij.
std::vector<EigenPair> eig_smallest(const SparseMatrix& A, const SparseMatrix& M, int k,
                                    const SolverConfig& config = {});

/// Same with A only available through x -> (A - shift M)^{-1} x; the
/// operator must already include config.eigen_shift. No dense fallback.
using InverseOperator = std::function<Vector(const Vector&)>;
std::vector<EigenPair> eig_smallest(const InverseOperator& apply_inverse, const SparseMatrix& M,
                                    int k, const SolverConfig& config = {});

} // namespace ecrfem
