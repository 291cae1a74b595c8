#pragma once

#include "ecrfem/mesh.hpp"
#include "ecrfem/quadrature.hpp"

#include <span>

namespace ecrfem {

// Shape functions are evaluated in physical coordinates from the cell's
// barycentric gradients. Local basis function j belongs to local facet j
// (the facet opposite vertex j); for ECR the last function is the bubble.
//
// ECR (avg-normalized, closed form):
//   phi_K = (n+2)/2 - n(n+1)^2(n+2)/(2H) |x - mid(K)|^2
//   phi_j = 1 - n lambda_j - phi_K / (n+1)
// CR: phi_j = 1 - n lambda_j.
// RT0: psi_i = s_i (x - a_i) / (n |K|), unit flux through E_i along nu_E.

using BasisValues = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;
using BasisGradients = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 5, 3>;

struct ScalarBasisEval {
  BasisValues values;       ///< one entry per basis function
  BasisGradients gradients; ///< row j = grad of basis function j
};

struct VectorBasisEval {
  BasisGradients values;   ///< row i = psi_i(x)
  BasisValues divergence;  ///< div psi_i (constant on the cell)
};

/// n(n+1)^2(n+2)/H, so that grad phi_K(x) = -scale * (x - mid(K)).
double bubble_gradient_scale(const CellGeometry& g);
/// int_K |x - mid(K)|^2 dx = |K| H / ((n+1)^2 (n+2)).
double centered_second_moment(const CellGeometry& g);
/// int_K (x - mid(K))(x - mid(K))^T dx = |K| / ((n+1)(n+2)) sum_i (a_i - M)(a_i - M)^T.
Mat centered_covariance(const CellGeometry& g);
/// ||grad phi_K||^2_{L2(K)}.
double bubble_energy(const CellGeometry& g);

ScalarBasisEval ecr_eval(const CellGeometry& g, const Vec& x);
ScalarBasisEval cr_eval(const CellGeometry& g, const Vec& x);
VectorBasisEval rt0_eval(const CellGeometry& g, std::span<const int> signs, const Vec& x);

/// Element matrices of one cell. Vector-valued indices for RT components
/// are flattened as i * n + r (basis i, component r).
struct LocalMatrices {
  DenseMatrix ecr_stiffness;          ///< (n+2)^2
  DenseMatrix ecr_mass;
  DenseMatrix ecr_projected_mass;     ///< (Pi_0 phi_i, Pi_0 phi_j)_K
  DenseMatrix cr_stiffness;           ///< (n+1)^2
  DenseMatrix cr_mass;
  DenseMatrix cr_projected_mass;
  Vector ecr_average;                 ///< cell averages of the ECR basis
  Vector cr_average;
  DenseMatrix ecr_gradient_integral;  ///< (n+2) x n, int_K grad phi_j
  DenseMatrix cr_gradient_integral;   ///< (n+1) x n
  DenseMatrix rt_mass;                ///< (n+1)^2
  Vector rt_divergence_integral;      ///< int_K div psi_i = s_i
  DenseMatrix rt_component_integral;  ///< (n+1) x n, int_K (psi_i)_r
  DenseMatrix rt_component_mass;      ///< int_K (psi_i)_r (psi_j)_s
};

/// Requires rule.exact_degree >= 4 (products of quadratics).
LocalMatrices local_matrices(const CellGeometry& g, std::span<const int> signs,
                             const QuadratureRule& rule);

} // namespace ecrfem
