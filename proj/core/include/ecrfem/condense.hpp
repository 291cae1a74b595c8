#pragma once

#include "ecrfem/fields.hpp"
#include "ecrfem/linsolve.hpp"

namespace ecrfem {

/// Static condensation of the ECR Poisson problem. In the hierarchical
/// splitting u_ECR = u_CR + sum_K b_K phi_K the bubbles decouple from the CR
/// part, so u_CR solves the CR problem and each b_K is a scalar local solve.
struct CondensedSolution {
  BrokenField cr_part;
  Vector bubble; ///< b_K per cell
  BrokenField ecr; ///< recombined, in the ECR basis of the elements module
};

/// b_K = (f, phi_K)_K / ||grad phi_K||^2_K for f constant on the cell.
double solve_bubble_local(const CellGeometry& g, double f);

/// Same with (f, phi_K)_K supplied (general loads).
double solve_bubble_local_moment(const CellGeometry& g, double load_moment);

CondensedSolution solve_ecr_condensed(const SimplexMesh& mesh, const ScalarLoad& f,
                                      const SolverConfig& config = {});

/// Largest |(grad q, grad phi_K)_K| over cells and P1 functions q in the
/// local CR basis, and the largest off-diagonal bubble-bubble entry, both
/// divided by the largest stiffness entry.
struct CouplingReport {
  double bubble_p1 = 0.0;
  double bubble_bubble = 0.0;
};

CouplingReport hierarchical_coupling(const SimplexMesh& mesh);

} // namespace ecrfem
