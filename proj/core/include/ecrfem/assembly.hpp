#pragma once

#include "ecrfem/fields.hpp"
#include "ecrfem/linsolve.hpp"

#include <functional>

namespace ecrfem {

/// Element matrices for every cell, computed in parallel into per-cell
/// slots (degree-4 rule).
std::vector<LocalMatrices> compute_local_matrices(const SimplexMesh& mesh);

/// (f, phi_i) for every kept dof of a scalar CR/ECR/P0 map. Piecewise
/// constant loads are integrated exactly, others with the degree-8 rule.
Vector load_vector(const SimplexMesh& mesh, const DofMap& dofs, const ScalarLoad& f);

/// Stiffness system of a CR/ECR Poisson problem with homogeneous Dirichlet
/// data (boundary facet dofs eliminated, all ECR bubbles kept).
struct PrimalSystem {
  SparseMatrix A;
  Vector rhs;
  std::shared_ptr<const DofMap> dofs;
};

PrimalSystem assemble_poisson(const SimplexMesh& mesh, const ScalarLoad& f, Family family);
inline PrimalSystem assemble_poisson_ecr(const SimplexMesh& mesh, const ScalarLoad& f) {
  return assemble_poisson(mesh, f, Family::ECR);
}

/// Block system plus the numberings of its primal and dual unknowns.
struct MixedSystem {
  SaddleSystem system;
  std::shared_ptr<const DofMap> primal_dofs;
  std::shared_ptr<const DofMap> dual_dofs;
};

/// RT0 x P0: (sigma, tau) + (u, div tau) = 0, (div sigma, v) = -(f, v).
MixedSystem assemble_mixed_poisson_rt(const SimplexMesh& mesh, const ScalarLoad& f);

/// (CR or ECR)^n x P0 Stokes; zero pressure mean via one multiplier.
MixedSystem assemble_stokes(const SimplexMesh& mesh, const VectorLoad& f, Family family);
inline MixedSystem assemble_stokes_ecr(const SimplexMesh& mesh, const VectorLoad& f) {
  return assemble_stokes(mesh, f, Family::ECR);
}

/// (RT0)^n x (P0)^n pseudostress system; the global trace mean of sigma is
/// fixed to zero by one multiplier. Primal index r * num_facets + facet.
MixedSystem assemble_pseudostress_rt(const SimplexMesh& mesh, const VectorLoad& f);

enum class NeumannForm { PrimalECR, PrimalCR, MixedRT };

/// Boundary flux g(x, outward unit normal).
using BoundaryFlux = std::function<double(const Vec& x, const Vec& normal)>;

/// Pure Neumann Poisson problem. Primal forms keep every facet dof and fix
/// the mean of u; the mixed form prescribes the facet averages of g as
/// boundary fluxes and fixes the mean of u. Throws InputError when
/// |int f + int g| exceeds 1e-10 relative to the data scale.
struct NeumannSystem {
  NeumannForm form;
  SaddleSystem system;
  std::shared_ptr<const DofMap> primal_dofs;
  Vector prescribed_flux;      ///< mixed form: flux per facet (boundary entries used)
  std::vector<int> free_facets;///< mixed form: facet of each primal unknown
};

NeumannSystem assemble_neumann(const SimplexMesh& mesh, const ScalarLoad& f, const BoundaryFlux& g,
                               NeumannForm form);

enum class MassKind { Full, Projected };

struct EigenSystem {
  SparseMatrix A;
  SparseMatrix M;
  std::shared_ptr<const DofMap> dofs;
};

/// Dirichlet stiffness with full mass (u, v) or projected mass
/// (Pi_0 u, Pi_0 v).
EigenSystem assemble_eigen(const SimplexMesh& mesh, Family family, MassKind mass);

/// Facet average of g per facet (boundary facets only, others 0).
Vector boundary_flux_averages(const SimplexMesh& mesh, const BoundaryFlux& g);

} // namespace ecrfem
