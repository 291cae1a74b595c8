#pragma once

#include "ecrfem/assembly.hpp"

#include <optional>

namespace ecrfem {

/// Analytic solution u with gradient and load f = -Laplace(u).
struct ExactSolution {
  std::string label;
  std::function<double(const Vec&)> u;
  std::function<Vec(const Vec&)> gradient;
  std::function<double(const Vec&)> f;
  /// Dirichlet eigenvalue when u is an eigenfunction, else 0.
  double eigenvalue = 0.0;
};

/// prod_i sin(pi x_i) on the unit box, f = n pi^2 u.
ExactSolution sine_solution(int dim);
/// First Dirichlet eigenfunction of the unit box scaled to unit L2 norm,
/// 2^{n/2} prod_i sin(pi x_i), eigenvalue n pi^2.
ExactSolution box_eigenfunction(int dim);
/// x_1^2 + ... + x_n^2 with f = -2n.
ExactSolution paraboloid_solution(int dim);
/// The k smallest Dirichlet eigenvalues of the unit box, pi^2 (m_1^2 + ... + m_n^2),
/// with multiplicity.
std::vector<double> box_dirichlet_eigenvalues(int dim, int k);

BrokenField solve_poisson(const SimplexMesh& mesh, const ScalarLoad& f, Family family,
                          const SolverConfig& config = {});

struct MixedPoissonSolution {
  RTField sigma;
  BrokenField u; ///< P0
};

MixedPoissonSolution solve_poisson_mixed(const SimplexMesh& mesh, const ScalarLoad& f,
                                         const SolverConfig& config = {});

struct StokesSolution {
  BrokenField velocity; ///< n-component CR or ECR field
  BrokenField pressure; ///< P0, zero mean
};

StokesSolution solve_stokes(const SimplexMesh& mesh, const VectorLoad& f, Family family = Family::ECR,
                            const SolverConfig& config = {});

struct PseudostressSolution {
  RTField sigma;        ///< n rows, zero global trace mean
  BrokenField velocity; ///< (P0)^n
  double trace_multiplier = 0.0;
};

PseudostressSolution solve_stokes_mixed(const SimplexMesh& mesh, const VectorLoad& f,
                                        const SolverConfig& config = {});

struct NeumannSolution {
  NeumannForm form;
  BrokenField u;               ///< ECR/CR, or P0 for the mixed form; zero mean
  std::optional<RTField> sigma;///< mixed form only
};

NeumannSolution solve_neumann(const SimplexMesh& mesh, const ScalarLoad& f, const BoundaryFlux& g,
                              NeumannForm form, const SolverConfig& config = {});

enum class EigenFormulation { ECR, CR, RTMixed, RTEquiv };

std::string to_string(EigenFormulation formulation);
EigenFormulation parse_eigen_formulation(const std::string& name);

struct EigenMode {
  double value = 0.0;
  /// ECR/CR/RT-equiv: the primal eigenfunction; RT-mixed: u_RT in P0.
  BrokenField u;
  /// RT-mixed only.
  std::optional<RTField> sigma;
};

/// k smallest Dirichlet eigenpairs, ascending. ECR/CR eigenfunctions have
/// unit L2 norm; RT-equiv and RT-mixed fix the norm of the cellwise mean
/// (resp. u_RT) to one. Signs make the first cell average with magnitude
/// above 1e-3 of the largest one positive.
std::vector<EigenMode> solve_eigen(const SimplexMesh& mesh, EigenFormulation formulation, int k,
                                   const SolverConfig& config = {});

/// Cell averages of a field's component.
Vector cell_averages(const BrokenField& field, int component = 0);

} // namespace ecrfem
