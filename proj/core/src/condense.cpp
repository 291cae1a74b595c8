#include "ecrfem/condense.hpp"

#include "ecrfem/assembly.hpp"
#include "ecrfem/parallel.hpp"
#include "ecrfem/problems.hpp"

#include <cmath>

namespace ecrfem {

double solve_bubble_local(const CellGeometry& g, double f) {
  // phi_K has unit cell average.
  return solve_bubble_local_moment(g, f * g.measure);
}

double solve_bubble_local_moment(const CellGeometry& g, double load_moment) {
  return load_moment / bubble_energy(g);
}

CondensedSolution solve_ecr_condensed(const SimplexMesh& mesh, const ScalarLoad& f, const SolverConfig& config) {
  BrokenField cr = solve_poisson(mesh, f, Family::CR, config);
  const std::size_t nc = mesh.num_cells();
  const int n = mesh.dim();

  Vector bubble(static_cast<Eigen::Index>(nc));
  parallel_for(nc, [&](std::size_t c) {
    const auto& g = mesh.cell_geometry(c);
    if (f.is_piecewise_constant()) {
      bubble(c) = solve_bubble_local(g, f.cell_value(c));
      return;
    }
    double moment = 0.0;
    for (const auto& [x, w] : cell_points(g, kLoadDegree)) moment += w * f(c, x) * ecr_eval(g, x).values(n + 1);
    bubble(c) = solve_bubble_local_moment(g, moment);
  });

  // 1 - n lambda_j = phi_j + phi_K / (n+1), so the ECR cell coefficient
  // collects the bubble and the mean of the CR facet values.
  auto dofs = make_dofmap(mesh, Family::ECR, true);
  Vector coeffs = Vector::Zero(dofs->size());
  const auto& cr_dofs = cr.dofs();
  for (std::size_t f_ = 0; f_ < mesh.num_facets(); ++f_)
    if (dofs->facet_dofs[f_] >= 0) coeffs(dofs->facet_dofs[f_]) = cr.coefficients()(cr_dofs.facet_dofs[f_]);
  for (std::size_t c = 0; c < nc; ++c)
    coeffs(dofs->global(c, n + 1)) = bubble(c) + cr.local_coefficients(c).sum() / (n + 1);

  BrokenField ecr(mesh, dofs, std::move(coeffs));
  return {std::move(cr), std::move(bubble), std::move(ecr)};
}

CouplingReport hierarchical_coupling(const SimplexMesh& mesh) {
  const int n = mesh.dim();
  CouplingReport rep;
  double coupling = 0.0, top = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    DenseMatrix K = DenseMatrix::Zero(n + 2, n + 2); // CR basis then phi_K
    for (const auto& [x, w] : cell_points(g, 2)) {
      BasisGradients grads(n + 2, n);
      grads.topRows(n + 1) = cr_eval(g, x).gradients;
      grads.row(n + 1) = ecr_eval(g, x).gradients.row(n + 1);
      K += w * grads * grads.transpose();
    }
    top = std::max(top, K.cwiseAbs().maxCoeff());
    coupling = std::max(coupling, K.col(n + 1).head(n + 1).cwiseAbs().maxCoeff());
  }

  const auto sys = assemble_poisson(mesh, ScalarLoad::constant(0.0), Family::ECR);
  const int first_bubble = sys.dofs->size() - static_cast<int>(mesh.num_cells());
  double off = 0.0;
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it)
      if (it.row() >= first_bubble && it.col() >= first_bubble && it.row() != it.col())
        off = std::max(off, std::abs(it.value()));
  const double scale = sys.A.coeffs().cwiseAbs().maxCoeff();
  rep.bubble_p1 = top > 0.0 ? coupling / top : 0.0;
  rep.bubble_bubble = scale > 0.0 ? off / scale : 0.0;
  return rep;
}

} // namespace ecrfem
