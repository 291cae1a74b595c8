#include "ecrfem/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ecrfem {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InputError("exact solutions are defined for dim 2 and 3");
}

ExactSolution scaled_sine(int dim, double scale, std::string label) {
  check_dim(dim);
  ExactSolution s;
  s.label = std::move(label);
  s.u = [dim, scale](const Vec& x) {
    double v = scale;
    for (int i = 0; i < dim; ++i) v *= std::sin(kPi * x(i));
    return v;
  };
  s.gradient = [dim, scale](const Vec& x) {
    Vec g(dim);
    for (int i = 0; i < dim; ++i) {
      double v = scale * kPi * std::cos(kPi * x(i));
      for (int j = 0; j < dim; ++j)
        if (j != i) v *= std::sin(kPi * x(j));
      g(i) = v;
    }
    return g;
  };
  const double lambda = dim * kPi * kPi;
  s.f = [u = s.u, lambda](const Vec& x) { return lambda * u(x); };
  s.eigenvalue = lambda;
  return s;
}

// Flip the sign so that the first clearly nonzero cell average is positive.
double sign_of(const Vector& averages) {
  const double top = averages.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < averages.size(); ++i)
    if (std::abs(averages(i)) > 1e-3 * top) return averages(i) > 0 ? 1.0 : -1.0;
  return 1.0;
}

Vector p0_mass(const SimplexMesh& mesh) {
  Vector m(static_cast<Eigen::Index>(mesh.num_cells()));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) m(c) = mesh.cell_geometry(c).measure;
  return m;
}

} // namespace

ExactSolution sine_solution(int dim) {
  auto s = scaled_sine(dim, 1.0, "sine" + std::to_string(dim) + "d");
  s.eigenvalue = 0.0;
  return s;
}

ExactSolution box_eigenfunction(int dim) {
  return scaled_sine(dim, std::pow(2.0, 0.5 * dim), "eigen" + std::to_string(dim) + "d");
}

ExactSolution paraboloid_solution(int dim) {
  check_dim(dim);
  ExactSolution s;
  s.label = "paraboloid";
  s.u = [](const Vec& x) { return x.squaredNorm(); };
  s.gradient = [](const Vec& x) { return Vec(2.0 * x); };
  s.f = [dim](const Vec&) { return -2.0 * dim; };
  return s;
}

std::vector<double> box_dirichlet_eigenvalues(int dim, int k) {
  check_dim(dim);
  if (k < 1) throw InputError("box_dirichlet_eigenvalues: k must be positive");
  const int m = k + 1;
  std::vector<double> all;
  for (int a = 1; a <= m; ++a)
    for (int b = 1; b <= m; ++b) {
      if (dim == 2) {
        all.push_back(kPi * kPi * (a * a + b * b));
        continue;
      }
      for (int c = 1; c <= m; ++c) all.push_back(kPi * kPi * (a * a + b * b + c * c));
    }
  std::sort(all.begin(), all.end());
  all.resize(k);
  return all;
}

BrokenField solve_poisson(const SimplexMesh& mesh, const ScalarLoad& f, Family family,
                          const SolverConfig& config) {
  auto sys = assemble_poisson(mesh, f, family);
  return BrokenField(mesh, sys.dofs, solve_spd(sys.A, sys.rhs, config));
}

MixedPoissonSolution solve_poisson_mixed(const SimplexMesh& mesh, const ScalarLoad& f,
                                         const SolverConfig& config) {
  auto sys = assemble_mixed_poisson_rt(mesh, f);
  auto sol = solve_saddle(sys.system, config);
  return {RTField(mesh, 1, std::move(sol.primal)), BrokenField(mesh, sys.dual_dofs, std::move(sol.dual))};
}

StokesSolution solve_stokes(const SimplexMesh& mesh, const VectorLoad& f, Family family,
                            const SolverConfig& config) {
  auto sys = assemble_stokes(mesh, f, family);
  auto sol = solve_saddle(sys.system, config);
  return {BrokenField(mesh, sys.primal_dofs, std::move(sol.primal)),
          BrokenField(mesh, sys.dual_dofs, std::move(sol.dual))};
}

PseudostressSolution solve_stokes_mixed(const SimplexMesh& mesh, const VectorLoad& f,
                                        const SolverConfig& config) {
  auto sys = assemble_pseudostress_rt(mesh, f);
  auto sol = solve_saddle(sys.system, config);
  return {RTField(mesh, mesh.dim(), std::move(sol.primal)), BrokenField(mesh, sys.dual_dofs, std::move(sol.dual)),
          sol.multipliers(0)};
}

NeumannSolution solve_neumann(const SimplexMesh& mesh, const ScalarLoad& f, const BoundaryFlux& g,
                              NeumannForm form, const SolverConfig& config) {
  auto sys = assemble_neumann(mesh, f, g, form);
  auto sol = solve_saddle(sys.system, config);
  if (form != NeumannForm::MixedRT)
    return {form, BrokenField(mesh, sys.primal_dofs, std::move(sol.primal)), std::nullopt};
  Vector flux = sys.prescribed_flux;
  for (std::size_t i = 0; i < sys.free_facets.size(); ++i) flux(sys.free_facets[i]) = sol.primal(i);
  return {form, BrokenField(mesh, make_dofmap(mesh, Family::P0, false), std::move(sol.dual)),
          RTField(mesh, 1, std::move(flux))};
}

std::string to_string(EigenFormulation formulation) {
  switch (formulation) {
  case EigenFormulation::ECR: return "ecr";
  case EigenFormulation::CR: return "cr";
  case EigenFormulation::RTMixed: return "rt-mixed";
  case EigenFormulation::RTEquiv: return "rt-equiv";
  }
  return "?";
}

EigenFormulation parse_eigen_formulation(const std::string& name) {
  if (name == "ecr") return EigenFormulation::ECR;
  if (name == "cr") return EigenFormulation::CR;
  if (name == "rt-mixed" || name == "rt") return EigenFormulation::RTMixed;
  if (name == "rt-equiv") return EigenFormulation::RTEquiv;
  throw InputError("unknown eigen formulation '" + name + "'");
}

Vector cell_averages(const BrokenField& field, int component) {
  Vector a(static_cast<Eigen::Index>(field.mesh().num_cells()));
  for (std::size_t c = 0; c < field.mesh().num_cells(); ++c) a(c) = field.cell_average(c, component);
  return a;
}

std::vector<EigenMode> solve_eigen(const SimplexMesh& mesh, EigenFormulation formulation, int k,
                                   const SolverConfig& config) {
  if (k < 1) throw InputError("solve_eigen: k must be positive");
  std::vector<EigenMode> out;

  if (formulation != EigenFormulation::RTMixed) {
    const Family family = formulation == EigenFormulation::CR ? Family::CR : Family::ECR;
    const MassKind mass = formulation == EigenFormulation::RTEquiv ? MassKind::Projected : MassKind::Full;
    auto sys = assemble_eigen(mesh, family, mass);
    for (auto& pair : eig_smallest(sys.A, sys.M, k, config)) {
      BrokenField u(mesh, sys.dofs, pair.vector);
      const double s = sign_of(cell_averages(u));
      out.push_back({pair.value, BrokenField(mesh, sys.dofs, s * pair.vector), std::nullopt});
    }
    return out;
  }

  // Eliminating sigma leaves S u = lambda M0 u with S = B M^{-1} B^T and M0
  // the P0 mass; S^{-1} y is the dual part of the saddle solve with g = -y.
  auto sys = assemble_mixed_poisson_rt(mesh, ScalarLoad::constant(0.0));
  const Vector m0 = p0_mass(mesh);
  SparseMatrix M0(m0.size(), m0.size());
  M0.reserve(Eigen::VectorXi::Constant(m0.size(), 1));
  for (Eigen::Index i = 0; i < m0.size(); ++i) M0.insert(i, i) = m0(i);
  M0.makeCompressed();

  const SaddleFactorization lu(sys.system, config);
  const Vector zero_primal = Vector::Zero(sys.system.primal_size());
  auto apply_inverse = [&](const Vector& y) -> Vector { return lu.solve(zero_primal, -y).dual; };

  SolverConfig cfg = config;
  if (cfg.eigen_shift != 0.0) throw InputError("solve_eigen: rt-mixed does not support a shift");
  for (auto& pair : eig_smallest(apply_inverse, M0, k, cfg)) {
    const double s = sign_of(pair.vector);
    Vector u = s * pair.vector;
    // The saddle solve with g = -lambda M0 u returns (sigma, u).
    auto sol = lu.solve(zero_primal, -pair.value * m0.cwiseProduct(u));
    out.push_back({pair.value, BrokenField(mesh, sys.dual_dofs, std::move(u)),
                   RTField(mesh, 1, std::move(sol.primal))});
  }
  return out;
}

} // namespace ecrfem
