#pragma once

#include "ecrfem/analysis.hpp"
#include "ecrfem/problems.hpp"

namespace ecrfem {

/// One compared quantity of an identity check. `relative` divides by the
/// larger of the two compared norms (0/0 counts as 0 with a note).
struct ResidualEntry {
  std::string name;
  double absolute = 0.0;
  double relative = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct IdentityReport {
  std::string identity;
  int level = -1;
  std::vector<ResidualEntry> residuals;
  double max_normal_jump = 0.0; ///< relative to the field's max norm
  double jump_tolerance = 0.0;
  bool passed = true;
  std::vector<std::string> notes;

  void add(const std::string& name, double absolute, double scale, double tolerance);
  const ResidualEntry& residual(const std::string& name) const;
  /// One JSON object.
  std::string to_json() const;
};

struct IdentityOptions {
  double tolerance = 1e-9;       ///< relative L2 residuals
  double pointwise_tolerance = 1e-9;
  double jump_tolerance = 1e-10; ///< normal jump relative to the max norm
  double divergence_tolerance = 1e-11;
  double gauge_tolerance = 1e-10;
  double eigenvalue_tolerance = 1e-10;
  int level = -1;                ///< recorded in the report
  SolverConfig solver{};
};

/// Cellwise means. Analytic inputs use a degree-8 rule.
BrokenField project_p0(const BrokenField& field, int component = 0);
BrokenField project_p0(const SimplexMesh& mesh, const ScalarFunction& f, int degree = kLoadDegree);

/// Max over interior facet quadrature points of |[grad_NC u + p id] nu_E|
/// (all rows) divided by the max of |grad_NC u + p id| over the same points.
double max_normal_jump(const BrokenField& u, const BrokenField* pressure = nullptr);

/// The broken gradient of an ECR field (rows = components, optionally plus
/// p id) as an RT0 field, with facet fluxes read from the first incident
/// cell. Throws InputError when the relative normal jump exceeds
/// `jump_tolerance`.
RTField ecr_gradient_as_rt(const BrokenField& u, const BrokenField* pressure = nullptr,
                           double jump_tolerance = 1e-10);

/// RT0 mixed Poisson vs ECR Poisson: sigma = grad_NC u_ECR, u_RT = Pi_0 u_ECR.
/// The load must be piecewise constant.
IdentityReport check_poisson_identity(const SimplexMesh& mesh, const ScalarLoad& f,
                                      const IdentityOptions& options = {});

/// Pseudostress RT0 vs ECR Stokes, including the weak check
/// (u_RT - Pi_0 u_ECR, div tau) = (div_NC u_ECR, tr tau / n) for every RT
/// basis tensor tau.
IdentityReport check_stokes_identity(const SimplexMesh& mesh, const VectorLoad& f,
                                     const IdentityOptions& options = {});

/// RT0 mixed vs CR: sigma_RT = grad u_CR - (f_K / n)(x - mid(K)), compared at
/// every cell quadrature point.
IdentityReport check_marini_identity(const SimplexMesh& mesh, const ScalarLoad& f,
                                     const IdentityOptions& options = {});

/// 2D pseudostress RT0 vs CR Stokes:
///   sigma_RT = grad u_CR - (f_K / 2) (x - mid)^T + p_CR id,
///   u_RT = Pi_0 u_CR + (1/4) Pi_0[dev(f_K (x - mid)^T)(x - mid)].
IdentityReport check_cgs_identity(const SimplexMesh& mesh, const VectorLoad& f,
                                  const IdentityOptions& options = {});

/// Pi_0[dev(f (x - mid)^T)(x - mid)] on one cell for constant f, in closed
/// form and by quadrature.
Vec cgs_correction(const CellGeometry& g, const Vec& f);
Vec cgs_correction_quadrature(const CellGeometry& g, const Vec& f);

/// RT mixed eigenproblem vs projected-mass ECR: eigenvalues ascending and,
/// for simple eigenvalues, sigma_RT = grad_NC phi, u_RT = Pi_0 phi.
IdentityReport check_eigen_equivalence(const SimplexMesh& mesh, int k, const IdentityOptions& options = {});

/// First eigenpair on each mesh of a hierarchy: errors of grad_NC u_ECR
/// (full mass) and sigma_RT against the exact eigenfunction, and their
/// difference, plus eigenvalue errors.
ConvergenceTable eigen_error_comparison(const std::vector<SimplexMesh>& hierarchy, const ExactSolution& exact,
                                        const SolverConfig& solver = {});

} // namespace ecrfem
