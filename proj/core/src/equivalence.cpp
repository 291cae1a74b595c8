#include "ecrfem/equivalence.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecrfem {

namespace {

constexpr double kClosedFormTolerance = 1e-12;

void require_piecewise_constant(const ScalarLoad& f, const char* who) {
  if (!f.is_piecewise_constant())
    throw InputError(std::string(who) + ": the load must be piecewise constant");
}

void require_piecewise_constant(const VectorLoad& f, int dim, const char* who) {
  if (static_cast<int>(f.size()) != dim) throw InputError(std::string(who) + ": load needs one entry per component");
  for (const auto& fr : f) require_piecewise_constant(fr, who);
}

Vec cell_load(const VectorLoad& f, std::size_t c) {
  Vec v(static_cast<int>(f.size()));
  for (std::size_t r = 0; r < f.size(); ++r) v(r) = f[r].cell_value(c);
  return v;
}

// Row r of grad_NC u + p id on a cell.
Vec stress_row(const BrokenField& u, const BrokenField* p, std::size_t c, const Vec& x, int r) {
  Vec t = u.gradient(c, x, r);
  if (p) t(r) += p->cell_average(c);
  return t;
}

double p0_l2(const SimplexMesh& mesh, const Vector& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) s += mesh.cell_geometry(c).measure * v(c) * v(c);
  return std::sqrt(s);
}

} // namespace

void IdentityReport::add(const std::string& name, double absolute, double scale, double tolerance) {
  ResidualEntry e{name, absolute, 0.0, tolerance, true};
  if (scale > 0.0) {
    e.relative = absolute / scale;
  } else if (absolute == 0.0) {
    notes.push_back(name + ": both compared quantities vanish (0/0 counted as 0)");
  } else {
    e.relative = std::numeric_limits<double>::infinity();
  }
  e.passed = e.relative <= tolerance;
  passed = passed && e.passed;
  residuals.push_back(e);
}

const ResidualEntry& IdentityReport::residual(const std::string& name) const {
  for (const auto& r : residuals)
    if (r.name == name) return r;
  throw InputError("IdentityReport: no residual named '" + name + "'");
}

std::string IdentityReport::to_json() const {
  nlohmann::json j;
  j["identity"] = identity;
  j["level"] = level;
  j["passed"] = passed;
  j["max_normal_jump"] = max_normal_jump;
  j["jump_tolerance"] = jump_tolerance;
  j["residuals"] = nlohmann::json::array();
  for (const auto& r : residuals)
    j["residuals"].push_back({{"name", r.name},
                              {"absolute", r.absolute},
                              {"relative", r.relative},
                              {"tolerance", r.tolerance},
                              {"passed", r.passed}});
  j["notes"] = notes;
  return j.dump();
}

BrokenField project_p0(const BrokenField& field, int component) {
  const auto& mesh = field.mesh();
  return BrokenField(mesh, make_dofmap(mesh, Family::P0, false), cell_averages(field, component));
}

BrokenField project_p0(const SimplexMesh& mesh, const ScalarFunction& f, int degree) {
  Vector avg(static_cast<Eigen::Index>(mesh.num_cells()));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    double s = 0.0;
    for (const auto& [x, w] : cell_points(g, degree)) s += w * f(x);
    avg(c) = s / g.measure;
  }
  return BrokenField(mesh, make_dofmap(mesh, Family::P0, false), std::move(avg));
}

double max_normal_jump(const BrokenField& u, const BrokenField* pressure) {
  const auto& mesh = u.mesh();
  double jump = 0.0, top = 0.0;
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const auto cells = mesh.facet_cells(f);
    const auto& fg = mesh.facet_geometry(f);
    for (const auto& [x, w] : facet_points(fg, 2)) {
      for (int r = 0; r < u.components(); ++r) {
        const Vec a = stress_row(u, pressure, cells[0], x, r);
        top = std::max(top, a.norm());
        if (cells[1] < 0) continue;
        const Vec b = stress_row(u, pressure, cells[1], x, r);
        top = std::max(top, b.norm());
        jump = std::max(jump, std::abs((a - b).dot(fg.normal)));
      }
    }
  }
  return top > 0.0 ? jump / top : 0.0;
}

RTField ecr_gradient_as_rt(const BrokenField& u, const BrokenField* pressure, double jump_tolerance) {
  if (u.family() != Family::ECR && u.family() != Family::CR)
    throw InputError("ecr_gradient_as_rt: needs an ECR or CR field");
  const double jump = max_normal_jump(u, pressure);
  if (!(jump <= jump_tolerance))
    throw InputError("ecr_gradient_as_rt: normal jump " + format_double(jump) + " exceeds tolerance " +
                     format_double(jump_tolerance) + "; the field is not in H(div)");
  const auto& mesh = u.mesh();
  const auto nf = static_cast<Eigen::Index>(mesh.num_facets());
  const int rows = u.components();
  Vector flux(rows * nf);
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const auto& fg = mesh.facet_geometry(f);
    const int c = mesh.facet_cells(f)[0];
    // The normal component is constant on the facet.
    for (int r = 0; r < rows; ++r)
      flux(r * nf + f) = fg.measure * stress_row(u, pressure, c, fg.centroid, r).dot(fg.normal);
  }
  return RTField(mesh, rows, std::move(flux));
}

IdentityReport check_poisson_identity(const SimplexMesh& mesh, const ScalarLoad& f, const IdentityOptions& options) {
  require_piecewise_constant(f, "check_poisson_identity");
  IdentityReport rep;
  rep.identity = "poisson_ecr_rt";
  rep.level = options.level;
  rep.jump_tolerance = options.jump_tolerance;

  const auto u = solve_poisson(mesh, f, Family::ECR, options.solver);
  const auto mixed = solve_poisson_mixed(mesh, f, options.solver);

  rep.add("sigma", rt_gradient_difference(mixed.sigma, u),
          std::max(rt_norm(mixed.sigma), broken_h1_norm(u)), options.tolerance);

  const Vector pu = cell_averages(u);
  const Vector& urt = mixed.u.coefficients();
  rep.add("u", p0_l2(mesh, urt - pu), std::max(p0_l2(mesh, urt), p0_l2(mesh, pu)), options.tolerance);

  rep.max_normal_jump = max_normal_jump(u);
  if (!(rep.max_normal_jump <= options.jump_tolerance)) {
    rep.passed = false;
    rep.notes.push_back("normal jump of the broken gradient exceeds tolerance");
  }

  const auto grad_rt = ecr_gradient_as_rt(u, nullptr, std::numeric_limits<double>::infinity());
  double div_res = 0.0, div_scale = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double d = grad_rt.divergence(c), fk = f.cell_value(c);
    div_res = std::max(div_res, std::abs(d + fk));
    div_scale = std::max({div_scale, std::abs(d), std::abs(fk)});
  }
  rep.add("divergence", div_res, div_scale, options.divergence_tolerance);
  return rep;
}

IdentityReport check_stokes_identity(const SimplexMesh& mesh, const VectorLoad& f, const IdentityOptions& options) {
  const int n = mesh.dim();
  require_piecewise_constant(f, n, "check_stokes_identity");
  IdentityReport rep;
  rep.identity = "stokes_ecr_rt";
  rep.level = options.level;
  rep.jump_tolerance = options.jump_tolerance;

  const auto ecr = solve_stokes(mesh, f, Family::ECR, options.solver);
  const auto rt = solve_stokes_mixed(mesh, f, options.solver);
  const auto& u = ecr.velocity;
  const auto& p = ecr.pressure;
  const double area = mesh.total_measure();

  // Gauge: shift both tensors by a multiple of id to zero trace mean.
  double trace_primal = 0.0, trace_rt = 0.0, norm_primal = 0.0, norm_rt = 0.0, diff = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), kMatrixDegree))
      for (int r = 0; r < n; ++r) {
        trace_primal += w * stress_row(u, &p, c, x, r)(r);
        trace_rt += w * rt.sigma.value(c, x, r)(r);
      }
  const double shift_primal = trace_primal / (n * area), shift_rt = trace_rt / (n * area);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), kMatrixDegree))
      for (int r = 0; r < n; ++r) {
        Vec a = stress_row(u, &p, c, x, r), b = rt.sigma.value(c, x, r);
        a(r) -= shift_primal;
        b(r) -= shift_rt;
        norm_primal += w * a.squaredNorm();
        norm_rt += w * b.squaredNorm();
        diff += w * (a - b).squaredNorm();
      }
  rep.add("tensor", std::sqrt(diff), std::max(std::sqrt(norm_primal), std::sqrt(norm_rt)), options.tolerance);
  rep.add("gauge_shift", std::abs(shift_primal), std::sqrt(norm_primal / area), options.gauge_tolerance);

  // Weak relation against every RT basis tensor tau = e_r psi_F^T.
  const auto nc = static_cast<Eigen::Index>(mesh.num_cells());
  DenseMatrix e(n, nc);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (int r = 0; r < n; ++r) e(r, c) = rt.velocity.cell_average(c, r) - u.cell_average(c, r);
  const auto nf = mesh.num_facets();
  std::vector<double> res(n * nf, 0.0), scale(n * nf, 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    const auto facets = mesh.cell_facets(c);
    const auto signs = mesh.cell_facet_signs(c);
    const auto pts = cell_points(g, kMatrixDegree);
    double div_sq = 0.0;
    for (const auto& [x, w] : pts) div_sq += w * std::pow(u.divergence(c, x), 2);
    for (int i = 0; i <= n; ++i)
      for (int r = 0; r < n; ++r) {
        double tr_int = 0.0, tr_sq = 0.0;
        for (const auto& [x, w] : pts) {
          const double psi_r = rt0_eval(g, signs, x).values(i, r);
          tr_int += w * u.divergence(c, x) * psi_r;
          tr_sq += w * psi_r * psi_r;
        }
        const std::size_t k = r * nf + facets[i];
        res[k] += e(r, c) * signs[i] - tr_int / n;
        scale[k] += std::abs(e(r, c)) + std::sqrt(div_sq * tr_sq) / n;
      }
  }
  const double top_scale = *std::max_element(scale.begin(), scale.end());
  double worst_abs = 0.0, worst_rel = 0.0;
  for (std::size_t k = 0; k < res.size(); ++k) {
    worst_abs = std::max(worst_abs, std::abs(res[k]));
    // Patches where both sides vanish to roundoff are measured against a floor.
    const double s = std::max(scale[k], 1e-12 * top_scale);
    if (s > 0.0) worst_rel = std::max(worst_rel, std::abs(res[k]) / s);
  }
  ResidualEntry weak{"weak_relation", worst_abs, worst_rel, options.tolerance, worst_rel <= options.tolerance};
  rep.passed = rep.passed && weak.passed;
  rep.residuals.push_back(weak);

  double mean_div = 0.0, grad_top = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec& m = mesh.cell_geometry(c).centroid;
    mean_div = std::max(mean_div, std::abs(u.divergence(c, m)));
    grad_top = std::max(grad_top, u.gradient_tensor(c, m).norm());
  }
  rep.add("mean_divergence", mean_div, grad_top, options.divergence_tolerance);

  rep.max_normal_jump = max_normal_jump(u, &p);
  if (!(rep.max_normal_jump <= options.jump_tolerance)) {
    rep.passed = false;
    rep.notes.push_back("normal jump of grad_NC u + p id exceeds tolerance");
  }
  return rep;
}

IdentityReport check_marini_identity(const SimplexMesh& mesh, const ScalarLoad& f, const IdentityOptions& options) {
  require_piecewise_constant(f, "check_marini_identity");
  const int n = mesh.dim();
  IdentityReport rep;
  rep.identity = "marini";
  rep.level = options.level;

  const auto cr = solve_poisson(mesh, f, Family::CR, options.solver);
  const auto rt = solve_poisson_mixed(mesh, f, options.solver);
  double max_res = 0.0, max_val = 0.0, l2_res = 0.0, l2_a = 0.0, l2_b = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    const double fk = f.cell_value(c);
    for (const auto& [x, w] : cell_points(g, kMatrixDegree)) {
      const Vec a = rt.sigma.value(c, x);
      const Vec b = cr.gradient(c, x) - (fk / n) * (x - g.centroid);
      max_res = std::max(max_res, (a - b).norm());
      max_val = std::max({max_val, a.norm(), b.norm()});
      l2_res += w * (a - b).squaredNorm();
      l2_a += w * a.squaredNorm();
      l2_b += w * b.squaredNorm();
    }
  }
  rep.add("pointwise", max_res, max_val, options.pointwise_tolerance);
  rep.add("l2", std::sqrt(l2_res), std::sqrt(std::max(l2_a, l2_b)), options.tolerance);
  return rep;
}

Vec cgs_correction(const CellGeometry& g, const Vec& f) {
  // dev(f y^T) y = f |y|^2 - (f . y) y / n.
  return (centered_second_moment(g) * f - centered_covariance(g) * f / g.dim) / g.measure;
}

Vec cgs_correction_quadrature(const CellGeometry& g, const Vec& f) {
  Vec s = Vec::Zero(g.dim);
  for (const auto& [x, w] : cell_points(g, kMatrixDegree)) {
    const Vec y = x - g.centroid;
    const Mat t = f * y.transpose();
    const Mat dev = t - (t.trace() / g.dim) * Mat::Identity(g.dim, g.dim);
    s += w * (dev * y);
  }
  return s / g.measure;
}

IdentityReport check_cgs_identity(const SimplexMesh& mesh, const VectorLoad& f, const IdentityOptions& options) {
  if (mesh.dim() != 2) throw InputError("check_cgs_identity: two-dimensional meshes only");
  const int n = 2;
  require_piecewise_constant(f, n, "check_cgs_identity");
  IdentityReport rep;
  rep.identity = "cgs";
  rep.level = options.level;

  const auto cr = solve_stokes(mesh, f, Family::CR, options.solver);
  const auto rt = solve_stokes_mixed(mesh, f, options.solver);
  const auto& u = cr.velocity;
  const auto& p = cr.pressure;
  const double area = mesh.total_measure();

  auto primal_row = [&](std::size_t c, const Vec& x, int r) {
    const auto& g = mesh.cell_geometry(c);
    Vec t = stress_row(u, &p, c, x, r);
    t -= 0.5 * f[r].cell_value(c) * (x - g.centroid);
    return t;
  };

  double trace_a = 0.0, trace_b = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), kMatrixDegree))
      for (int r = 0; r < n; ++r) {
        trace_a += w * rt.sigma.value(c, x, r)(r);
        trace_b += w * primal_row(c, x, r)(r);
      }
  const double shift_a = trace_a / (n * area), shift_b = trace_b / (n * area);

  double max_res = 0.0, max_val = 0.0, l2_res = 0.0, l2_a = 0.0, l2_b = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), kMatrixDegree))
      for (int r = 0; r < n; ++r) {
        Vec a = rt.sigma.value(c, x, r), b = primal_row(c, x, r);
        a(r) -= shift_a;
        b(r) -= shift_b;
        max_res = std::max(max_res, (a - b).norm());
        max_val = std::max({max_val, a.norm(), b.norm()});
        l2_res += w * (a - b).squaredNorm();
        l2_a += w * a.squaredNorm();
        l2_b += w * b.squaredNorm();
      }
  rep.add("tensor_pointwise", max_res, max_val, options.pointwise_tolerance);
  rep.add("tensor_l2", std::sqrt(l2_res), std::sqrt(std::max(l2_a, l2_b)), options.tolerance);

  double v_res = 0.0, v_val = 0.0, v_l2 = 0.0, v_a = 0.0, v_b = 0.0, cf_res = 0.0, cf_val = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& g = mesh.cell_geometry(c);
    const Vec fk = cell_load(f, c);
    const Vec corr = cgs_correction(g, fk);
    const Vec corr_q = cgs_correction_quadrature(g, fk);
    cf_res = std::max(cf_res, (corr - corr_q).norm());
    cf_val = std::max({cf_val, corr.norm(), corr_q.norm()});
    for (int r = 0; r < n; ++r) {
      const double a = rt.velocity.cell_average(c, r);
      const double b = u.cell_average(c, r) + 0.25 * corr(r);
      v_res = std::max(v_res, std::abs(a - b));
      v_val = std::max({v_val, std::abs(a), std::abs(b)});
      v_l2 += g.measure * (a - b) * (a - b);
      v_a += g.measure * a * a;
      v_b += g.measure * b * b;
    }
  }
  rep.add("velocity_pointwise", v_res, v_val, options.pointwise_tolerance);
  rep.add("velocity_l2", std::sqrt(v_l2), std::sqrt(std::max(v_a, v_b)), options.tolerance);
  rep.add("correction_closed_form", cf_res, cf_val, kClosedFormTolerance);
  return rep;
}

IdentityReport check_eigen_equivalence(const SimplexMesh& mesh, int k, const IdentityOptions& options) {
  if (k < 1) throw InputError("check_eigen_equivalence: k must be positive");
  IdentityReport rep;
  rep.identity = "eigen_ecr_rt";
  rep.level = options.level;

  // One extra pair, when available, to detect a multiple k-th eigenvalue.
  const int nc = static_cast<int>(mesh.num_cells());
  const int requested = std::min(k + 1, nc);
  if (k > nc) throw InputError("check_eigen_equivalence: k exceeds the number of finite eigenvalues");
  const auto mixed = solve_eigen(mesh, EigenFormulation::RTMixed, requested, options.solver);
  const auto equiv = solve_eigen(mesh, EigenFormulation::RTEquiv, requested, options.solver);

  const Vector m0 = [&] {
    Vector m(nc);
    for (int c = 0; c < nc; ++c) m(c) = mesh.cell_geometry(c).measure;
    return m;
  }();

  for (int j = 0; j < k; ++j) {
    const std::string tag = std::to_string(j + 1);
    const double a = mixed[j].value, b = equiv[j].value;
    rep.add("lambda_" + tag, std::abs(a - b), std::max(std::abs(a), std::abs(b)), options.eigenvalue_tolerance);

    auto gap = [&](int i) { return std::abs(equiv[i].value - b) / std::abs(b); };
    const bool simple = (j == 0 || gap(j - 1) > 1e-6) && (j + 1 >= requested || gap(j + 1) > 1e-6);
    if (!simple) {
      rep.notes.push_back("eigenvalue " + tag + " is multiple; vector comparison skipped");
      continue;
    }
    const Vector pu = cell_averages(equiv[j].u);
    const Vector& urt = mixed[j].u.coefficients();
    const double s = (urt.cwiseProduct(m0)).dot(pu) >= 0.0 ? 1.0 : -1.0;
    const RTField sigma(mesh, 1, s * mixed[j].sigma->fluxes());
    rep.add("sigma_" + tag, rt_gradient_difference(sigma, equiv[j].u),
            std::max(rt_norm(sigma), broken_h1_norm(equiv[j].u)), options.tolerance);
    rep.add("u_" + tag, p0_l2(mesh, s * urt - pu), std::max(p0_l2(mesh, urt), p0_l2(mesh, pu)), options.tolerance);
  }
  return rep;
}

ConvergenceTable eigen_error_comparison(const std::vector<SimplexMesh>& hierarchy, const ExactSolution& exact,
                                        const SolverConfig& solver) {
  if (exact.eigenvalue <= 0.0) throw InputError("eigen_error_comparison: exact solution is not an eigenpair");
  ConvergenceTable table;
  table.add_note("first eigenpair; u_ECR with unit L2 norm, sigma_RT with unit norm of u_RT");
  table.add_note("quadrature degree " + std::to_string(kLoadDegree) + "; eigen tolerance " +
                 format_double(solver.eigen_tolerance));
  using K = ConvergenceTable::Kind;
  table.declare("cells", K::Count);
  table.declare("dofs_ecr", K::Count);
  table.declare("dofs_rt", K::Count);
  table.declare("lambda_ecr", K::Value);
  table.declare("lambda_rt", K::Value);
  table.declare("lambda_ecr_error", K::Error);
  table.declare("lambda_rt_error", K::Error);
  table.declare("grad_error_ecr", K::Error);
  table.declare("grad_error_rt", K::Error);
  table.declare("ecr_rt_difference", K::Error);
  for (std::size_t l = 0; l < hierarchy.size(); ++l) {
    const auto& mesh = hierarchy[l];
    const auto ecr = solve_eigen(mesh, EigenFormulation::ECR, 1, solver);
    const auto rt = solve_eigen(mesh, EigenFormulation::RTMixed, 1, solver);
    table.add_level(static_cast<int>(l), mesh.h());
    table.set("cells", static_cast<double>(mesh.num_cells()));
    table.set("dofs_ecr", ecr[0].u.dofs().size());
    table.set("dofs_rt", static_cast<double>(mesh.num_facets() + mesh.num_cells()));
    table.set("lambda_ecr", ecr[0].value);
    table.set("lambda_rt", rt[0].value);
    table.set("lambda_ecr_error", std::abs(ecr[0].value - exact.eigenvalue));
    table.set("lambda_rt_error", std::abs(rt[0].value - exact.eigenvalue));
    table.set("grad_error_ecr", broken_h1_error(ecr[0].u, exact.gradient));
    table.set("grad_error_rt", rt_error(*rt[0].sigma, exact.gradient));
    table.set("ecr_rt_difference", rt_gradient_difference(*rt[0].sigma, ecr[0].u));
  }
  return table;
}

} // namespace ecrfem
