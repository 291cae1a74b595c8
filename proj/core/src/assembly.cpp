#include "ecrfem/assembly.hpp"

#include "ecrfem/parallel.hpp"

#include <cmath>

namespace ecrfem {

namespace {

const DenseMatrix& pick(const LocalMatrices& L, Family family, bool stiffness) {
  if (family == Family::CR) return stiffness ? L.cr_stiffness : L.cr_mass;
  return stiffness ? L.ecr_stiffness : L.ecr_mass;
}

void scatter(std::vector<Triplet>& t, const DofMap& dofs, std::size_t c, const DenseMatrix& local,
             int component = 0) {
  for (int i = 0; i < local.rows(); ++i) {
    const int gi = dofs.global(c, i, component);
    if (gi < 0) continue;
    for (int j = 0; j < local.cols(); ++j) {
      const int gj = dofs.global(c, j, component);
      if (gj >= 0) t.emplace_back(gi, gj, local(i, j));
    }
  }
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& t) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

void require_nonempty(const SimplexMesh& mesh) {
  if (mesh.num_cells() == 0) throw InputError("assembly: empty mesh");
}

double integrate_cell(const SimplexMesh& mesh, std::size_t c, const ScalarLoad& f) {
  const auto& g = mesh.cell_geometry(c);
  if (f.is_piecewise_constant()) return f.cell_value(c) * g.measure;
  double s = 0.0;
  for (const auto& [x, w] : cell_points(g, kLoadDegree)) s += w * f(c, x);
  return s;
}

} // namespace

std::vector<LocalMatrices> compute_local_matrices(const SimplexMesh& mesh) {
  const auto& rule = rule_for_degree(mesh.dim(), kMatrixDegree);
  std::vector<LocalMatrices> out(mesh.num_cells());
  parallel_for(mesh.num_cells(), [&](std::size_t c) {
    out[c] = local_matrices(mesh.cell_geometry(c), mesh.cell_facet_signs(c), rule);
  });
  return out;
}

Vector load_vector(const SimplexMesh& mesh, const DofMap& dofs, const ScalarLoad& f) {
  if (dofs.family == Family::RT0) throw InputError("load_vector: RT0 has no scalar load");
  const std::size_t nc = mesh.num_cells();
  std::vector<BasisValues> local(nc);
  parallel_for(nc, [&](std::size_t c) {
    const auto& g = mesh.cell_geometry(c);
    BasisValues l = BasisValues::Zero(dofs.local_size);
    if (dofs.family == Family::P0) {
      l(0) = integrate_cell(mesh, c, f);
    } else if (f.is_piecewise_constant()) {
      // avg_K phi_j = 0 and avg_K phi_K = 1 (ECR); 1/(n+1) (CR).
      const double fk = f.cell_value(c) * g.measure;
      if (dofs.family == Family::ECR)
        l(g.dim + 1) = fk;
      else
        l.setConstant(fk / (g.dim + 1));
    } else {
      for (const auto& [x, w] : cell_points(g, kLoadDegree)) {
        const double fx = w * f(c, x);
        l += fx * (dofs.family == Family::ECR ? ecr_eval(g, x).values : cr_eval(g, x).values);
      }
    }
    local[c] = l;
  });
  Vector b = Vector::Zero(dofs.scalar_size);
  for (std::size_t c = 0; c < nc; ++c)
    for (int i = 0; i < dofs.local_size; ++i) {
      const int gi = dofs.global(c, i);
      if (gi >= 0) b(gi) += local[c](i);
    }
  return b;
}

PrimalSystem assemble_poisson(const SimplexMesh& mesh, const ScalarLoad& f, Family family) {
  require_nonempty(mesh);
  if (family != Family::CR && family != Family::ECR) throw InputError("assemble_poisson: CR or ECR only");
  PrimalSystem out;
  out.dofs = make_dofmap(mesh, family, true);
  const auto L = compute_local_matrices(mesh);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) scatter(t, *out.dofs, c, pick(L[c], family, true));
  out.A = from_triplets(out.dofs->size(), out.dofs->size(), t);
  out.rhs = load_vector(mesh, *out.dofs, f);
  return out;
}

MixedSystem assemble_mixed_poisson_rt(const SimplexMesh& mesh, const ScalarLoad& f) {
  require_nonempty(mesh);
  MixedSystem out;
  out.primal_dofs = make_dofmap(mesh, Family::RT0, false);
  out.dual_dofs = make_dofmap(mesh, Family::P0, false);
  const auto L = compute_local_matrices(mesh);
  const auto nf = static_cast<Eigen::Index>(mesh.num_facets());
  const auto nc = static_cast<Eigen::Index>(mesh.num_cells());
  std::vector<Triplet> ta, tb;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    scatter(ta, *out.primal_dofs, c, L[c].rt_mass);
    const auto facets = mesh.cell_facets(c);
    for (std::size_t i = 0; i < facets.size(); ++i)
      tb.emplace_back(static_cast<int>(c), facets[i], L[c].rt_divergence_integral(i));
  }
  auto& s = out.system;
  s.A = from_triplets(nf, nf, ta);
  s.B = from_triplets(nc, nf, tb);
  s.f = Vector::Zero(nf);
  s.g = -load_vector(mesh, *out.dual_dofs, f);
  return out;
}

MixedSystem assemble_stokes(const SimplexMesh& mesh, const VectorLoad& f, Family family) {
  require_nonempty(mesh);
  const int n = mesh.dim();
  if (static_cast<int>(f.size()) != n) throw InputError("assemble_stokes: load needs n components");
  if (family != Family::CR && family != Family::ECR) throw InputError("assemble_stokes: CR or ECR only");
  MixedSystem out;
  out.primal_dofs = make_dofmap(mesh, family, true, n);
  out.dual_dofs = make_dofmap(mesh, Family::P0, false);
  const auto scalar = make_dofmap(mesh, family, true);
  const auto L = compute_local_matrices(mesh);
  const auto nv = static_cast<Eigen::Index>(out.primal_dofs->size());
  const auto nc = static_cast<Eigen::Index>(mesh.num_cells());

  std::vector<Triplet> ta, tb;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const DenseMatrix& K = pick(L[c], family, true);
    const DenseMatrix& G = family == Family::ECR ? L[c].ecr_gradient_integral : L[c].cr_gradient_integral;
    for (int r = 0; r < n; ++r) {
      scatter(ta, *out.primal_dofs, c, K, r);
      for (int j = 0; j < G.rows(); ++j) {
        const int gj = out.primal_dofs->global(c, j, r);
        if (gj >= 0) tb.emplace_back(static_cast<int>(c), gj, G(j, r));
      }
    }
  }
  auto& s = out.system;
  s.A = from_triplets(nv, nv, ta);
  s.B = from_triplets(nc, nv, tb);
  s.f = Vector::Zero(nv);
  for (int r = 0; r < n; ++r) s.f.segment(r * scalar->size(), scalar->size()) = load_vector(mesh, *scalar, f[r]);
  s.g = Vector::Zero(nc);
  Vector mean(nc);
  for (Eigen::Index c = 0; c < nc; ++c) mean(c) = mesh.cell_geometry(c).measure;
  s.dual_constraints.push_back(mean);
  return out;
}

MixedSystem assemble_pseudostress_rt(const SimplexMesh& mesh, const VectorLoad& f) {
  require_nonempty(mesh);
  const int n = mesh.dim();
  if (static_cast<int>(f.size()) != n) throw InputError("assemble_pseudostress_rt: load needs n components");
  MixedSystem out;
  out.primal_dofs = make_dofmap(mesh, Family::RT0, false, n);
  out.dual_dofs = make_dofmap(mesh, Family::P0, false, n);
  const auto L = compute_local_matrices(mesh);
  const auto nf = static_cast<Eigen::Index>(mesh.num_facets());
  const auto nc = static_cast<Eigen::Index>(mesh.num_cells());
  const Eigen::Index np = n * nf, nd = n * nc;

  std::vector<Triplet> ta, tb;
  Vector trace = Vector::Zero(np);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto facets = mesh.cell_facets(c);
    const auto& Lc = L[c];
    // (dev sigma, dev tau) = (sigma, tau) - (1/n)(tr sigma, tr tau).
    for (int i = 0; i <= n; ++i)
      for (int r = 0; r < n; ++r) {
        const Eigen::Index gi = r * nf + facets[i];
        trace(gi) += Lc.rt_component_integral(i, r);
        tb.emplace_back(static_cast<int>(r * nc + c), static_cast<int>(gi), Lc.rt_divergence_integral(i));
        for (int j = 0; j <= n; ++j)
          for (int s = 0; s < n; ++s) {
            const Eigen::Index gj = s * nf + facets[j];
            double v = -Lc.rt_component_mass(i * n + r, j * n + s) / n;
            if (r == s) v += Lc.rt_mass(i, j);
            ta.emplace_back(static_cast<int>(gi), static_cast<int>(gj), v);
          }
      }
  }
  auto& s = out.system;
  s.A = from_triplets(np, np, ta);
  s.B = from_triplets(nd, np, tb);
  s.f = Vector::Zero(np);
  s.g = Vector::Zero(nd);
  const auto p0 = make_dofmap(mesh, Family::P0, false);
  for (int r = 0; r < n; ++r) s.g.segment(r * nc, nc) = -load_vector(mesh, *p0, f[r]);
  s.primal_constraints.push_back(trace);
  return out;
}

Vector boundary_flux_averages(const SimplexMesh& mesh, const BoundaryFlux& g) {
  Vector avg = Vector::Zero(static_cast<Eigen::Index>(mesh.num_facets()));
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    const auto& fg = mesh.facet_geometry(f);
    const int c = mesh.facet_cells(f)[0];
    const Vec nu = mesh.cell_facet_signs(c)[mesh.facet_local_index(f)[0]] * fg.normal;
    double s = 0.0;
    for (const auto& [x, w] : facet_points(fg, 4)) s += w * g(x, nu);
    avg(f) = s / fg.measure;
  }
  return avg;
}

NeumannSystem assemble_neumann(const SimplexMesh& mesh, const ScalarLoad& f, const BoundaryFlux& g,
                               NeumannForm form) {
  require_nonempty(mesh);
  const std::size_t nc = mesh.num_cells(), nf = mesh.num_facets();
  const Vector gbar = boundary_flux_averages(mesh, g);

  double int_f = 0.0, int_g = 0.0, scale = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const double v = integrate_cell(mesh, c, f);
    int_f += v;
    scale += std::abs(v);
  }
  for (std::size_t e = 0; e < nf; ++e) {
    const double v = gbar(e) * mesh.facet_geometry(e).measure;
    int_g += v;
    scale += std::abs(v);
  }
  if (std::abs(int_f + int_g) > 1e-10 * std::max(1.0, scale))
    throw InputError("neumann: incompatible data, int f + int g = " + std::to_string(int_f + int_g));

  NeumannSystem out;
  out.form = form;
  auto& s = out.system;
  const auto L = compute_local_matrices(mesh);

  if (form != NeumannForm::MixedRT) {
    const Family family = form == NeumannForm::PrimalECR ? Family::ECR : Family::CR;
    out.primal_dofs = make_dofmap(mesh, family, false);
    const auto& dofs = *out.primal_dofs;
    std::vector<Triplet> t;
    for (std::size_t c = 0; c < nc; ++c) scatter(t, dofs, c, pick(L[c], family, true));
    s.A = from_triplets(dofs.size(), dofs.size(), t);
    s.B = SparseMatrix(0, dofs.size());
    s.g = Vector::Zero(0);
    s.f = load_vector(mesh, dofs, f);
    // int_E phi_j = |E| delta_ij for both avg-normalized bases; bubbles vanish.
    for (std::size_t e = 0; e < nf; ++e)
      if (mesh.is_boundary(e)) s.f(dofs.facet_dofs[e]) += gbar(e) * mesh.facet_geometry(e).measure;
    Vector mean = Vector::Zero(dofs.size());
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& avg = family == Family::ECR ? L[c].ecr_average : L[c].cr_average;
      for (int i = 0; i < dofs.local_size; ++i) mean(dofs.global(c, i)) += mesh.cell_geometry(c).measure * avg(i);
    }
    s.primal_constraints.push_back(mean);
    return out;
  }

  // Mixed: boundary fluxes are essential; unknown fluxes live on interior facets.
  out.primal_dofs = make_dofmap(mesh, Family::RT0, false);
  out.prescribed_flux = Vector::Zero(static_cast<Eigen::Index>(nf));
  std::vector<int> facet_to_free(nf, -1);
  for (std::size_t e = 0; e < nf; ++e) {
    if (mesh.is_boundary(e)) {
      const int c = mesh.facet_cells(e)[0];
      const int sign = mesh.cell_facet_signs(c)[mesh.facet_local_index(e)[0]];
      out.prescribed_flux(e) = sign * gbar(e) * mesh.facet_geometry(e).measure;
    } else {
      facet_to_free[e] = static_cast<int>(out.free_facets.size());
      out.free_facets.push_back(static_cast<int>(e));
    }
  }
  const auto nfree = static_cast<Eigen::Index>(out.free_facets.size());
  std::vector<Triplet> ta, tb;
  s.f = Vector::Zero(nfree);
  s.g = -load_vector(mesh, *make_dofmap(mesh, Family::P0, false), f);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto facets = mesh.cell_facets(c);
    for (std::size_t i = 0; i < facets.size(); ++i) {
      const int fi = facet_to_free[facets[i]];
      const double bi = L[c].rt_divergence_integral(i);
      if (fi < 0) {
        s.g(c) -= bi * out.prescribed_flux(facets[i]);
        continue;
      }
      tb.emplace_back(static_cast<int>(c), fi, bi);
      for (std::size_t j = 0; j < facets.size(); ++j) {
        const int fj = facet_to_free[facets[j]];
        if (fj >= 0)
          ta.emplace_back(fi, fj, L[c].rt_mass(i, j));
        else
          s.f(fi) -= L[c].rt_mass(i, j) * out.prescribed_flux(facets[j]);
      }
    }
  }
  s.A = from_triplets(nfree, nfree, ta);
  s.B = from_triplets(static_cast<Eigen::Index>(nc), nfree, tb);
  Vector mean(static_cast<Eigen::Index>(nc));
  for (std::size_t c = 0; c < nc; ++c) mean(c) = mesh.cell_geometry(c).measure;
  s.dual_constraints.push_back(mean);
  return out;
}

EigenSystem assemble_eigen(const SimplexMesh& mesh, Family family, MassKind mass) {
  require_nonempty(mesh);
  if (family != Family::CR && family != Family::ECR) throw InputError("assemble_eigen: CR or ECR only");
  EigenSystem out;
  out.dofs = make_dofmap(mesh, family, true);
  const auto L = compute_local_matrices(mesh);
  std::vector<Triplet> ta, tm;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    scatter(ta, *out.dofs, c, pick(L[c], family, true));
    const DenseMatrix& Mc = mass == MassKind::Full
                                ? pick(L[c], family, false)
                                : (family == Family::ECR ? L[c].ecr_projected_mass : L[c].cr_projected_mass);
    scatter(tm, *out.dofs, c, Mc);
  }
  const auto n = static_cast<Eigen::Index>(out.dofs->size());
  out.A = from_triplets(n, n, ta);
  out.M = from_triplets(n, n, tm);
  out.M.prune(0.0);
  return out;
}

} // namespace ecrfem
