#include "ecrfem/fields.hpp"

namespace ecrfem {

std::string to_string(Family family) {
  switch (family) {
  case Family::CR: return "cr";
  case Family::ECR: return "ecr";
  case Family::RT0: return "rt0";
  case Family::P0: return "p0";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "cr") return Family::CR;
  if (name == "ecr") return Family::ECR;
  if (name == "rt0" || name == "rt") return Family::RT0;
  if (name == "p0") return Family::P0;
  throw InputError("unknown element family '" + name + "'");
}

std::shared_ptr<const DofMap> make_dofmap(const SimplexMesh& mesh, Family family,
                                          bool eliminate_boundary, int components) {
  auto map = std::make_shared<DofMap>();
  map->family = family;
  map->components = components;
  const int n = mesh.dim();
  const std::size_t nc = mesh.num_cells(), nf = mesh.num_facets();
  map->facet_dofs.assign(nf, -1);

  switch (family) {
  case Family::P0:
    map->local_size = 1;
    map->scalar_size = static_cast<int>(nc);
    map->cell_dofs.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) map->cell_dofs[c] = static_cast<int>(c);
    return map;
  case Family::RT0:
    map->local_size = n + 1;
    map->scalar_size = static_cast<int>(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      map->facet_dofs[f] = static_cast<int>(f);
      if (mesh.is_boundary(f)) map->boundary_dofs.push_back(static_cast<int>(f));
    }
    break;
  case Family::CR:
  case Family::ECR: {
    map->local_size = n + 1 + (family == Family::ECR ? 1 : 0);
    int next = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      if (mesh.is_boundary(f) && eliminate_boundary) continue;
      map->facet_dofs[f] = next;
      if (mesh.is_boundary(f)) map->boundary_dofs.push_back(next);
      ++next;
    }
    map->scalar_size = next + (family == Family::ECR ? static_cast<int>(nc) : 0);
    break;
  }
  }

  map->cell_dofs.resize(nc * map->local_size);
  const int facet_count = (family == Family::RT0) ? static_cast<int>(nf)
                                                  : map->scalar_size - (family == Family::ECR ? static_cast<int>(nc) : 0);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto facets = mesh.cell_facets(c);
    for (int i = 0; i <= n; ++i) map->cell_dofs[c * map->local_size + i] = map->facet_dofs[facets[i]];
    if (family == Family::ECR) map->cell_dofs[c * map->local_size + n + 1] = facet_count + static_cast<int>(c);
  }
  return map;
}

BrokenField::BrokenField(const SimplexMesh& mesh, std::shared_ptr<const DofMap> dofs, Vector coefficients)
    : mesh_(&mesh), dofs_(std::move(dofs)), coefficients_(std::move(coefficients)) {
  if (!dofs_) throw InputError("BrokenField: missing dof map");
  if (dofs_->family == Family::RT0) throw InputError("BrokenField: RT0 fields are RTField");
  if (coefficients_.size() != dofs_->size()) throw InputError("BrokenField: coefficient count mismatch");
}

BasisValues BrokenField::local_coefficients(std::size_t cell, int component) const {
  BasisValues u(dofs_->local_size);
  for (int i = 0; i < dofs_->local_size; ++i) {
    const int d = dofs_->global(cell, i, component);
    u(i) = d < 0 ? 0.0 : coefficients_(d);
  }
  return u;
}

double BrokenField::value(std::size_t cell, const Vec& x, int component) const {
  const auto u = local_coefficients(cell, component);
  const auto& g = mesh_->cell_geometry(cell);
  switch (family()) {
  case Family::P0: return u(0);
  case Family::CR: return cr_eval(g, x).values.dot(u);
  default: return ecr_eval(g, x).values.dot(u);
  }
}

Vec BrokenField::gradient(std::size_t cell, const Vec& x, int component) const {
  const auto u = local_coefficients(cell, component);
  const auto& g = mesh_->cell_geometry(cell);
  switch (family()) {
  case Family::P0: return Vec::Zero(g.dim);
  case Family::CR: return cr_eval(g, x).gradients.transpose() * u;
  default: return ecr_eval(g, x).gradients.transpose() * u;
  }
}

Mat BrokenField::gradient_tensor(std::size_t cell, const Vec& x) const {
  const int n = mesh_->dim();
  Mat G(components(), n);
  for (int r = 0; r < components(); ++r) G.row(r) = gradient(cell, x, r).transpose();
  return G;
}

double BrokenField::divergence(std::size_t cell, const Vec& x) const {
  if (components() != mesh_->dim()) throw InputError("divergence needs an n-component field");
  return gradient_tensor(cell, x).trace();
}

double BrokenField::cell_average(std::size_t cell, int component) const {
  const auto u = local_coefficients(cell, component);
  const int n = mesh_->dim();
  switch (family()) {
  case Family::P0: return u(0);
  case Family::CR: return u.sum() / (n + 1);
  default: return u(n + 1);
  }
}

RTField::RTField(const SimplexMesh& mesh, int rows, Vector fluxes)
    : mesh_(&mesh), rows_(rows), fluxes_(std::move(fluxes)) {
  if (fluxes_.size() != static_cast<Eigen::Index>(rows_ * mesh.num_facets()))
    throw InputError("RTField: flux count mismatch");
}

Vec RTField::value(std::size_t cell, const Vec& x, int row) const {
  const auto& g = mesh_->cell_geometry(cell);
  const auto facets = mesh_->cell_facets(cell);
  const auto signs = mesh_->cell_facet_signs(cell);
  const auto e = rt0_eval(g, signs, x);
  Vec v = Vec::Zero(g.dim);
  for (int i = 0; i <= g.dim; ++i) v += flux(facets[i], row) * e.values.row(i).transpose();
  return v;
}

Mat RTField::tensor_value(std::size_t cell, const Vec& x) const {
  Mat T(rows_, mesh_->dim());
  for (int r = 0; r < rows_; ++r) T.row(r) = value(cell, x, r).transpose();
  return T;
}

double RTField::divergence(std::size_t cell, int row) const {
  const auto facets = mesh_->cell_facets(cell);
  const auto signs = mesh_->cell_facet_signs(cell);
  double s = 0.0;
  for (std::size_t i = 0; i < facets.size(); ++i) s += signs[i] * flux(facets[i], row);
  return s / mesh_->cell_geometry(cell).measure;
}

Vec RTField::constant_part(std::size_t cell, int row) const {
  return value(cell, mesh_->cell_geometry(cell).centroid, row);
}

double RTField::radial_coefficient(std::size_t cell, int row) const {
  return divergence(cell, row) / mesh_->dim();
}

ScalarLoad ScalarLoad::constant(double value) {
  ScalarLoad l;
  l.constant_ = value;
  return l;
}

ScalarLoad ScalarLoad::function(Function f) {
  if (!f) throw InputError("ScalarLoad: empty function");
  ScalarLoad l;
  l.function_ = std::move(f);
  return l;
}

ScalarLoad ScalarLoad::piecewise_constant(std::vector<double> per_cell) {
  ScalarLoad l;
  l.table_ = std::move(per_cell);
  l.is_table_ = true;
  return l;
}

double ScalarLoad::cell_value(std::size_t cell) const {
  if (function_) throw InputError("ScalarLoad: load is not piecewise constant");
  if (!is_table_) return constant_;
  if (cell >= table_.size()) throw InputError("ScalarLoad: table shorter than the cell count");
  return table_[cell];
}

double ScalarLoad::operator()(std::size_t cell, const Vec& x) const {
  return function_ ? function_(x) : cell_value(cell);
}

bool ScalarLoad::is_zero() const {
  if (function_) return false;
  if (!is_table_) return constant_ == 0.0;
  for (double v : table_)
    if (v != 0.0) return false;
  return true;
}

VectorLoad constant_vector_load(const std::vector<double>& value) {
  VectorLoad out;
  for (double v : value) out.push_back(ScalarLoad::constant(v));
  return out;
}

} // namespace ecrfem
