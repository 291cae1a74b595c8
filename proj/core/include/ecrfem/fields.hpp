#pragma once

#include "ecrfem/elements.hpp"
#include "ecrfem/mesh.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace ecrfem {

enum class Family { CR, ECR, RT0, P0 };

std::string to_string(Family family);
Family parse_family(const std::string& name);

/// Global numbering of a scalar family; vector fields repeat it per
/// component (component r occupies [r * scalar_size, (r+1) * scalar_size)).
///
/// CR/ECR: kept facets first (facet order), then ECR cell bubbles.
/// P0: one dof per cell. RT0: one flux dof per facet along nu_E.
struct DofMap {
  Family family = Family::ECR;
  int components = 1;
  int local_size = 0;              ///< per cell, per component
  int scalar_size = 0;
  std::vector<int> cell_dofs;      ///< num_cells * local_size, -1 when eliminated
  std::vector<int> facet_dofs;     ///< per facet, -1 when eliminated or n/a
  std::vector<int> boundary_dofs;  ///< kept dofs living on boundary facets

  int size() const noexcept { return scalar_size * components; }
  /// -1 for eliminated dofs.
  int global(std::size_t cell, int local, int component = 0) const {
    const int d = cell_dofs[cell * local_size + local];
    return d < 0 ? -1 : d + component * scalar_size;
  }
};

/// `eliminate_boundary` drops CR/ECR boundary-facet dofs (homogeneous
/// Dirichlet); RT0 and P0 ignore it.
std::shared_ptr<const DofMap> make_dofmap(const SimplexMesh& mesh, Family family,
                                          bool eliminate_boundary, int components = 1);

/// Discontinuous CR / ECR / P0 field (scalar or vector). Holds a
/// non-owning pointer to the mesh; the mesh must outlive the field.
class BrokenField {
public:
  BrokenField(const SimplexMesh& mesh, std::shared_ptr<const DofMap> dofs, Vector coefficients);

  const SimplexMesh& mesh() const { return *mesh_; }
  const DofMap& dofs() const { return *dofs_; }
  std::shared_ptr<const DofMap> dofs_ptr() const { return dofs_; }
  Family family() const { return dofs_->family; }
  int components() const { return dofs_->components; }
  const Vector& coefficients() const { return coefficients_; }

  /// Coefficients of the local basis on `cell` (eliminated dofs read 0).
  BasisValues local_coefficients(std::size_t cell, int component = 0) const;
  double value(std::size_t cell, const Vec& x, int component = 0) const;
  Vec gradient(std::size_t cell, const Vec& x, int component = 0) const;
  /// Row r = broken gradient of component r.
  Mat gradient_tensor(std::size_t cell, const Vec& x) const;
  double divergence(std::size_t cell, const Vec& x) const;
  /// Pi_0 on one cell. For ECR this is the bubble coefficient.
  double cell_average(std::size_t cell, int component = 0) const;

private:
  const SimplexMesh* mesh_;
  std::shared_ptr<const DofMap> dofs_;
  Vector coefficients_;
};

/// H(div)-conforming RT0 field with `rows` rows (1 for vectors, n for
/// tensors). Coefficient r * num_facets + f is the flux of row r through
/// facet f along nu_E. On each cell a row reads a + d (x - mid(K)) with d
/// the radial coefficient div / n.
class RTField {
public:
  RTField(const SimplexMesh& mesh, int rows, Vector fluxes);

  const SimplexMesh& mesh() const { return *mesh_; }
  int rows() const { return rows_; }
  const Vector& fluxes() const { return fluxes_; }
  double flux(std::size_t facet, int row = 0) const { return fluxes_(row * mesh_->num_facets() + facet); }

  Vec value(std::size_t cell, const Vec& x, int row = 0) const;
  Mat tensor_value(std::size_t cell, const Vec& x) const;
  double divergence(std::size_t cell, int row = 0) const;
  Vec constant_part(std::size_t cell, int row = 0) const;
  double radial_coefficient(std::size_t cell, int row = 0) const;

private:
  const SimplexMesh* mesh_;
  int rows_;
  Vector fluxes_;
};

/// Scalar load f: constant, callable, or a per-cell table.
class ScalarLoad {
public:
  using Function = std::function<double(const Vec&)>;

  static ScalarLoad constant(double value);
  static ScalarLoad function(Function f);
  static ScalarLoad piecewise_constant(std::vector<double> per_cell);

  bool is_piecewise_constant() const { return !function_; }
  /// Value on `cell` (piecewise-constant loads only).
  double cell_value(std::size_t cell) const;
  double operator()(std::size_t cell, const Vec& x) const;
  bool is_zero() const;

private:
  Function function_;
  std::vector<double> table_;
  double constant_ = 0.0;
  bool is_table_ = false;
};

using VectorLoad = std::vector<ScalarLoad>;

VectorLoad constant_vector_load(const std::vector<double>& value);

/// Quadrature degree for loads and error norms against analytic data.
inline constexpr int kLoadDegree = 8;
/// Quadrature degree for element matrices.
inline constexpr int kMatrixDegree = 4;

} // namespace ecrfem
