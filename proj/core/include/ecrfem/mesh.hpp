#pragma once

#include "ecrfem/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ecrfem {

/// Cached geometry of one n-simplex K.
struct CellGeometry {
  int dim = 0;
  std::vector<Vec> vertices;             ///< a_1..a_{n+1}, local order of the mesh cell
  double measure = 0.0;                  ///< |K|
  Vec centroid;                          ///< mid(K)
  double H = 0.0;                        ///< sum_{i<j} |a_i - a_j|^2
  double diameter = 0.0;                 ///< longest edge
  std::vector<Vec> barycentric_gradients;///< grad lambda_j, sums to zero

  /// Barycentric coordinates of x (valid on all of R^n).
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> barycentric(const Vec& x) const;
  /// Outward unit normal of the facet opposite local vertex i.
  Vec outward_normal(int i) const;
  /// (n-1)-measure of the facet opposite local vertex i.
  double facet_measure(int i) const;
};

struct FacetGeometry {
  int dim = 0;
  std::vector<Vec> vertices; ///< sorted by global vertex index
  double measure = 0.0;
  Vec centroid;
  Vec normal;                ///< nu_E, fixed by the sorted vertex tuple
};

enum class BoxVariant { Diagonal, CrissCross };

/// Conforming simplicial mesh of dimension 2 or 3.
///
/// Local facet i of a cell is the facet opposite local vertex i. Facets are
/// stored with their vertex tuple sorted ascending; that tuple fixes the
/// global normal nu_E. Each cell stores, per local facet, +1 if nu_E points
/// out of the cell and -1 otherwise. The mesh is immutable after
/// construction.
class SimplexMesh {
public:
  /// `cells` is flat with stride dim+1. Cells with negative orientation are
  /// reordered; degenerate cells throw InputError.
  SimplexMesh(int dim, std::vector<Vec> vertices, std::vector<int> cells);

  int dim() const noexcept { return dim_; }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_cells() const noexcept { return cell_geometry_.size(); }
  std::size_t num_facets() const noexcept { return facet_geometry_.size(); }
  std::size_t num_boundary_facets() const noexcept { return num_boundary_facets_; }

  const Vec& vertex(std::size_t v) const { return vertices_[v]; }
  const std::vector<Vec>& vertices() const noexcept { return vertices_; }

  std::span<const int> cell(std::size_t c) const;
  std::span<const int> facet(std::size_t f) const;
  /// Global facet indices of cell c, ordered by local facet.
  std::span<const int> cell_facets(std::size_t c) const;
  /// Relative orientation signs (+1 outward) matching cell_facets(c).
  std::span<const int> cell_facet_signs(std::size_t c) const;
  /// Incident cells of facet f; second entry is -1 on the boundary.
  std::array<int, 2> facet_cells(std::size_t f) const { return facet_cells_[f]; }
  /// Local facet index of f inside each incident cell.
  std::array<int, 2> facet_local_index(std::size_t f) const { return facet_local_[f]; }
  bool is_boundary(std::size_t f) const { return facet_cells_[f][1] < 0; }

  const CellGeometry& cell_geometry(std::size_t c) const;
  const FacetGeometry& facet_geometry(std::size_t f) const;

  /// Max cell diameter.
  double h() const noexcept { return h_; }
  double total_measure() const noexcept;

private:
  int dim_;
  std::vector<Vec> vertices_;
  std::vector<int> cells_;
  std::vector<int> facets_;
  std::vector<int> cell_facets_;
  std::vector<int> cell_signs_;
  std::vector<std::array<int, 2>> facet_cells_;
  std::vector<std::array<int, 2>> facet_local_;
  std::vector<CellGeometry> cell_geometry_;
  std::vector<FacetGeometry> facet_geometry_;
  std::size_t num_boundary_facets_ = 0;
  double h_ = 0.0;
};

CellGeometry make_cell_geometry(std::span<const Vec> vertices);

/// Unit box (0,1)^dim with subdivisions^dim sub-boxes. Squares are split by
/// the (0,0)-(1,1) diagonal or criss-cross into 4 triangles; cubes into the 6
/// Kuhn tetrahedra sharing the main diagonal.
SimplexMesh build_box_mesh(int dim, int subdivisions, BoxVariant variant = BoxVariant::Diagonal);

/// Red refinement (2D, 4 children) or octasection (3D, 8 children; the
/// interior octahedron is cut along its shortest diagonal). The children of
/// cell c are cells [c * 2^dim, (c+1) * 2^dim) of the result.
SimplexMesh refine_uniform(const SimplexMesh& mesh);

/// meshes[l] is `coarse` refined l times, l = 0..levels.
std::vector<SimplexMesh> refine_hierarchy(const SimplexMesh& coarse, int levels);

/// Plain-text mesh format: "dim n_vertices n_cells", vertex lines, cell lines
/// with 0-based indices.
SimplexMesh read_mesh(const std::string& text);
std::string write_mesh(const SimplexMesh& mesh);
SimplexMesh read_mesh_file(const std::string& path);

BoxVariant parse_box_variant(const std::string& name);
std::string to_string(BoxVariant variant);

} // namespace ecrfem
