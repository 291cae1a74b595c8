#pragma once

#include "ecrfem/mesh.hpp"

#include <array>
#include <vector>

namespace ecrfem {

/// Quadrature rule on the reference d-simplex. Points are stored in
/// barycentric coordinates so they map to any physical simplex directly.
struct QuadratureRule {
  int dim = 0;
  int exact_degree = 0;
  std::vector<std::array<double, 4>> points; ///< barycentric, dim+1 entries used
  std::vector<double> weights;               ///< positive, sum to 1/dim!

  std::size_t size() const noexcept { return weights.size(); }
};

/// Rule on the reference simplex of dimension 1..3 exact for total degree
/// `degree`. Degree <= 1 is the centroid rule; higher degrees use collapsed
/// Gauss-Jacobi products, which have strictly positive weights. Rules are
/// cached; the returned reference stays valid for the program lifetime.
const QuadratureRule& rule_for_degree(int dim, int degree);

inline constexpr int kMaxQuadratureDegree = 21;

/// Physical point and weight of rule point q on the simplex with the given
/// vertices.
struct MappedPoint {
  Vec x;
  double weight;
};

/// Map every point of `rule` onto the simplex (cell or facet) with the given
/// vertices and measure.
std::vector<MappedPoint> map_rule(const QuadratureRule& rule, std::span<const Vec> vertices,
                                  double measure);

inline std::vector<MappedPoint> cell_points(const CellGeometry& g, int degree) {
  return map_rule(rule_for_degree(g.dim, degree), g.vertices, g.measure);
}

inline std::vector<MappedPoint> facet_points(const FacetGeometry& g, int degree) {
  return map_rule(rule_for_degree(g.dim - 1, degree), g.vertices, g.measure);
}

/// Gauss-Jacobi nodes and weights on [0,1] for the weight (1-t)^alpha.
void gauss_jacobi01(int points, double alpha, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace ecrfem
