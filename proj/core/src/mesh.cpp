#include "ecrfem/mesh.hpp"

#include <Eigen/LU>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace ecrfem {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Signed volume of the simplex spanned by the given vertices.
double signed_measure(std::span<const Vec> v) {
  const int n = static_cast<int>(v.size()) - 1;
  Mat J(n, n);
  for (int j = 0; j < n; ++j) J.col(j) = v[j + 1] - v[0];
  return J.determinant() / factorial(n);
}

double max_edge(std::span<const Vec> v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) m = std::max(m, (v[i] - v[j]).norm());
  return m;
}

// Unit normal of an (n-1)-simplex in R^n fixed by its vertex order.
Vec oriented_normal(std::span<const Vec> v) {
  const int n = static_cast<int>(v[0].size());
  Vec nu(n);
  if (n == 2) {
    const Vec t = v[1] - v[0];
    nu << t(1), -t(0);
  } else {
    const Eigen::Vector3d a = (v[1] - v[0]);
    const Eigen::Vector3d b = (v[2] - v[0]);
    nu = a.cross(b);
  }
  return nu / nu.norm();
}

} // namespace

Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> CellGeometry::barycentric(const Vec& x) const {
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> lambda(dim + 1);
  for (int j = 0; j <= dim; ++j) lambda(j) = 1.0 + barycentric_gradients[j].dot(x - vertices[j]);
  return lambda;
}

Vec CellGeometry::outward_normal(int i) const {
  const Vec& g = barycentric_gradients[i];
  return -g / g.norm();
}

double CellGeometry::facet_measure(int i) const {
  // |K| = |E_i| dist(a_i, E_i) / n and |grad lambda_i| = 1 / dist(a_i, E_i).
  return dim * measure * barycentric_gradients[i].norm();
}

CellGeometry make_cell_geometry(std::span<const Vec> v) {
  CellGeometry g;
  const int n = static_cast<int>(v.size()) - 1;
  g.dim = n;
  g.vertices.assign(v.begin(), v.end());
  Mat J(n, n);
  for (int j = 0; j < n; ++j) J.col(j) = v[j + 1] - v[0];
  g.measure = std::abs(J.determinant()) / factorial(n);
  g.centroid = Vec::Zero(n);
  for (const auto& a : v) g.centroid += a;
  g.centroid /= (n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const double d2 = (v[i] - v[j]).squaredNorm();
      g.H += d2;
      g.diameter = std::max(g.diameter, std::sqrt(d2));
    }
  // Rows of J^{-1} are grad lambda_1..lambda_n.
  const Mat Jinv = J.inverse();
  g.barycentric_gradients.resize(n + 1);
  Vec sum = Vec::Zero(n);
  for (int j = 1; j <= n; ++j) {
    g.barycentric_gradients[j] = Jinv.row(j - 1).transpose();
    sum += g.barycentric_gradients[j];
  }
  g.barycentric_gradients[0] = -sum;
  return g;
}

SimplexMesh::SimplexMesh(int dim, std::vector<Vec> vertices, std::vector<int> cells)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
  if (dim_ < 2 || dim_ > kMaxDim) throw InputError("mesh dimension must be 2 or 3");
  const int nv = dim_ + 1;
  if (cells_.size() % nv != 0) throw InputError("cell array length is not a multiple of dim+1");
  for (const auto& p : vertices_)
    if (p.size() != dim_) throw InputError("vertex coordinate count does not match mesh dimension");
  const std::size_t nc = cells_.size() / nv;
  if (nc == 0) throw InputError("mesh has no cells");

  std::vector<Vec> local(nv);
  for (std::size_t c = 0; c < nc; ++c) {
    int* cv = cells_.data() + c * nv;
    for (int i = 0; i < nv; ++i) {
      if (cv[i] < 0 || static_cast<std::size_t>(cv[i]) >= vertices_.size())
        throw InputError("cell " + std::to_string(c) + " references vertex index out of range");
      local[i] = vertices_[cv[i]];
    }
    const double vol = signed_measure(local);
    const double edge = max_edge(local);
    if (std::abs(vol) < 1e-14 * std::pow(edge, dim_) || edge == 0.0)
      throw InputError("cell " + std::to_string(c) + " is degenerate");
    if (vol < 0) std::swap(cv[0], cv[1]);
  }

  // Facets numbered in order of first encounter.
  std::map<std::array<int, 3>, int> index;
  cell_facets_.resize(nc * nv);
  cell_signs_.resize(nc * nv);
  for (std::size_t c = 0; c < nc; ++c) {
    const int* cv = cells_.data() + c * nv;
    for (int i = 0; i < nv; ++i) {
      std::array<int, 3> key{-1, -1, -1};
      int k = 0;
      for (int j = 0; j < nv; ++j)
        if (j != i) key[k++] = cv[j];
      std::sort(key.begin(), key.begin() + dim_);
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(facet_cells_.size()));
      if (inserted) {
        facets_.insert(facets_.end(), key.begin(), key.begin() + dim_);
        facet_cells_.push_back({static_cast<int>(c), -1});
        facet_local_.push_back({i, -1});
      } else {
        auto& fc = facet_cells_[it->second];
        if (fc[1] >= 0) throw InputError("facet shared by more than two cells");
        fc[1] = static_cast<int>(c);
        facet_local_[it->second][1] = i;
      }
      cell_facets_[c * nv + i] = it->second;
    }
  }

  cell_geometry_.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (int i = 0; i < nv; ++i) local[i] = vertices_[cells_[c * nv + i]];
    cell_geometry_.push_back(make_cell_geometry(local));
    h_ = std::max(h_, cell_geometry_.back().diameter);
  }

  const std::size_t nf = facet_cells_.size();
  facet_geometry_.reserve(nf);
  std::vector<Vec> fv(dim_);
  for (std::size_t f = 0; f < nf; ++f) {
    FacetGeometry g;
    g.dim = dim_;
    for (int i = 0; i < dim_; ++i) fv[i] = vertices_[facets_[f * dim_ + i]];
    g.vertices = fv;
    g.normal = oriented_normal(fv);
    g.centroid = Vec::Zero(dim_);
    for (const auto& p : fv) g.centroid += p;
    g.centroid /= dim_;
    const auto [c0, c1] = facet_cells_[f];
    g.measure = cell_geometry_[c0].facet_measure(facet_local_[f][0]);
    facet_geometry_.push_back(std::move(g));
    if (c1 < 0) ++num_boundary_facets_;
  }

  for (std::size_t c = 0; c < nc; ++c)
    for (int i = 0; i < nv; ++i) {
      const int f = cell_facets_[c * nv + i];
      const double d = facet_geometry_[f].normal.dot(cell_geometry_[c].outward_normal(i));
      cell_signs_[c * nv + i] = d > 0 ? 1 : -1;
    }
}

std::span<const int> SimplexMesh::cell(std::size_t c) const {
  return {cells_.data() + c * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
}

std::span<const int> SimplexMesh::facet(std::size_t f) const {
  return {facets_.data() + f * dim_, static_cast<std::size_t>(dim_)};
}

std::span<const int> SimplexMesh::cell_facets(std::size_t c) const {
  return {cell_facets_.data() + c * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
}

std::span<const int> SimplexMesh::cell_facet_signs(std::size_t c) const {
  return {cell_signs_.data() + c * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
}

const CellGeometry& SimplexMesh::cell_geometry(std::size_t c) const {
  if (c >= cell_geometry_.size()) throw std::out_of_range("cell index out of range");
  return cell_geometry_[c];
}

const FacetGeometry& SimplexMesh::facet_geometry(std::size_t f) const {
  if (f >= facet_geometry_.size()) throw std::out_of_range("facet index out of range");
  return facet_geometry_[f];
}

double SimplexMesh::total_measure() const noexcept {
  double s = 0.0;
  for (const auto& g : cell_geometry_) s += g.measure;
  return s;
}

SimplexMesh build_box_mesh(int dim, int subdivisions, BoxVariant variant) {
  if (dim != 2 && dim != 3) throw InputError("box mesh dimension must be 2 or 3");
  if (subdivisions < 1) throw InputError("subdivisions must be positive");
  const int m = subdivisions;
  const double h = 1.0 / m;
  std::vector<Vec> vertices;
  std::vector<int> cells;

  if (dim == 2) {
    auto id = [m](int i, int j) { return j * (m + 1) + i; };
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) vertices.push_back(Vec{{i * h, j * h}});
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
        if (variant == BoxVariant::Diagonal) {
          cells.insert(cells.end(), {p00, p10, p11, p00, p11, p01});
        } else {
          const int c = static_cast<int>(vertices.size());
          vertices.push_back(Vec{{(i + 0.5) * h, (j + 0.5) * h}});
          cells.insert(cells.end(), {p00, p10, c, p10, p11, c, p11, p01, c, p01, p00, c});
        }
      }
  } else {
    if (variant != BoxVariant::Diagonal) throw InputError("criss-cross split is only defined in 2D");
    auto id = [m](int i, int j, int k) { return (k * (m + 1) + j) * (m + 1) + i; };
    for (int k = 0; k <= m; ++k)
      for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i) vertices.push_back(Vec{{i * h, j * h, k * h}});
    std::array<int, 3> perm{0, 1, 2};
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          std::sort(perm.begin(), perm.end());
          do {
            std::array<int, 3> p{i, j, k};
            cells.push_back(id(p[0], p[1], p[2]));
            for (int axis : perm) {
              ++p[axis];
              cells.push_back(id(p[0], p[1], p[2]));
            }
          } while (std::next_permutation(perm.begin(), perm.end()));
        }
  }
  return SimplexMesh(dim, std::move(vertices), std::move(cells));
}

SimplexMesh refine_uniform(const SimplexMesh& mesh) {
  const int n = mesh.dim();
  std::vector<Vec> vertices = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    return it->second;
  };

  std::vector<int> cells;
  cells.reserve(mesh.num_cells() * (n == 2 ? 12 : 32));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto v = mesh.cell(c);
    if (n == 2) {
      const int m01 = mid(v[0], v[1]), m12 = mid(v[1], v[2]), m02 = mid(v[0], v[2]);
      cells.insert(cells.end(), {v[0], m01, m02, m01, v[1], m12, m02, m12, v[2], m01, m12, m02});
      continue;
    }
    const int m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
    const int m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
    cells.insert(cells.end(), {v[0], m01, m02, m03, m01, v[1], m12, m13,
                               m02, m12, v[2], m23, m03, m13, m23, v[3]});
    // Interior octahedron: diagonals and their equators in cyclic order.
    const std::array<std::array<int, 6>, 3> split{{{m01, m23, m02, m03, m13, m12},
                                                   {m02, m13, m01, m03, m23, m12},
                                                   {m03, m12, m01, m02, m23, m13}}};
    int best = 0;
    double best_len = (vertices[split[0][0]] - vertices[split[0][1]]).norm();
    for (int d = 1; d < 3; ++d) {
      const double len = (vertices[split[d][0]] - vertices[split[d][1]]).norm();
      if (len < best_len * (1.0 - 1e-12)) {
        best = d;
        best_len = len;
      }
    }
    const auto& s = split[best];
    for (int e = 0; e < 4; ++e)
      cells.insert(cells.end(), {s[0], s[1], s[2 + e], s[2 + (e + 1) % 4]});
  }
  return SimplexMesh(n, std::move(vertices), std::move(cells));
}

std::vector<SimplexMesh> refine_hierarchy(const SimplexMesh& coarse, int levels) {
  if (levels < 0) throw InputError("number of levels must be non-negative");
  std::vector<SimplexMesh> out;
  out.reserve(levels + 1);
  out.push_back(coarse);
  for (int l = 0; l < levels; ++l) out.push_back(refine_uniform(out.back()));
  return out;
}

SimplexMesh read_mesh(const std::string& text) {
  std::istringstream in(text);
  long dim = 0, nv = 0, nc = 0;
  std::string header;
  if (!std::getline(in, header)) throw InputError("mesh: missing header line");
  {
    std::istringstream hs(header);
    std::string extra;
    if (!(hs >> dim >> nv >> nc) || (hs >> extra))
      throw InputError("mesh: malformed header, expected 'dim n_vertices n_cells'");
  }
  if (dim < 2 || dim > kMaxDim) throw InputError("mesh: dimension must be 2 or 3");
  if (nv <= 0 || nc <= 0) throw InputError("mesh: vertex and cell counts must be positive");
  std::vector<Vec> vertices(nv, Vec(dim));
  for (long v = 0; v < nv; ++v)
    for (long d = 0; d < dim; ++d)
      if (!(in >> vertices[v](d))) throw InputError("mesh: truncated vertex block");
  std::vector<int> cells(nc * (dim + 1));
  for (auto& idx : cells) {
    long value = 0;
    if (!(in >> value)) throw InputError("mesh: truncated cell block");
    if (value < 0 || value >= nv) throw InputError("mesh: vertex index out of range");
    idx = static_cast<int>(value);
  }
  return SimplexMesh(static_cast<int>(dim), std::move(vertices), std::move(cells));
}

std::string write_mesh(const SimplexMesh& mesh) {
  std::ostringstream out;
  out << mesh.dim() << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) {
    for (int d = 0; d < mesh.dim(); ++d) out << (d ? " " : "") << p(d);
    out << '\n';
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto v = mesh.cell(c);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
  }
  return out.str();
}

SimplexMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_mesh(ss.str());
}

BoxVariant parse_box_variant(const std::string& name) {
  if (name == "diagonal") return BoxVariant::Diagonal;
  if (name == "crisscross" || name == "criss-cross") return BoxVariant::CrissCross;
  throw InputError("unknown coarse mesh variant '" + name + "'");
}

std::string to_string(BoxVariant variant) {
  return variant == BoxVariant::Diagonal ? "diagonal" : "crisscross";
}

} // namespace ecrfem
