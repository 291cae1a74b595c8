#pragma once

#include "ecrfem/ecrfem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <random>
#include <vector>

namespace testutil {

using ecrfem::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

/// Reference simplex 0, e_1, ..., e_n.
inline std::vector<Vec> reference_vertices(int n) {
  std::vector<Vec> v(n + 1, Vec::Zero(n));
  for (int i = 0; i < n; ++i) v[i + 1](i) = 1.0;
  return v;
}

/// Random simplex with volume bounded away from zero.
inline std::vector<Vec> random_vertices(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (;;) {
    std::vector<Vec> v(n + 1, Vec::Zero(n));
    for (auto& x : v)
      for (int i = 0; i < n; ++i) x(i) = d(rng);
    ecrfem::Mat J(n, n);
    for (int i = 0; i < n; ++i) J.col(i) = v[i + 1] - v[0];
    if (std::abs(J.determinant()) > 0.1) return v;
  }
}

inline ecrfem::ScalarLoad random_p0_load(const ecrfem::SimplexMesh& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(mesh.num_cells());
  for (auto& a : v) a = d(rng);
  return ecrfem::ScalarLoad::piecewise_constant(std::move(v));
}

inline ecrfem::VectorLoad random_p0_vector_load(const ecrfem::SimplexMesh& mesh, std::mt19937& rng) {
  ecrfem::VectorLoad f;
  for (int r = 0; r < mesh.dim(); ++r) f.push_back(random_p0_load(mesh, rng));
  return f;
}

} // namespace testutil
