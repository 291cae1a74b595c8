#include "ecrfem/elements.hpp"

namespace ecrfem {

double bubble_gradient_scale(const CellGeometry& g) {
  const double n = g.dim;
  return n * (n + 1) * (n + 1) * (n + 2) / g.H;
}

double centered_second_moment(const CellGeometry& g) {
  const double n = g.dim;
  return g.measure * g.H / ((n + 1) * (n + 1) * (n + 2));
}

Mat centered_covariance(const CellGeometry& g) {
  const int n = g.dim;
  Mat C = Mat::Zero(n, n);
  for (const auto& a : g.vertices) {
    const Vec d = a - g.centroid;
    C += d * d.transpose();
  }
  return C * (g.measure / ((n + 1.0) * (n + 2.0)));
}

double bubble_energy(const CellGeometry& g) {
  const double c = bubble_gradient_scale(g);
  return c * c * centered_second_moment(g);
}

ScalarBasisEval ecr_eval(const CellGeometry& g, const Vec& x) {
  const int n = g.dim;
  const double c = bubble_gradient_scale(g);
  const Vec y = x - g.centroid;
  const auto lambda = g.barycentric(x);

  ScalarBasisEval e;
  e.values.resize(n + 2);
  e.gradients.resize(n + 2, n);
  const double phiK = 0.5 * (n + 2) - 0.5 * c * y.squaredNorm();
  const Vec gradK = -c * y;
  for (int j = 0; j <= n; ++j) {
    e.values(j) = 1.0 - n * lambda(j) - phiK / (n + 1);
    e.gradients.row(j) = (-n * g.barycentric_gradients[j] - gradK / (n + 1)).transpose();
  }
  e.values(n + 1) = phiK;
  e.gradients.row(n + 1) = gradK.transpose();
  return e;
}

ScalarBasisEval cr_eval(const CellGeometry& g, const Vec& x) {
  const int n = g.dim;
  const auto lambda = g.barycentric(x);
  ScalarBasisEval e;
  e.values.resize(n + 1);
  e.gradients.resize(n + 1, n);
  for (int j = 0; j <= n; ++j) {
    e.values(j) = 1.0 - n * lambda(j);
    e.gradients.row(j) = (-n * g.barycentric_gradients[j]).transpose();
  }
  return e;
}

VectorBasisEval rt0_eval(const CellGeometry& g, std::span<const int> signs, const Vec& x) {
  const int n = g.dim;
  VectorBasisEval e;
  e.values.resize(n + 1, n);
  e.divergence.resize(n + 1);
  const double scale = 1.0 / (n * g.measure);
  for (int i = 0; i <= n; ++i) {
    e.values.row(i) = (signs[i] * scale * (x - g.vertices[i])).transpose();
    e.divergence(i) = signs[i] / g.measure;
  }
  return e;
}

namespace {

// Fill the lower triangle from the upper one.
void mirror_upper(DenseMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = A(j, i);
}

} // namespace

LocalMatrices local_matrices(const CellGeometry& g, std::span<const int> signs,
                             const QuadratureRule& rule) {
  if (rule.exact_degree < 4) throw InputError("local_matrices: quadrature must be exact to degree 4");
  const int n = g.dim;
  const int ne = n + 2, nc = n + 1;
  LocalMatrices L;
  L.ecr_stiffness = DenseMatrix::Zero(ne, ne);
  L.ecr_mass = DenseMatrix::Zero(ne, ne);
  L.cr_mass = DenseMatrix::Zero(nc, nc);
  L.rt_mass = DenseMatrix::Zero(nc, nc);
  L.rt_component_mass = DenseMatrix::Zero(nc * n, nc * n);
  L.rt_component_integral = DenseMatrix::Zero(nc, n);
  L.ecr_gradient_integral = DenseMatrix::Zero(ne, n);

  for (const auto& [x, w] : map_rule(rule, g.vertices, g.measure)) {
    const auto ecr = ecr_eval(g, x);
    const auto cr = cr_eval(g, x);
    const auto rt = rt0_eval(g, signs, x);
    for (int i = 0; i < ne; ++i) {
      L.ecr_gradient_integral.row(i) += w * ecr.gradients.row(i);
      for (int j = i; j < ne; ++j) {
        L.ecr_stiffness(i, j) += w * ecr.gradients.row(i).dot(ecr.gradients.row(j));
        L.ecr_mass(i, j) += w * ecr.values(i) * ecr.values(j);
      }
    }
    for (int i = 0; i < nc; ++i) {
      L.rt_component_integral.row(i) += w * rt.values.row(i);
      for (int j = i; j < nc; ++j) {
        L.cr_mass(i, j) += w * cr.values(i) * cr.values(j);
        L.rt_mass(i, j) += w * rt.values.row(i).dot(rt.values.row(j));
      }
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < nc; ++j)
          for (int s = 0; s < n; ++s)
            L.rt_component_mass(i * n + r, j * n + s) += w * rt.values(i, r) * rt.values(j, s);
    }
  }
  mirror_upper(L.ecr_stiffness);
  mirror_upper(L.ecr_mass);
  mirror_upper(L.cr_mass);
  mirror_upper(L.rt_mass);
  L.rt_component_mass = 0.5 * (L.rt_component_mass + L.rt_component_mass.transpose()).eval();
  // The averages are exact by construction of the avg-normalized bases;
  // use the exact values so the projected mass has an exact kernel.
  L.ecr_average = Vector::Zero(ne);
  L.ecr_average(n + 1) = 1.0;
  L.cr_average = Vector::Constant(nc, 1.0 / nc);

  // P1 gradients are constant: closed forms.
  L.cr_stiffness = DenseMatrix::Zero(nc, nc);
  L.cr_gradient_integral = DenseMatrix::Zero(nc, n);
  for (int i = 0; i < nc; ++i) {
    L.cr_gradient_integral.row(i) = (-n * g.measure * g.barycentric_gradients[i]).transpose();
    for (int j = 0; j < nc; ++j)
      L.cr_stiffness(i, j) =
          n * n * g.measure * g.barycentric_gradients[i].dot(g.barycentric_gradients[j]);
  }

  L.ecr_projected_mass = g.measure * L.ecr_average * L.ecr_average.transpose();
  L.cr_projected_mass = g.measure * L.cr_average * L.cr_average.transpose();
  L.rt_divergence_integral = Vector::Zero(nc);
  for (int i = 0; i < nc; ++i) L.rt_divergence_integral(i) = signs[i];
  return L;
}

} // namespace ecrfem
