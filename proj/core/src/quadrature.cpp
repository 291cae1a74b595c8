#include "ecrfem/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace ecrfem {

void gauss_jacobi01(int m, double alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch for P^(alpha,0) on [-1,1], then shifted to [0,1].
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    const double s = 2.0 * k + alpha + beta;
    J(k, k) = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                       : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k > 0) {
      const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta);
      const double den = s * s * (s + 1.0) * (s - 1.0);
      J(k, k - 1) = J(k - 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                     std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0);
  nodes.resize(m);
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    nodes[i] = 0.5 * (1.0 + es.eigenvalues()(i));
    weights[i] = mu0 * v0 * v0 * std::pow(0.5, alpha + 1.0);
  }
}

namespace {

QuadratureRule build_rule(int dim, int degree) {
  QuadratureRule rule;
  rule.dim = dim;
  double volume = 1.0;
  for (int i = 2; i <= dim; ++i) volume /= i;

  if (degree <= 1) {
    rule.exact_degree = 1;
    std::array<double, 4> p{};
    for (int i = 0; i <= dim; ++i) p[i] = 1.0 / (dim + 1);
    rule.points.push_back(p);
    rule.weights.push_back(volume);
    return rule;
  }

  const int m = (degree + 2) / 2; // 2m-1 >= degree
  rule.exact_degree = 2 * m - 1;
  // Collapsed coordinates: x_d = t_d, x_{d-1} = t_{d-1}(1 - t_d), ...
  // with Jacobian prod_k (1 - t_k)^{k-1}, absorbed into Jacobi weights.
  std::vector<std::vector<double>> t(dim), w(dim);
  for (int k = 0; k < dim; ++k) gauss_jacobi01(m, static_cast<double>(k), t[k], w[k]);

  std::vector<int> idx(dim, 0);
  while (true) {
    double weight = 1.0;
    std::array<double, 4> x{};
    double remaining = 1.0;
    for (int k = dim - 1; k >= 0; --k) {
      x[k] = t[k][idx[k]] * remaining;
      remaining *= (1.0 - t[k][idx[k]]);
      weight *= w[k][idx[k]];
    }
    std::array<double, 4> bary{};
    double sum = 0.0;
    for (int k = 0; k < dim; ++k) {
      bary[k + 1] = x[k];
      sum += x[k];
    }
    bary[0] = 1.0 - sum;
    rule.points.push_back(bary);
    rule.weights.push_back(weight);

    int k = 0;
    while (k < dim && ++idx[k] == m) idx[k++] = 0;
    if (k == dim) break;
  }
  return rule;
}

} // namespace

const QuadratureRule& rule_for_degree(int dim, int degree) {
  if (dim < 1 || dim > 3) throw InputError("quadrature: dimension must be 1, 2 or 3");
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw InputError("quadrature: unsupported degree " + std::to_string(degree));
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, degree}];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_rule(dim, degree));
  return *slot;
}

std::vector<MappedPoint> map_rule(const QuadratureRule& rule, std::span<const Vec> vertices,
                                  double measure) {
  double scale = measure;
  for (int i = 2; i <= rule.dim; ++i) scale *= i;
  std::vector<MappedPoint> out;
  out.reserve(rule.size());
  const int n = static_cast<int>(vertices[0].size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    Vec x = Vec::Zero(n);
    for (int i = 0; i <= rule.dim; ++i) x += rule.points[q][i] * vertices[i];
    out.push_back({x, rule.weights[q] * scale});
  }
  return out;
}

} // namespace ecrfem
