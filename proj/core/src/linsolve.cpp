#include "ecrfem/linsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>

namespace ecrfem {

namespace {

double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  const double r = (A * x - b).norm();
  return nb > 0 ? r / nb : r;
}

} // namespace

Vector solve_spd(const SparseMatrix& A, const Vector& b, const SolverConfig& config) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw InputError("solve_spd: dimension mismatch");
  if (b.norm() == 0.0) return Vector::Zero(b.size());

  if (config.spd_method == SpdMethod::ConjugateGradient) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(config.tolerance);
    cg.setMaxIterations(config.max_iterations);
    cg.compute(A);
    Vector x = cg.solve(b);
    const double res = relative_residual(A, x, b);
    if (cg.info() != Eigen::Success || !(res <= config.tolerance))
      throw SolverError("conjugate gradients did not converge in " +
                            std::to_string(config.max_iterations) + " iterations",
                        res);
    return x;
  }

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDL^T factorization failed", INFINITY);
  const Vector& D = ldlt.vectorD();
  const double dmax = D.cwiseAbs().maxCoeff();
  if (D.minCoeff() <= 1e-13 * dmax)
    throw SolverError("matrix is not positive definite (pivot breakdown)", INFINITY);
  Vector x = ldlt.solve(b);
  double res = relative_residual(A, x, b);
  for (int step = 0; step < 3 && res > config.tolerance; ++step) {
    x += ldlt.solve(b - A * x);
    res = relative_residual(A, x, b);
  }
  if (!(res <= config.tolerance)) throw SolverError("SPD solve missed tolerance", res);
  return x;
}

void SaddleSystem::validate() const {
  const auto n = A.rows();
  const auto m = B.rows();
  if (A.cols() != n) throw InputError("saddle: A must be square");
  if (m > 0 && B.cols() != n) throw InputError("saddle: B column count must match A");
  if (f.size() != n || g.size() != m) throw InputError("saddle: right-hand side size mismatch");
  for (const auto& c : primal_constraints)
    if (c.size() != n) throw InputError("saddle: primal constraint size mismatch");
  for (const auto& d : dual_constraints)
    if (d.size() != m) throw InputError("saddle: dual constraint size mismatch");
}

SparseMatrix SaddleSystem::kkt_matrix() const {
  validate();
  const auto n = primal_size(), m = dual_size();
  const auto N = total_size();
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * (primal_constraints.size() * n + dual_constraints.size() * m));
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  Eigen::Index row = n + m;
  for (const auto& c : primal_constraints) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (c(i) != 0.0) {
        t.emplace_back(row, i, c(i));
        t.emplace_back(i, row, c(i));
      }
    ++row;
  }
  for (const auto& d : dual_constraints) {
    for (Eigen::Index i = 0; i < m; ++i)
      if (d(i) != 0.0) {
        t.emplace_back(row, n + i, d(i));
        t.emplace_back(n + i, row, d(i));
      }
    ++row;
  }
  SparseMatrix K(N, N);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

// Dense constraint rows ruin the fill of a direct LU. When there are
// constraints, the unconstrained block matrix K0 is factored with one dof per
// constraint pinned (K0 + s E E^T), and the constraints and the pin removal
// are restored through a small dense bordered system. If that fails its
// self-check the full KKT matrix is factored instead.
struct SaddleFactorization::Impl {
  using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
  SparseMatrix K; // full KKT matrix, for residuals
  LU lu;
  Eigen::Index n = 0, m = 0, extra = 0;
  double tolerance = 1e-12;

  bool bordered = false;
  DenseMatrix W;   ///< constraint columns in the (n+m) block space
  DenseMatrix E;   ///< scaled pin columns
  DenseMatrix Z;   ///< K~^{-1} [W, -E]
  Eigen::PartialPivLU<DenseMatrix> S;

  // Solve K [z; a] = [r; h] exactly up to roundoff.
  Vector apply(const Vector& rhs) const {
    if (!bordered) return lu.solve(rhs);
    const Eigen::Index N0 = n + m, q = extra;
    const Vector w = lu.solve(rhs.head(N0));
    Vector b(2 * q);
    b.head(q) = W.transpose() * w - rhs.tail(q);
    b.tail(q) = E.transpose() * w;
    const Vector y = S.solve(b);
    Vector out(N0 + q);
    out.head(N0) = w - Z * y;
    out.tail(q) = y.head(q);
    return out;
  }

  bool try_bordered(const SaddleSystem& sys) {
    const Eigen::Index N0 = n + m, q = extra;
    W = DenseMatrix::Zero(N0, q);
    Eigen::Index col = 0;
    for (const auto& c : sys.primal_constraints) W.col(col++).head(n) = c;
    for (const auto& d : sys.dual_constraints) W.col(col++).tail(m) = d;

    SparseMatrix K0 = K.topLeftCorner(N0, N0);
    const double scale = K0.coeffs().cwiseAbs().maxCoeff();
    E = DenseMatrix::Zero(N0, q);
    std::vector<Eigen::Index> pins;
    for (Eigen::Index i = 0; i < q; ++i) {
      Eigen::Index j = 0;
      double best = -1.0;
      for (Eigen::Index r = 0; r < N0; ++r)
        if (std::abs(W(r, i)) > best && std::find(pins.begin(), pins.end(), r) == pins.end()) {
          best = std::abs(W(r, i));
          j = r;
        }
      pins.push_back(j);
      E(j, i) = std::sqrt(scale);
      K0.coeffRef(j, j) += scale;
    }
    K0.makeCompressed();
    lu.analyzePattern(K0);
    lu.factorize(K0);
    if (lu.info() != Eigen::Success) return false;

    DenseMatrix U(N0, 2 * q);
    U << W, -E;
    Z = DenseMatrix(N0, 2 * q);
    for (Eigen::Index i = 0; i < 2 * q; ++i) Z.col(i) = lu.solve(Vector(U.col(i)));
    DenseMatrix V(N0, 2 * q);
    V << W, E;
    DenseMatrix Sm = V.transpose() * Z;
    Sm.bottomRightCorner(q, q) += DenseMatrix::Identity(q, q);
    S.compute(Sm);
    if (!std::isfinite(Sm.norm()) || std::abs(S.determinant()) == 0.0) return false;
    bordered = true;

    // self-check on a fixed random right-hand side
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector rhs(N0 + q);
    for (auto& v : rhs) v = dist(rng);
    const double res = relative_residual(K, apply(rhs), rhs);
    if (std::isfinite(res) && res <= 1e-8) return true;
    bordered = false;
    return false;
  }
};

SaddleFactorization::SaddleFactorization(const SaddleSystem& system, const SolverConfig& config)
    : impl_(std::make_unique<Impl>()) {
  impl_->K = system.kkt_matrix();
  impl_->K.makeCompressed();
  impl_->n = system.primal_size();
  impl_->m = system.dual_size();
  impl_->extra = system.multiplier_count();
  impl_->tolerance = config.tolerance;
  if (impl_->extra > 0 && impl_->try_bordered(system)) return;
  impl_->lu.analyzePattern(impl_->K);
  impl_->lu.factorize(impl_->K);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("saddle factorization failed: " + impl_->lu.lastErrorMessage(), INFINITY);
}

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization&&) noexcept = default;
SaddleFactorization& SaddleFactorization::operator=(SaddleFactorization&&) noexcept = default;

SaddleSolution SaddleFactorization::solve(const Vector& f, const Vector& g) const {
  const auto& I = *impl_;
  if (f.size() != I.n || g.size() != I.m) throw InputError("saddle solve: right-hand side size mismatch");
  Vector rhs = Vector::Zero(I.n + I.m + I.extra);
  rhs.head(I.n) = f;
  rhs.segment(I.n, I.m) = g;
  SaddleSolution out;
  Vector z = Vector::Zero(rhs.size());
  if (rhs.norm() > 0.0) {
    z = I.apply(rhs);
    double res = relative_residual(I.K, z, rhs);
    for (int step = 0; step < 3 && res > I.tolerance; ++step) {
      z += I.apply(rhs - I.K * z);
      res = relative_residual(I.K, z, rhs);
    }
    if (!std::isfinite(res) || res > I.tolerance) throw SolverError("saddle solve missed tolerance", res);
    out.relative_residual = res;
  }
  out.primal = z.head(I.n);
  out.dual = z.segment(I.n, I.m);
  out.multipliers = z.tail(I.extra);
  return out;
}

SaddleSolution solve_saddle(const SaddleSystem& system, const SolverConfig& config) {
  return SaddleFactorization(system, config).solve(system.f, system.g);
}

namespace {

// Below this size a full dense eigendecomposition is cheaper than iterating.
constexpr Eigen::Index kDenseDirectSize = 100;

std::vector<EigenPair> dense_eigs(const SparseMatrix& A, const SparseMatrix& M, int k,
                                  const SolverConfig& config) {
  const DenseMatrix Md = DenseMatrix(M);
  const DenseMatrix K = DenseMatrix(A) - config.eigen_shift * Md;
  Eigen::LLT<DenseMatrix> llt(K);
  if (llt.info() != Eigen::Success) throw SolverError("eigen: shifted A is not positive definite", INFINITY);
  // C = L^{-1} M L^{-T}; its eigenvalues are mu = 1 / (lambda - shift).
  DenseMatrix C = llt.matrixL().solve(Md);
  C = llt.matrixL().solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(C);
  const auto& mu = es.eigenvalues();
  const double mu_max = mu.cwiseAbs().maxCoeff();
  int finite = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu(i) > 1e-12 * mu_max) ++finite;
  if (k > finite)
    throw InputError("eigen: requested " + std::to_string(k) + " eigenpairs but only " +
                     std::to_string(finite) + " finite eigenvalues exist");
  std::vector<EigenPair> out;
  for (int j = 0; j < k; ++j) {
    const Eigen::Index i = mu.size() - 1 - j;
    Vector x = llt.matrixU().solve(es.eigenvectors().col(i));
    x /= std::sqrt(mu(i));
    out.push_back({config.eigen_shift + 1.0 / mu(i), x});
  }
  return out;
}

// Block shift-invert subspace iteration with Rayleigh-Ritz in the M inner
// product. The block is re-M-orthonormalized every sweep (full
// reorthogonalization); rank deficiency of the block with respect to M
// shrinks it.
std::vector<EigenPair> subspace_iteration(const InverseOperator& op, const SparseMatrix& M, int k,
                                          const SolverConfig& config, const SparseMatrix* A) {
  const Eigen::Index n = M.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, std::max(2 * k, k + 8));
  auto apply = [&](const DenseMatrix& X) {
    DenseMatrix Y(n, X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) Y.col(j) = op(M * X.col(j));
    return Y;
  };

  std::mt19937 rng(20241018u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = dist(rng);
  DenseMatrix Z = apply(X);

  double worst = INFINITY;
  for (int sweep = 0; sweep < config.max_iterations; ++sweep) {
    DenseMatrix Q = Z;
    for (int pass = 0; pass < 2; ++pass) {
      DenseMatrix G = Q.transpose() * (M * Q);
      G = 0.5 * (G + G.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(G);
      const double gmax = es.eigenvalues().maxCoeff();
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < G.rows(); ++i)
        if (es.eigenvalues()(i) > 1e-13 * gmax) keep.push_back(i);
      DenseMatrix basis(n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j)
        basis.col(j) = Q * es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()(keep[j]));
      Q = std::move(basis);
    }
    if (Q.cols() < k)
      throw InputError("eigen: requested " + std::to_string(k) + " eigenpairs but only " +
                       std::to_string(Q.cols()) + " finite eigenvalues exist");

    const DenseMatrix W = apply(Q);
    DenseMatrix T = Q.transpose() * (M * W);
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(T);
    const Eigen::Index q = T.rows();
    DenseMatrix Y(q, q);
    Vector mu(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      mu(j) = es.eigenvalues()(q - 1 - j);
      Y.col(j) = es.eigenvectors().col(q - 1 - j);
    }
    X = Q * Y;
    Z = W * Y;

    worst = 0.0;
    for (int j = 0; j < k; ++j) {
      double r;
      const double lambda = config.eigen_shift + 1.0 / mu(j);
      if (A) {
        const Vector Ax = (*A) * X.col(j);
        r = (Ax - lambda * (M * X.col(j))).norm() / Ax.norm();
      } else {
        const Vector d = Z.col(j) - mu(j) * X.col(j);
        r = std::sqrt(std::max(0.0, d.dot(M * d))) / std::abs(mu(j));
      }
      worst = std::max(worst, r);
    }
    if (worst <= config.eigen_tolerance) {
      std::vector<EigenPair> out;
      for (int j = 0; j < k; ++j) out.push_back({config.eigen_shift + 1.0 / mu(j), X.col(j)});
      return out;
    }
  }
  throw SolverError("eigen: subspace iteration did not converge", worst);
}

} // namespace

std::vector<EigenPair> eig_smallest(const SparseMatrix& A, const SparseMatrix& M, int k,
                                    const SolverConfig& config) {
  if (A.rows() != A.cols() || M.rows() != A.rows() || M.cols() != A.cols())
    throw InputError("eigen: A and M must be square of equal size");
  if (k < 1) throw InputError("eigen: k must be positive");
  if (k > A.rows()) throw InputError("eigen: k exceeds the problem dimension");
  if (A.rows() < kDenseDirectSize) return dense_eigs(A, M, k, config);

  const SparseMatrix K = A - config.eigen_shift * M;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    throw SolverError("eigen: shifted A is not positive definite", INFINITY);
  try {
    return subspace_iteration([&](const Vector& b) -> Vector { return ldlt.solve(b); }, M, k, config, &A);
  } catch (const SolverError&) {
    if (A.rows() >= config.dense_threshold) throw;
    return dense_eigs(A, M, k, config);
  }
}

std::vector<EigenPair> eig_smallest(const InverseOperator& apply_inverse, const SparseMatrix& M,
                                    int k, const SolverConfig& config) {
  if (M.rows() != M.cols()) throw InputError("eigen: M must be square");
  if (k < 1) throw InputError("eigen: k must be positive");
  if (k > M.rows()) throw InputError("eigen: k exceeds the problem dimension");
  return subspace_iteration(apply_inverse, M, k, config, nullptr);
}

} // namespace ecrfem
