#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ecrfem;

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

TEST_CASE("box eigenvalues") {
  const auto e2 = box_dirichlet_eigenvalues(2, 4);
  CHECK(e2[0] == doctest::Approx(2 * pi2));
  CHECK(e2[1] == doctest::Approx(5 * pi2));
  CHECK(e2[2] == doctest::Approx(5 * pi2));
  CHECK(e2[3] == doctest::Approx(8 * pi2));
  CHECK(box_dirichlet_eigenvalues(3, 2)[1] == doctest::Approx(6 * pi2));
}

TEST_CASE("fixtures are consistent") {
  for (int n = 2; n <= 3; ++n) {
    const auto s = sine_solution(n);
    const Vec x = Vec::Constant(n, 0.3);
    CHECK(s.f(x) == doctest::Approx(n * pi2 * s.u(x)));
    const auto e = box_eigenfunction(n);
    CHECK(e.eigenvalue == doctest::Approx(n * pi2));
    const auto p = paraboloid_solution(n);
    CHECK(p.f(x) == doctest::Approx(-2.0 * n));
    CHECK(p.gradient(x)(0) == doctest::Approx(0.6));
  }
}

TEST_CASE("the sine fixture gradient has energy pi^2 / 2 in 2D") {
  const auto s = sine_solution(2);
  const auto mesh = refine_hierarchy(build_box_mesh(2, 2), 2).back();
  double e = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& [x, w] : cell_points(mesh.cell_geometry(c), kLoadDegree)) e += w * s.gradient(x).squaredNorm();
  CHECK(e == doctest::Approx(pi2 / 2).epsilon(1e-9));
}

TEST_CASE("Poisson errors decrease under refinement") {
  const auto sol = sine_solution(2);
  const auto f = ScalarLoad::function(sol.f);
  const auto meshes = refine_hierarchy(build_box_mesh(2, 2), 3);
  for (Family fam : {Family::ECR, Family::CR}) {
    std::vector<double> err;
    for (const auto& m : meshes) err.push_back(broken_h1_error(solve_poisson(m, f, fam), sol.gradient));
    const auto fit = fit_rate({err.end() - 3, err.end()});
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("Neumann paraboloid: RT and ECR are exact, CR is not") {
  const auto sol = paraboloid_solution(2);
  const BoundaryFlux g = [&](const Vec& x, const Vec& nu) { return sol.gradient(x).dot(nu); };
  const auto f = ScalarLoad::constant(-4.0);
  for (const auto& m : refine_hierarchy(build_box_mesh(2, 1), 2)) {
    const auto rt = solve_neumann(m, f, g, NeumannForm::MixedRT);
    REQUIRE(rt.sigma.has_value());
    CHECK(rt_error(*rt.sigma, sol.gradient) < 1e-10);
    const auto ecr = solve_neumann(m, f, g, NeumannForm::PrimalECR);
    CHECK(broken_h1_error(ecr.u, sol.gradient) < 1e-10);
    const auto cr = solve_neumann(m, f, g, NeumannForm::PrimalCR);
    CHECK(broken_h1_error(cr.u, sol.gradient) > 0.1 * m.h());
  }
}

TEST_CASE("coarse criss-cross eigenvalues") {
  const auto m = build_box_mesh(2, 1, BoxVariant::CrissCross);
  CHECK(solve_eigen(m, EigenFormulation::CR, 1)[0].value == doctest::Approx(24.0).epsilon(2e-5));
  CHECK(solve_eigen(m, EigenFormulation::ECR, 1)[0].value == doctest::Approx(17.1429).epsilon(3e-5));
}

TEST_CASE("ECR eigenvalues lie below CR eigenvalues") {
  for (int n = 2; n <= 3; ++n) {
    const auto m = refine_uniform(build_box_mesh(n, 1));
    const auto ecr = solve_eigen(m, EigenFormulation::ECR, 3);
    const auto cr = solve_eigen(m, EigenFormulation::CR, 3);
    for (int i = 0; i < 3; ++i) CHECK(ecr[i].value <= cr[i].value * (1 + 1e-12));
  }
}

TEST_CASE("eigenfunctions are normalized and eigen residuals vanish") {
  const auto m = refine_uniform(build_box_mesh(2, 2));
  const auto sys = assemble_eigen(m, Family::ECR, MassKind::Full);
  const auto modes = solve_eigen(m, EigenFormulation::ECR, 2);
  for (const auto& mode : modes) {
    const Vector& x = mode.u.coefficients();
    CHECK(x.dot(sys.M * x) == doctest::Approx(1.0));
    CHECK((sys.A * x - mode.value * (sys.M * x)).norm() < 1e-8 * mode.value);
    CHECK(cell_averages(mode.u).maxCoeff() > 0.0);
  }
}

TEST_CASE("eigen formulations parse") {
  CHECK(parse_eigen_formulation("rt") == EigenFormulation::RTMixed);
  CHECK(to_string(parse_eigen_formulation("rt-equiv")) == "rt-equiv");
  CHECK_THROWS_AS(parse_eigen_formulation("p2"), InputError);
  CHECK_THROWS_AS(solve_eigen(build_box_mesh(2, 1), EigenFormulation::ECR, 0), InputError);
}
