#include "helpers.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace ecrfem;

namespace {

void check_report(const IdentityReport& rep, double tol) {
  INFO(rep.identity << " level " << rep.level);
  CHECK(rep.passed);
  for (const auto& r : rep.residuals) {
    INFO(r.name);
    CHECK(r.relative <= tol);
  }
}

} // namespace

TEST_CASE("ECR and RT mixed Poisson coincide for piecewise-constant loads") {
  std::mt19937 rng(31);
  for (int n = 2; n <= 3; ++n) {
    auto m = build_box_mesh(n, 1);
    for (int l = 0; l < (n == 2 ? 3 : 2); ++l, m = refine_uniform(m)) {
      const auto rep = check_poisson_identity(m, testutil::random_p0_load(m, rng));
      check_report(rep, 1e-11);
      CHECK(rep.max_normal_jump <= 1e-12);
    }
  }
}

TEST_CASE("Stokes identity holds with and without constant loads") {
  std::mt19937 rng(32);
  const auto m = refine_uniform(build_box_mesh(2, 1, BoxVariant::CrissCross));
  check_report(check_stokes_identity(m, constant_vector_load({1.0, 0.0})), 1e-10);
  check_report(check_stokes_identity(m, testutil::random_p0_vector_load(m, rng)), 1e-10);
  const auto m3 = build_box_mesh(3, 1);
  check_report(check_stokes_identity(m3, testutil::random_p0_vector_load(m3, rng)), 1e-10);
}

TEST_CASE("Marini and CGS postprocessing reproduce the RT solutions") {
  std::mt19937 rng(33);
  auto m = build_box_mesh(2, 1);
  for (int l = 0; l < 3; ++l, m = refine_uniform(m)) {
    check_report(check_marini_identity(m, testutil::random_p0_load(m, rng)), 1e-11);
    check_report(check_cgs_identity(m, testutil::random_p0_vector_load(m, rng)), 1e-11);
  }
  const auto m3 = refine_uniform(build_box_mesh(3, 1));
  check_report(check_marini_identity(m3, testutil::random_p0_load(m3, rng)), 1e-11);
  CHECK_THROWS_AS(check_cgs_identity(build_box_mesh(3, 1), constant_vector_load({1, 0, 0})), InputError);
}

TEST_CASE("CGS correction closed form agrees with quadrature") {
  std::mt19937 rng(34);
  for (int t = 0; t < 10; ++t) {
    const auto g = make_cell_geometry(testutil::random_vertices(2, rng));
    const Vec f = testutil::vec({0.7, -1.3});
    CHECK((cgs_correction(g, f) - cgs_correction_quadrature(g, f)).norm() < 1e-13 * f.norm());
  }
}

TEST_CASE("eigen equivalence") {
  const auto m = refine_uniform(build_box_mesh(2, 1, BoxVariant::CrissCross));
  const auto rep = check_eigen_equivalence(m, 3);
  check_report(rep, 1e-9);
}

TEST_CASE("equivalence checks refuse non-constant loads") {
  const auto m = build_box_mesh(2, 1);
  const auto f = ScalarLoad::function([](const Vec& x) { return x(0); });
  CHECK_THROWS_AS(check_poisson_identity(m, f), InputError);
  CHECK_THROWS_AS(check_marini_identity(m, f), InputError);
}

TEST_CASE("CR gradients are not H(div) conforming") {
  const auto m = refine_uniform(build_box_mesh(2, 1));
  const auto u = solve_poisson(m, ScalarLoad::constant(1.0), Family::CR);
  CHECK(max_normal_jump(u) > 1e-3);
  CHECK_THROWS_AS(ecr_gradient_as_rt(u), InputError);
}

TEST_CASE("P0 projection and reports") {
  const auto m = build_box_mesh(2, 2);
  const auto p = project_p0(m, [](const Vec& x) { return x(0) + 2 * x(1); });
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Vec& mid = m.cell_geometry(c).centroid;
    CHECK(p.cell_average(c) == doctest::Approx(mid(0) + 2 * mid(1)));
  }

  IdentityReport rep;
  rep.identity = "demo";
  rep.add("zero", 0.0, 0.0, 1e-9);
  rep.add("bad", 1e-3, 1.0, 1e-9);
  CHECK_FALSE(rep.passed);
  CHECK(rep.residual("zero").passed);
  CHECK_FALSE(rep.notes.empty());
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["identity"] == "demo");
  CHECK(j["residuals"].size() == 2);
  CHECK(j["passed"] == false);
}
