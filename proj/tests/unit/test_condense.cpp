#include "helpers.hpp"

#include <doctest.h>

using namespace ecrfem;

TEST_CASE("condensed and monolithic ECR solutions agree") {
  std::mt19937 rng(41);
  for (int n = 2; n <= 3; ++n) {
    const auto m = refine_hierarchy(build_box_mesh(n, 1), n == 2 ? 3 : 1).back();
    for (const auto& f : {testutil::random_p0_load(m, rng), ScalarLoad::function(sine_solution(n).f)}) {
      const auto mono = solve_poisson(m, f, Family::ECR);
      const auto cond = solve_ecr_condensed(m, f);
      const Vector d = mono.coefficients() - cond.ecr.coefficients();
      CHECK(d.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, mono.coefficients().cwiseAbs().maxCoeff()));
    }
    const auto rep = hierarchical_coupling(m);
    CHECK(rep.bubble_p1 <= 1e-13);
    CHECK(rep.bubble_bubble <= 1e-13);
  }
}

TEST_CASE("bubble coefficients of a constant load") {
  const auto m = build_box_mesh(2, 1);
  const auto s = solve_ecr_condensed(m, ScalarLoad::constant(1.0));
  // each cell is a scaled reference triangle with |K| = 1/2 and H = 4
  for (std::size_t c = 0; c < m.num_cells(); ++c) CHECK(s.bubble(c) == doctest::Approx(1.0 / 36.0));
}
