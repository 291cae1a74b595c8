#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace ecrfem;

namespace {

void check_topology(const SimplexMesh& m) {
  const int n = m.dim();
  double boundary = 0.0;
  for (std::size_t f = 0; f < m.num_facets(); ++f) {
    const auto cells = m.facet_cells(f);
    const auto local = m.facet_local_index(f);
    REQUIRE(cells[0] >= 0);
    CHECK(m.cell_facets(cells[0])[local[0]] == static_cast<int>(f));
    const double s0 = m.cell_facet_signs(cells[0])[local[0]];
    // nu_E is the outward normal of the first cell times its sign.
    const Vec out0 = m.cell_geometry(cells[0]).outward_normal(local[0]);
    CHECK((s0 * out0 - m.facet_geometry(f).normal).norm() < 1e-13);
    if (m.is_boundary(f)) {
      boundary += m.facet_geometry(f).measure;
    } else {
      CHECK(m.cell_facets(cells[1])[local[1]] == static_cast<int>(f));
      CHECK(m.cell_facet_signs(cells[1])[local[1]] == -s0);
    }
  }
  // |boundary of the unit box| = 2n
  CHECK(boundary == doctest::Approx(2.0 * n).epsilon(1e-12));
  CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-13));
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& g = m.cell_geometry(c);
    CHECK(g.measure > 0.0);
    Vec s = Vec::Zero(n);
    for (const auto& gl : g.barycentric_gradients) s += gl;
    CHECK(s.norm() < 1e-12);
    CHECK(g.diameter <= m.h() + 1e-15);
  }
}

} // namespace

TEST_CASE("box meshes have the expected counts and consistent incidence") {
  const auto d = build_box_mesh(2, 3, BoxVariant::Diagonal);
  CHECK(d.num_cells() == 18);
  CHECK(d.num_vertices() == 16);
  CHECK(d.num_facets() == 33);
  CHECK(d.num_boundary_facets() == 12);
  check_topology(d);

  const auto x = build_box_mesh(2, 2, BoxVariant::CrissCross);
  CHECK(x.num_cells() == 16);
  CHECK(x.num_vertices() == 13);
  check_topology(x);

  const auto c = build_box_mesh(3, 2);
  CHECK(c.num_cells() == 48);
  CHECK(c.num_vertices() == 27);
  CHECK(c.num_boundary_facets() == 48);
  check_topology(c);
}

TEST_CASE("uniform refinement") {
  for (int n = 2; n <= 3; ++n) {
    const auto coarse = build_box_mesh(n, 1, n == 2 ? BoxVariant::CrissCross : BoxVariant::Diagonal);
    const auto levels = refine_hierarchy(coarse, 2);
    REQUIRE(levels.size() == 3);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      const auto& parent = levels[l - 1];
      const auto& fine = levels[l];
      const std::size_t k = std::size_t{1} << n;
      CHECK(fine.num_cells() == k * parent.num_cells());
      CHECK(fine.h() <= parent.h() / 2 + 1e-14);
      check_topology(fine);
      // children of cell c are [c k, (c+1) k) and lie inside c
      for (std::size_t c = 0; c < fine.num_cells(); ++c) {
        const auto& pg = parent.cell_geometry(c / k);
        const auto lam = pg.barycentric(fine.cell_geometry(c).centroid);
        CHECK(lam.minCoeff() > -1e-12);
      }
      for (std::size_t c = 0; c < parent.num_cells(); ++c) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += fine.cell_geometry(c * k + j).measure;
        CHECK(sum == doctest::Approx(parent.cell_geometry(c).measure).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("3D refinement keeps the cells shape regular") {
  auto m = build_box_mesh(3, 1);
  double ratio0 = 0.0;
  for (int l = 0; l < 3; ++l) {
    double worst = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const auto& g = m.cell_geometry(c);
      worst = std::max(worst, std::pow(g.diameter, 3) / g.measure);
    }
    if (l == 0) ratio0 = worst;
    CHECK(worst <= 2.0 * ratio0);
    m = refine_uniform(m);
  }
}

TEST_CASE("mesh text round trip is lossless") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  const auto base = build_box_mesh(2, 2);
  std::vector<Vec> v = base.vertices();
  for (auto& x : v) x += testutil::vec({d(rng), d(rng)}) / 3.0;
  std::vector<int> cells;
  for (std::size_t c = 0; c < base.num_cells(); ++c)
    for (int i : base.cell(c)) cells.push_back(i);
  const SimplexMesh m(2, v, cells);
  const auto back = read_mesh(write_mesh(m));
  REQUIRE(back.num_vertices() == m.num_vertices());
  for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(back.vertex(i) == m.vertex(i));
  CHECK(write_mesh(back) == write_mesh(m));
}

TEST_CASE("malformed meshes are rejected") {
  CHECK_THROWS_AS(read_mesh("2 3"), InputError);
  CHECK_THROWS_AS(read_mesh("2 3 1\n0 0\n1 0\n0 1\n0 1 5\n"), InputError);
  CHECK_THROWS_AS(read_mesh("2 3 1\n0 0\n1 0\n2 0\n0 1 2\n"), InputError);
  CHECK_THROWS_AS(read_mesh("5 1 0\n0 0 0 0 0\n"), InputError);
  CHECK_THROWS_AS(read_mesh_file("/nonexistent/mesh.txt"), InputError);
  CHECK_THROWS_AS(parse_box_variant("hexagonal"), InputError);
  CHECK_NOTHROW(read_mesh("2 3 1\n0 0\n1 0\n0 1\n0 2 1\n"));
}

TEST_CASE("negatively oriented cells are reordered") {
  const auto m = read_mesh("2 3 1\n0 0\n1 0\n0 1\n0 2 1\n");
  CHECK(m.cell_geometry(0).measure == doctest::Approx(0.5));
  CHECK(m.num_boundary_facets() == 3);
}
