#include <cmath>

#include "doctest.h"
#include "olp/tents.hpp"

using namespace olp;

namespace {

UpperHalfPlaneGrid small_grid() {
  UpperHalfPlaneGrid g;
  g.Y = 2.0;
  g.dy = 0.25;
  g.levels = 4;
  g.t_max = 1.0;
  g.per_octave = 2;
  return g;
}

}  // namespace

TEST_CASE("open tent membership") {
  const Tent T{0.0, 1.0};
  CHECK(T.contains(0.0, 0.5));
  CHECK(T.contains(0.4, 0.5));
  CHECK_FALSE(T.contains(0.5, 0.5));  // on the edge
  CHECK_FALSE(T.contains(0.0, 1.0));  // at the tip height
}

TEST_CASE("tilted tents move the tip") {
  const TiltedTent T{0.0, 1.0, 0.5, 0.5};
  CHECK(T.tip_x() == doctest::Approx(0.5));
  CHECK(T.tip_t() == doctest::Approx(0.5));
  CHECK(T.contains(0.25, 0.25));  // (z - alpha u / beta, u / beta) = (0, 0.5)
  CHECK_FALSE(T.contains(-0.5, 0.25));
  const TiltedTent U{0.0, 1.0, 0.0, 1.0};
  for (double y : {-0.7, 0.0, 0.3})
    for (double t : {0.1, 0.5, 0.9}) CHECK(U.contains(y, t) == Tent{0.0, 1.0}.contains(y, t));
}

TEST_CASE("grid geometry") {
  const auto g = small_grid();
  CHECK(g.ny() == 16);
  CHECK(g.y(0) == doctest::Approx(-1.875));
  CHECK(g.t(2) == doctest::Approx(0.5));
  CHECK(g.weight() == doctest::Approx(0.25 * std::log(2.0) / 2));
  UpperHalfPlaneGrid bad = g;
  bad.dy = 0.3;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("sigma of a tent is its height and mu(T) = sigma(T)") {
  const auto g = small_grid();
  const auto ts = build_tent_space(g, default_tip_lattice(g));
  CHECK(ts.space.num_gensets() > 0);
  int checked = 0;
  for (const auto& G : ts.space.gensets) {
    CHECK(G.sigma == doctest::Approx(ts.tents[G.id].s));
    if (G.id % 7 == 0) {
      CHECK(outer_measure(ts.space, G.members, SolveMode::Exact).value == doctest::Approx(G.sigma));
      ++checked;
    }
  }
  CHECK(checked > 3);
}

TEST_CASE("tents are not Caratheodory measurable") {
  const auto g = small_grid();
  const auto ts = build_tent_space(g, default_tip_lattice(g));
  const auto w = non_measurability_witness(ts);
  CHECK(w.found);
  CHECK(w.deficit > 0.0);
  CHECK(w.mu_in + w.mu_out - w.mu_T == doctest::Approx(w.deficit));
}

TEST_CASE("sparse tips are a subset of the default tips") {
  const auto g = small_grid();
  const auto all = default_tip_lattice(g);
  const auto sp = sparse_tip_lattice(g, 2.0);
  CHECK(sp.size() <= all.size());
  for (const auto& t : sp) {
    bool hit = false;
    for (const auto& u : all) hit = hit || (u.x == t.x && u.s == t.s);
    CHECK(hit);
  }
  CHECK_THROWS_AS(sparse_tip_lattice(g, 1.5), InputError);
}

TEST_CASE("shadow length merges overlapping intervals") {
  const auto g = small_grid();
  const auto ts = build_tent_space(g, {{0.0, 1.0}, {0.5, 1.0}, {-1.625, 0.5}});
  REQUIRE(ts.tents.size() == 3);
  CHECK(shadow_length(ts, {0, 1}) == doctest::Approx(2.5));
  // [-2.125, -1.125] and [-1, 1] stay apart
  CHECK(shadow_length(ts, {0, 2}) == doctest::Approx(3.0));
}

TEST_CASE("tent sizes") {
  CHECK(size_Sp(kInf).kind == SizeKind::AvgLinf);
  CHECK(size_Sp(2.0).kind == SizeKind::AvgL2);
  const auto g = small_grid();
  const auto ts = build_tent_space(g, {{0.0, 1.0}});
  std::vector<double> f(ts.space.num_cells(), 0.0);
  double mass = 0.0;
  for (int c : ts.space.gensets[0].members) {
    f[c] = 2.0;
    mass += 4.0 * ts.space.cells[c].weight;
  }
  CHECK(size_value(ts.space, size_Sp(2.0), 0, f) == doctest::Approx(std::sqrt(mass / 1.0)));
  CHECK(size_value(ts.space, size_Sp(kInf), 0, f) == doctest::Approx(2.0));
}

TEST_CASE("tilted spaces reject bad parameters") {
  const auto g = small_grid();
  CHECK_THROWS_AS(build_tilted_tent_space(g, default_tip_lattice(g), 0.5, 0.0), InputError);
  CHECK_THROWS_AS(build_tilted_tent_space(g, default_tip_lattice(g), 2.0, 0.5), InputError);
}
