#include <cmath>

#include "doctest.h"
#include "olp/dyadic.hpp"

using namespace olp;

TEST_CASE("dyadic space sizes") {
  const auto X = build_dyadic_space(1, 3);
  CHECK(X.num_cells() == 8);
  CHECK(X.num_gensets() == 15);  // 8 + 4 + 2 + 1
  const auto Y = build_dyadic_space(2, 2);
  CHECK(Y.num_cells() == 16);
  CHECK(Y.num_gensets() == 21);  // 16 + 4 + 1
  for (const auto& G : Y.gensets) CHECK(G.sigma == doctest::Approx(double(G.members.size())));
}

TEST_CASE("a cube's measure is its volume") {
  const auto X = build_dyadic_space(1, 4);
  for (const auto& G : X.gensets)
    CHECK(outer_measure(X, G.members, SolveMode::Exact).value == doctest::Approx(G.sigma));
}

TEST_CASE("classical Lp by hand") {
  const std::vector<double> f{1.0, 2.0, 2.0, 0.0}, w{1.0, 1.0, 0.5, 1.0};
  CHECK(classical_lp(f, w, 1.0) == doctest::Approx(4.0));
  CHECK(classical_lp(f, w, 2.0) == doctest::Approx(std::sqrt(7.0)));
  CHECK(classical_lp(f, w, kInf) == doctest::Approx(2.0));
}

TEST_CASE("outer Lp with the averaging size equals classical Lp") {
  const auto X = build_dyadic_space(1, 5);
  Rng r(17);
  std::vector<double> f(X.num_cells());
  for (auto& v : f) v = std::abs(r.normal());
  const std::vector<double> w(f.size(), 1.0);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const auto n = lp_norm(X, SizeSpec::avg_l1(), Field::from_real(f), p);
    const double cl = classical_lp(f, w, p);
    CHECK(std::abs(n.value - cl) <= (n.upper - n.lower) + 1e-10);
  }
  CHECK(lp_norm(X, SizeSpec::avg_l1(), Field::from_real(f), kInf).value ==
        doctest::Approx(classical_lp(f, w, kInf)));
}

TEST_CASE("dyadic cubes split any union of cells additively") {
  const auto X = build_dyadic_space(1, 4);
  const std::vector<int> F{0, 1, 5, 6, 7, 12};
  for (const auto& G : X.gensets) {
    const auto m = caratheodory_split(X, G.members, F);
    CHECK(std::abs(m.deficit) < 1e-12);
  }
}

TEST_CASE("cube ids") {
  DyadicGrid g{1, 3};
  CHECK(dyadic_cube_id(g, 0, {0}) == 0);
  CHECK(dyadic_cube_id(g, 0, {7}) == 7);
  CHECK(dyadic_cube_id(g, 1, {0}) == 8);
  CHECK(dyadic_cube_id(g, 3, {0}) == 14);
}

TEST_CASE("bad dimensions are input errors") {
  CHECK_THROWS_AS(build_dyadic_space(0, 3), InputError);
  CHECK_THROWS_AS(build_dyadic_space(1, -1), InputError);
}
