#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "olp/gentents.hpp"

using namespace olp;

namespace {

Upper3Grid grid3() {
  Upper3Grid g;
  g.Y = 2.0;
  g.dy = 0.25;
  g.H = 4.0;
  g.deta = 0.25;
  g.kmin = -2;
  g.kmax = 1;
  return g;
}

std::vector<int> brute(const Upper3Grid& g, const std::function<bool(double, double, double)>& in) {
  std::vector<int> out;
  for (int q = 0; q < g.nt(); ++q)
    for (int l = 0; l < g.neta(); ++l)
      for (int j = 0; j < g.ny(); ++j)
        if (in(g.y(j), g.eta(l), g.t(q))) out.push_back(static_cast<int>(g.index(j, l, q)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("grid geometry") {
  const auto g = grid3();
  CHECK(g.ny() == 16);
  CHECK(g.neta() == 32);
  CHECK(g.nt() == 4);
  CHECK(g.t(0) == doctest::Approx(0.25));
  CHECK(g.dt(0) == doctest::Approx(0.25 / std::sqrt(2.0)));
  CHECK(g.eta(0) == doctest::Approx(-3.875));
}

TEST_CASE("closed generalized tent membership") {
  const GenTentParams p{1.0, 0.5, 0.25};
  const GenTent T{0.0, 1.0, 2.0};
  CHECK(in_gentent(p, T, 0.0, 1.0 - 0.25, 1.0));  // |alpha (eta - xi) + beta / t| = |-1.25 + 0.5| <= 1
  CHECK(in_gentent(p, T, 1.0, 1.0, 1.0));         // |y - x| = s - t, closed
  CHECK_FALSE(in_gentent(p, T, 1.01, 1.0, 1.0));
  CHECK_FALSE(in_gentent(p, T, 0.0, 1.0, 2.5));
  CHECK(in_btent(0.25, T, 0.0, 1.0 + 0.25, 1.0));
  CHECK_FALSE(in_btent(0.25, T, 0.0, 1.0 + 0.26, 1.0));
}

TEST_CASE("level rectangles agree with brute force membership") {
  const auto g = grid3();
  Rng r(2);
  for (int trial = 0; trial < 40; ++trial) {
    const GenTentParams p{r.uniform(0.5, 1.5), 0.0, 0.0};
    GenTentParams q = p;
    q.beta = r.uniform(-p.alpha, p.alpha);
    q.b = r.uniform(0.05, q.alpha / 2);
    const GenTent T{r.uniform(-2.5, 2.5), r.uniform(-3, 3), std::exp2(r.uniform(-2, 1.5))};
    auto got = rect_cells(g, gentent_rects(g, q, T));
    std::sort(got.begin(), got.end());
    CHECK(got == brute(g, [&](double y, double e, double t) { return in_gentent(q, T, y, e, t); }));
    auto gb = rect_cells(g, btent_rects(g, q.b, T));
    std::sort(gb.begin(), gb.end());
    CHECK(gb == brute(g, [&](double y, double e, double t) { return in_btent(q.b, T, y, e, t); }));
  }
}

TEST_CASE("lattice points") {
  TentLattice lat;
  lat.params = {1.0, 0.0, 0.25};
  lat.cx = 0.5;
  lat.cxi = 0.125;
  const auto T = lat.point(1, 3, -2);
  CHECK(T.x == doctest::Approx(0.5 * 2 * 3));
  CHECK(T.xi == doctest::Approx(0.125 * 0.5 * 0.25 * -2));
  CHECK(T.s == doctest::Approx(2.0));
  const auto g = grid3();
  lat.kmin = -2;
  lat.kmax = 1;
  const auto pts = lat.enumerate(g);
  CHECK(!pts.empty());
  for (const auto& pt : pts) CHECK(!rect_cells(g, gentent_rects(g, lat.params, pt.tent)).empty());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((GenTentParams{1.0, 1.5, 0.25}.validate()), InputError);
  CHECK_THROWS_AS((GenTentParams{1.0, 0.0, 1.5}.validate()), InputError);
  CHECK_NOTHROW((GenTentParams{1.0, 0.5, 0.25}.validate()));
}

TEST_CASE("central containment on random inputs") {
  TentLattice lat;
  lat.params = {0.5, 0.25, 1.0 / 256};
  Rng r(4);
  for (int i = 0; i < 300; ++i) {
    const double xp = r.uniform(-50, 50), xip = r.uniform(-50, 50), sp = std::exp2(r.uniform(-5, 3));
    const auto c = check_central_containment(xp, xip, sp, lat, 32, r);
    CHECK(c.all());
  }
}

TEST_CASE("eta split") {
  const auto g = grid3();
  CHECK(eta_split(g, -100.0) == 0);
  CHECK(eta_split(g, 100.0) == g.neta());
  CHECK(g.eta(eta_split(g, 0.1)) >= 0.1);
  CHECK(g.eta(eta_split(g, 0.1) - 1) < 0.1);
}

TEST_CASE("lattice measure dominates the continuum measure") {
  const auto g = grid3();
  TentLattice lat;
  lat.params = {1.0, 0.0, 0.25};
  lat.cx = 0.25;
  lat.cxi = 0.25;
  lat.kmin = -2;
  lat.kmax = 1;
  const auto L = build_gentent_space(g, lat);
  std::vector<GenTent> tips;
  for (const auto& T : L.tents) tips.push_back(T);
  Rng r(8);
  for (int i = 0; i < 40; ++i) tips.push_back({r.uniform(-2, 2), r.uniform(-3, 3), std::exp2(r.uniform(-2, 1))});
  const auto C = build_gentent_space(g, lat.params, tips);
  const auto rep = measure_equivalence_check(C, L, 6, 3, SolveMode::Exact);
  CHECK(rep.exact_samples == rep.samples);
  CHECK(rep.lower_ok);
  CHECK(rep.max_ratio >= 1.0 - 1e-12);
}

TEST_CASE("S^b of a constant field on one tent") {
  const auto g = grid3();
  const GenTentParams p{1.0, 0.0, 0.25};
  const GenTent T{0.0, 0.0, 1.0};
  std::vector<double> F(static_cast<std::size_t>(g.num_cells()), 0.0);
  const auto cells = rect_cells(g, gentent_rects(g, p, T));
  const auto inner = rect_cells(g, btent_rects(g, p.b, T));
  for (int c : cells) F[c] = 3.0;
  double l2 = 0.0;
  for (int q = 0; q < g.nt(); ++q)
    for (int c : cells)
      if (c / (g.ny() * g.neta()) == q && std::find(inner.begin(), inner.end(), c) == inner.end())
        l2 += 9.0 * g.weight(q);
  CHECK(sb_value(g, p, T, F) == doctest::Approx(std::sqrt(l2 / T.s) + 3.0));
}
