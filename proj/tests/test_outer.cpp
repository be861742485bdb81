#include <cmath>

#include "doctest.h"
#include "olp/dyadic.hpp"
#include "olp/outer.hpp"

using namespace olp;

namespace {

// Three cells; gensets {0}, {1}, {2}, {0,1}, {0,1,2} with hand-picked sigmas.
OuterSpace toy() {
  OuterSpace s;
  for (int c = 0; c < 3; ++c) s.cells.push_back({c, {double(c)}, 1.0});
  s.gensets = {{0, {0}, 1.0}, {1, {1}, 1.0}, {2, {2}, 1.0}, {3, {0, 1}, 1.5}, {4, {0, 1, 2}, 2.5}};
  s.finalize();
  return s;
}

}  // namespace

TEST_CASE("extended real arithmetic saturates and keeps 0 * inf = 0") {
  CHECK(sat_add(1.0, kInf) == kInf);
  CHECK(sat_mul(0.0, kInf) == 0.0);
  CHECK(sat_mul(kInf, 0.0) == 0.0);
  CHECK(sat_mul(2.0, 3.0) == 6.0);
}

TEST_CASE("outer measure of small targets, exact and greedy") {
  const auto s = toy();
  CHECK(outer_measure(s, {0}, SolveMode::Exact).value == doctest::Approx(1.0));
  CHECK(outer_measure(s, {0, 1}, SolveMode::Exact).value == doctest::Approx(1.5));
  CHECK(outer_measure(s, {0, 1, 2}, SolveMode::Exact).value == doctest::Approx(2.5));
  CHECK(outer_measure(s, {}, SolveMode::Exact).value == 0.0);
  for (auto t : std::vector<std::vector<int>>{{0}, {1, 2}, {0, 2}, {0, 1, 2}}) {
    const double ex = outer_measure(s, t, SolveMode::Exact).value;
    const double gr = outer_measure(s, t, SolveMode::Greedy).value;
    CHECK(gr >= ex - 1e-12);
  }
}

TEST_CASE("outer measure is monotone and countably subadditive on the toy space") {
  const auto s = toy();
  const double a = outer_measure(s, {0}, SolveMode::Exact).value;
  const double b = outer_measure(s, {2}, SolveMode::Exact).value;
  const double ab = outer_measure(s, {0, 2}, SolveMode::Exact).value;
  CHECK(ab <= a + b + 1e-12);
  CHECK(ab >= a - 1e-12);
}

TEST_CASE("super level measure: zero above the sup, everything far below") {
  const auto s = toy();
  const auto F = Field::from_real({1.0, 2.0, 4.0});
  CHECK(super_level_measure(s, SizeSpec::avg_l1(), F, 5.0, SolveMode::Exact).value == 0.0);
  // at tiny lambda every cell must be removed
  const auto r = super_level_measure(s, SizeSpec::avg_l1(), F, 1e-9, SolveMode::Exact);
  CHECK(r.value == doctest::Approx(2.5));
  CHECK(r.status == SolveStatus::Exact);
}

TEST_CASE("sizes apply the modulus first") {
  const auto s = toy();
  Field F(3, cplx(0.0, -2.0));
  // genset 4 holds three unit cells under sigma 2.5
  CHECK(size_value(s, SizeSpec::avg_l1(), 4, F.abs()) == doctest::Approx(6.0 / 2.5));
  CHECK(size_value(s, SizeSpec::avg_linf(), 4, F.abs()) == doctest::Approx(2.0));
}

TEST_CASE("avg-Lp size by hand") {
  const auto s = toy();
  const std::vector<double> f{1.0, 2.0, 0.0};
  // genset 3: sigma 1.5, cells 0 and 1 of weight 1: (1/1.5 (1 + 4))^{1/2}
  CHECK(size_value(s, SizeSpec::avg_l2(), 3, f) == doctest::Approx(std::sqrt(5.0 / 1.5)));
  CHECK(size_value(s, SizeSpec::avg_l1(), 3, f) == doctest::Approx(3.0 / 1.5));
}

TEST_CASE("outer essential supremum") {
  const auto s = toy();
  const auto F = Field::from_real({1.0, 3.0, 2.0});
  CHECK(outer_essential_sup(s, SizeSpec::avg_linf(), F) == doctest::Approx(3.0));
}

TEST_CASE("classical coincidence for avg-L1 on dyadic cubes") {
  const auto X = build_dyadic_space(1, 4);
  std::vector<double> f(X.num_cells());
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = 1.0 + double(c % 3);
  const std::vector<double> w(f.size(), 1.0);
  for (double p : {1.0, 2.0, 3.0}) {
    const auto r = lp_norm(X, SizeSpec::avg_l1(), Field::from_real(f), p);
    const double cl = classical_lp(f, w, p);
    CHECK(r.lower <= cl + 1e-10);
    CHECK(cl <= r.upper + 1e-10);
  }
  CHECK(lp_norm(X, SizeSpec::avg_l1(), Field::from_real(f), kInf).value == doctest::Approx(3.0));
}

TEST_CASE("enclosure width shrinks under lambda grid doubling") {
  const auto X = build_dyadic_space(1, 4);
  std::vector<double> f(X.num_cells());
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = std::sin(0.7 * double(c)) + 1.2;
  const auto F = Field::from_real(f);
  const auto a = lp_norm(X, SizeSpec::avg_l1(), F, 2.0, LambdaGrid{8, 40});
  const auto b = lp_norm(X, SizeSpec::avg_l1(), F, 2.0, LambdaGrid{16, 40});
  CHECK(b.width < a.width);
  CHECK(b.lower >= a.lower - 1e-12);
  CHECK(b.upper <= a.upper + 1e-12);
}

TEST_CASE("weak norm never exceeds the strong norm") {
  const auto X = build_dyadic_space(1, 5);
  Rng r(3);
  std::vector<double> f(X.num_cells());
  for (auto& v : f) v = std::abs(r.normal());
  const auto c = super_level_curve(X, SizeSpec::avg_l2(), f, LambdaGrid{16, 30}, SolveMode::Greedy);
  for (double p : {1.0, 2.0, 4.0}) CHECK(curve_weak_lp(c, p).value <= curve_lp(c, p).value * (1 + 1e-12));
}

TEST_CASE("greedy super level measure bounds the exact one") {
  const auto X = build_dyadic_space(1, 5);
  Rng r(9);
  std::vector<double> f(X.num_cells());
  for (auto& v : f) v = std::abs(r.normal());
  for (double lam : {0.3, 0.8, 1.5}) {
    const double ex = super_level_measure_abs(X, SizeSpec::avg_l2(), f, lam, SolveMode::Exact).value;
    const auto gr = super_level_measure_abs(X, SizeSpec::avg_l2(), f, lam, SolveMode::Greedy);
    CHECK(gr.value >= ex - 1e-12);
    CHECK(cover_is_feasible(X, SizeSpec::avg_l2(), f, gr.witness.ids, lam));
  }
}

TEST_CASE("scaling the collection scales the measure") {
  const auto s = toy();
  const auto t = scaled_space(s, 3.0);
  CHECK(outer_measure(t, {0, 1}, SolveMode::Exact).value == doctest::Approx(4.5));
}

TEST_CASE("size axioms hold for the averaging sizes") {
  const auto X = build_dyadic_space(1, 3);
  std::vector<Field> samples;
  Rng r(1);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> v(X.num_cells());
    for (auto& x : v) x = r.uniform();
    samples.push_back(Field::from_real(v));
  }
  for (const auto& S : {SizeSpec::avg_l1(), SizeSpec::avg_l2(), SizeSpec::avg_linf()}) {
    const auto rep = verify_size_axioms(X, S, samples, 20, 5);
    CHECK(rep.monotone_ok);
    CHECK(rep.scaling_ok);
  }
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(SizeSpec::avg_lp(0.5), InputError);
  const auto s = toy();
  CHECK_THROWS_AS(lp_norm(s, SizeSpec::avg_l1(), Field::from_real({1, 2, 3}), 0.0), InputError);
}

TEST_CASE("rng is reproducible and split streams differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 5; ++i) CHECK(a.next() == b.next());
  Rng c = Rng(42).split(1), d = Rng(42).split(2);
  CHECK(c.next() != d.next());
  Rng e(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}
