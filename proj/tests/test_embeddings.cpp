#include <cmath>

#include "doctest.h"
#include "olp/embeddings.hpp"

using namespace olp;

namespace {

UpperHalfPlaneGrid grid_hp() {
  UpperHalfPlaneGrid g;
  g.Y = 4.0;
  g.dy = 0.0625;
  g.levels = 3;
  g.t_max = 2.0;
  g.per_octave = 1;
  return g;
}

LineSignal bumpy(double x0, double dx, std::size_t n, double c = 0.3) {
  return LineSignal::sample(x0, dx, n, [=](double x) {
    return cplx(std::exp(-(x - c) * (x - c)) * (1.0 + 0.3 * std::sin(2 * x)), 0.0);
  });
}

double max_abs(const Field& F) {
  double m = 0.0;
  for (const auto& z : F.values) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST_CASE("half-plane embedding matches a fine quadrature of the continuous integral") {
  const auto g = grid_hp();
  const auto phi = MotherWavelet::bump_derivative();
  const auto f = bumpy(g.y(0) - 64 * g.dy, g.dy, static_cast<std::size_t>(g.ny() + 128));
  const auto F = embed_half_plane(f, phi, g);
  const double scale = max_abs(F);
  // a Riemann sum at the signal step aliases (the bump spectrum decays like exp(-sqrt|xi|)),
  // so the oracle integrates the closed-form signal on the kernel support with 4000 nodes
  const auto fx = [](double x) { return std::exp(-(x - 0.3) * (x - 0.3)) * (1.0 + 0.3 * std::sin(2 * x)); };
  for (int k = 0; k < g.levels; ++k)
    for (int j : {10, 40, 64, 100}) {
      const double y = g.y(j), t = g.t(k);
      const int n = 4000;
      const double h = 2.0 * t / n;
      cplx s = 0.0;
      for (int i = 1; i < n; ++i) {
        const double x = y - t + i * h;
        s += fx(x) * std::conj(phi.phi((y - x) / t)) / t * h;
      }
      CHECK(std::abs(F.values[g.index(j, k)] - s) <= 1e-6 * scale);
    }
}

TEST_CASE("embeddings are linear") {
  const auto g = grid_hp();
  const auto phi = MotherWavelet::bump_derivative();
  const std::size_t n = static_cast<std::size_t>(g.ny() + 128);
  const double x0 = g.y(0) - 64 * g.dy;
  const auto f = bumpy(x0, g.dy, n, 0.3), h = bumpy(x0, g.dy, n, -1.0);
  LineSignal s = f;
  for (std::size_t i = 0; i < n; ++i) s.v[i] = 2.0 * f.v[i] - h.v[i];
  const auto Ff = embed_half_plane(f, phi, g), Fh = embed_half_plane(h, phi, g), Fs = embed_half_plane(s, phi, g);
  for (std::size_t c = 0; c < Fs.size(); ++c) CHECK(std::abs(Fs.values[c] - (2.0 * Ff.values[c] - Fh.values[c])) < 1e-12);
}

TEST_CASE("untilted embedding is the half-plane embedding; off-lattice beta is rejected") {
  const auto g = grid_hp();
  const auto phi = MotherWavelet::bump_derivative();
  const auto f = bumpy(g.y(0) - 64 * g.dy, g.dy, static_cast<std::size_t>(g.ny() + 128));
  const auto A = embed_half_plane(f, phi, g), B = embed_tilted(f, phi, 0.0, 1.0, g);
  for (std::size_t c = 0; c < A.size(); ++c) CHECK(A.values[c] == B.values[c]);
  CHECK_THROWS_AS(embed_tilted(f, phi, 0.0, 0.7, g), InputError);
  CHECK_THROWS_AS(embed_half_plane(f, MotherWavelet::frequency_bump(0.5), g), InputError);
}

TEST_CASE("time-frequency embedding matches the direct sum") {
  Upper3Grid g;
  g.Y = 2.0;
  g.dy = 0.125;
  g.H = 1.0;
  g.deta = 0.25;
  g.kmin = 0;
  g.kmax = 2;
  const auto phi = MotherWavelet::frequency_bump(0.5);
  const auto f = bumpy(-40.0 + 0.0625, 0.125, 640);
  const auto F = embed_time_frequency(f, phi, g);
  double scale = max_abs(F);
  for (int q = 0; q < g.nt(); ++q)
    for (int l : {1, 4, 6})
      for (int j : {3, 16, 30}) {
        const double y = g.y(j), eta = g.eta(l), t = g.t(q);
        cplx s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
          const double u = y - f.x(i);
          s += f.v[i] * std::exp(cplx(0.0, eta * u)) * phi.phi(u / t) / t * f.dx;
        }
        CHECK(std::abs(F.values[g.index(j, l, q)] - s) <= 1e-6 * scale);
      }
}

TEST_CASE("maximal function") {
  auto f = LineSignal::sample(0.0, 1.0, 6, [](double) { return cplx(2.0, 0.0); });
  auto M = hl_maximal(f);
  for (const auto& v : M.v) CHECK(v.real() == doctest::Approx(2.0));
  f.v = {0.0, 0.0, 6.0, 0.0, 0.0, 0.0};
  M = hl_maximal(f);
  CHECK(M.v[2].real() == doctest::Approx(6.0));
  CHECK(M.v[0].real() == doctest::Approx(2.0));  // best interval is [0, 2]
  CHECK(M.v[5].real() == doctest::Approx(1.5));  // [2, 5]
}

TEST_CASE("Calderon-Zygmund decomposition") {
  Rng r(5);
  auto f = LineSignal::sample(0.0, 0.5, 200, [&](double) { return cplx(std::pow(r.uniform(), 6) * 10.0, 0.0); });
  const double level = 3.0;  // above the mean 10/7 of the whole sample
  const auto cz = cz_decompose(f, level);
  LineSignal sum = cz.good;
  for (const auto& b : cz.bad) {
    cplx mean = 0.0;
    for (long i = b.i0; i <= b.i1; ++i) {
      sum.v[i] += b.v[i - b.i0];
      mean += b.v[i - b.i0];
    }
    CHECK(std::abs(mean) < 1e-10);
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(sum.v[i] - f.v[i]) < 1e-12);
    CHECK(std::abs(cz.good.v[i]) <= cz.c_phi * level + 1e-12);
  }
  for (std::size_t k = 1; k < cz.bad.size(); ++k) CHECK(cz.bad[k].i0 > cz.bad[k - 1].i1);
  CHECK_THROWS_AS(cz_decompose(f, 1e-9), InputError);
}

TEST_CASE("Calderon constant against an independent quadrature") {
  const auto phi = MotherWavelet::bump_derivative();
  // hat phi by trapezoid in space, then int |hat phi(u)|^2 du/u on a log grid
  auto hat = [&](double xi) {
    cplx s = 0.0;
    const int n = 4000;
    for (int i = 1; i < n; ++i) {
      const double x = -1.0 + 2.0 * i / n;
      s += phi.phi(x) * std::exp(cplx(0.0, -xi * x));
    }
    return s * (2.0 / n);
  };
  double I = 0.0;
  const double a = std::log(1e-4), b = std::log(400.0);
  const int m = 6000;
  for (int i = 0; i <= m; ++i) {
    const double v = a + (b - a) * i / m;
    I += (i == 0 || i == m ? 0.5 : 1.0) * std::norm(hat(std::exp(v)));
  }
  I *= (b - a) / m;
  CHECK(calderon_constant(phi) == doctest::Approx(I).epsilon(1e-5));
  CHECK_THROWS_AS(calderon_constant(MotherWavelet::bump()), InputError);
}

TEST_CASE("Calderon grid check on a wide grid") {
  UpperHalfPlaneGrid g;
  g.Y = 32.0;
  g.dy = 0.125;
  g.levels = 48;
  g.t_max = 64.0;
  g.per_octave = 4;
  const auto f = LineSignal::sample(g.y(0), g.dy, static_cast<std::size_t>(g.ny()), [](double x) {
    return cplx(-x * std::exp(-0.5 * x * x), 0.0);
  });
  const auto c = calderon_grid_check(f, MotherWavelet::bump_derivative(), g);
  CHECK(c.rel_error < 0.02);
}
