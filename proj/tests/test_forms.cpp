#include <cmath>

#include "doctest.h"
#include "olp/forms.hpp"

using namespace olp;

namespace {

LineSignal gauss(double c, double s = 1.0, double mod = 0.0) {
  return LineSignal::sample(-32.0, 1.0 / 16, 1025, [=](double x) {
    return cplx(std::exp(-0.5 * (x - c) * (x - c) / (s * s)) * std::cos(mod * x), 0.0);
  });
}

// p.v. int I(t) dt/t for unit Gaussians centred at c_j, with
// I(t) = sqrt(2 pi / 3) exp(-(sum a_j^2 - (sum a_j)^2 / 3) / 2), a_j = c_j + beta_j t.
double gaussian_bht(const std::array<double, 3>& c, const BetaVector& B) {
  auto I = [&](double t) {
    double s = 0.0, s2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double a = c[j] + B.beta[j] * t;
      s += a;
      s2 += a * a;
    }
    return std::sqrt(2 * kPi / 3) * std::exp(-0.5 * (s2 - s * s / 3));
  };
  // odd part over t in (0, 60] on a log grid, Simpson in u = log t
  const double a = std::log(1e-8), b = std::log(60.0);
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = a + (b - a) * i / n, t = std::exp(u);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * (I(t) - I(-t));
  }
  return acc * (b - a) / (3.0 * n);
}

}  // namespace

TEST_CASE("beta vectors") {
  const auto B = BetaVector::standard();
  double s = 0, n = 0, sa = 0, ab = 0;
  for (int j = 0; j < 3; ++j) {
    s += B.beta[j];
    n += B.beta[j] * B.beta[j];
    sa += B.alpha[j];
    ab += B.alpha[j] * B.beta[j];
  }
  CHECK(std::abs(s) < 1e-15);
  CHECK(n == doctest::Approx(1.0));
  CHECK(std::abs(sa) < 1e-15);
  CHECK(std::abs(ab) < 1e-15);
  CHECK(B.min_gap() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(BetaVector::make(1.0, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(BetaVector::make(1.0, 0.0, 0.0), InputError);
}

TEST_CASE("product integral of three Gaussians") {
  const auto v = product_integral(gauss(0), gauss(0), gauss(0));
  CHECK(v.real() == doctest::Approx(std::sqrt(2 * kPi / 3)).epsilon(1e-10));
}

TEST_CASE("principal value by symmetric pairing") {
  CHECK(pv_integral([](double v) { return v * std::exp(-v * v); }) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-7));
  CHECK(std::abs(pv_integral([](double v) { return std::exp(-v * v); })) < 1e-12);
}

TEST_CASE("bilinear Hilbert form of Gaussians against the closed inner integral") {
  const auto B = BetaVector::standard();
  const auto r = bht_direct(gauss(0), gauss(0), gauss(1), B);
  const double ref = gaussian_bht({0, 0, 1}, B);
  CHECK(r.converged);
  CHECK(r.value.real() == doctest::Approx(ref).epsilon(2e-3));
  CHECK(std::abs(r.value.imag()) < 1e-12);
}

TEST_CASE("an even symmetric triple has vanishing form") {
  const auto B = BetaVector::standard();
  const auto f = gauss(0.0, 0.9);
  const auto r = bht_direct(f, f, f, B);
  CHECK(std::abs(r.value) < 1e-10);
}

TEST_CASE("psi kernel at a wide band") {
  const auto phi = MotherWavelet::frequency_bump(0.25);
  const auto B = BetaVector::standard();
  const auto P = psi_and_hat(phi, B);
  CHECK(P.hat0 > 0.0);
  CHECK(P.min_hat >= -1e-10 * P.hat0);
  CHECK(P.support_radius < 0.5);
  CHECK(P.max_rel_diff <= 1e-6);
  CHECK(P.even_error < 1e-8);
  const auto rc = reduction_constants(P);
  const double K = reduction_K(phi, B);
  CHECK(rc.a.real() == doctest::Approx(K / 2).epsilon(1e-6));
  CHECK(rc.b.imag() == doctest::Approx(-K / (2 * kPi)).epsilon(1e-6));
  CHECK(rc.residual < 1e-6);
}

TEST_CASE("model form against the two-term identity") {
  const auto phi = MotherWavelet::frequency_bump(0.25);
  const auto B = BetaVector::standard();
  const double phi0 = model_form_phi0(phi, B);
  CHECK(phi0 > 0.0);
  const ReductionFit fit{cplx(std::sqrt(3.0) / 2 * phi0, 0.0), cplx(0.0, std::sqrt(3.0) / (2 * kPi) * phi0)};
  const auto r = verify_reduction(gauss(0.3, 0.8), gauss(-0.5, 1.2), gauss(1.0, 0.9, 0.5), phi, B, fit);
  CHECK(r.residual < 0.05);
}

TEST_CASE("sizes S_j: disjoint exceptional regions and the factorization constant") {
  const auto B = BetaVector::standard();
  Upper3Grid g;
  g.Y = 2;
  g.dy = 0.25;
  g.H = 2;
  g.deta = 0.125;
  g.kmin = -1;
  g.kmax = 1;
  const auto bs = sizes_Sj(g, B, bht_tip_lattice(g));
  CHECK(bs.disjoint);
  CHECK(bs.b == doctest::Approx(std::ldexp(1.0, -8) * B.min_gap()));
  const auto phi = MotherWavelet::frequency_bump(0.25);
  std::array<Field, 3> G{bht_G(gauss(0), 0, B, phi, g), bht_G(gauss(0.5), 1, B, phi, g), bht_G(gauss(-0.5), 2, B, phi, g)};
  const auto fr = factorization_check(bs, G);
  CHECK(fr.tents > 0);
  CHECK(fr.holds);
  CHECK(fr.max_ratio <= 4.0);
  const auto pm = check_phi_map(B, g, bs.tents.tents, 10, 1);
  CHECK(pm.holds);
}

TEST_CASE("paraproduct chain") {
  UpperHalfPlaneGrid g;
  g.Y = 8;
  g.dy = 0.125;
  g.levels = 12;
  g.t_max = 4;
  g.per_octave = 2;
  auto f = [&](double c) {
    return LineSignal::sample(g.y(0) - 32 * g.dy, g.dy, static_cast<std::size_t>(g.ny() + 64), [=](double x) {
      return cplx(std::exp(-(x - c) * (x - c)), 0.0);
    });
  };
  const auto phi = MotherWavelet::bump_derivative();
  const auto r = paraproduct_form(f(0), f(0.5), f(-0.3), phi, phi, MotherWavelet::bump(), g);
  CHECK(r.chain_holds);
  CHECK(std::isfinite(r.implied_C));
}
