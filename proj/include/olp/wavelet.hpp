#pragma once

// Mother wavelets and sampled line signals.  Fourier convention:
// hat(phi)(xi) = int e^{-i xi x} phi(x) dx.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "olp/common.hpp"

namespace olp {

enum class WaveletKind { SpaceCompact, FrequencyCompact };

struct MotherWavelet {
  WaveletKind kind = WaveletKind::SpaceCompact;
  std::string name;
  double support = 1.0;      // space-compact: phi vanishes off [-support, support]
  double bandwidth = 0.0;    // frequency-compact: hat(phi) vanishes off (-bandwidth, bandwidth)
  double tail_radius = 0.0;  // frequency-compact: mass of |phi|^2 beyond |x| > R is < 1e-10 of the total
  std::function<cplx(double)> phi;
  std::function<cplx(double)> phi_hat;
  std::vector<double> samples;  // phi on [-R, R] (space-compact: R = support), 257 points, metadata only

  // exp(-1/(1-x^2)) on (-1,1).
  static MotherWavelet bump();
  // d/dx exp(-1/(1-x^2)): smooth, odd, mean zero.
  static MotherWavelet bump_derivative();
  // hat(phi)(xi) = exp(1 - 1/(1-(xi/a)^2)) for |xi| < a; phi real, even, hat(phi)(0) = 1.
  static MotherWavelet frequency_bump(double a);
  // phi(c x); hat becomes hat(phi)(xi/c)/c.
  MotherWavelet dilated(double c) const;

  double integral() const;  // int phi = hat(phi)(0)
  double l1_norm() const;
  double l2_norm() const;
};

// f(x0 + i dx), i = 0..n-1.
struct LineSignal {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<cplx> v;
  double p = 2.0;  // exponent used for norm bookkeeping

  std::size_t size() const { return v.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double norm(double q) const;  // (sum |f|^q dx)^{1/q}; q = inf gives max
  // Six-point Lagrange interpolation between samples, zero off the sampled range.
  cplx at(double x) const;
  static LineSignal sample(double x0, double dx, std::size_t n, const std::function<cplx(double)>& fn);
};

// Direct trapezoid of int_{-L}^{L} g(x) dx with n+1 nodes.
double trapezoid(const std::function<double(double)>& g, double a, double b, int n);

}  // namespace olp
