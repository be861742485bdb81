#include "olp/wavelet.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fft_lock.hpp"

namespace olp {

namespace {

double bump_fn(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_deriv_fn(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? -2.0 * x / (q * q) * std::exp(-1.0 / q) : 0.0;
}

// hat(phi) on a uniform frequency table, from a fine trapezoid FFT of phi.
struct SpectrumTable {
  double du = 0.0;
  long half = 0;  // entries for u in [-half du, half du]
  std::vector<cplx> v;

  cplx at(double u) const {
    const double r = u / du + half;
    const long i = static_cast<long>(std::floor(r));
    if (i < 1 || i + 2 >= static_cast<long>(v.size())) return 0.0;
    const double s = r - i;
    // cubic Lagrange on i-1..i+2
    const double w0 = -s * (s - 1) * (s - 2) / 6, w1 = (s + 1) * (s - 1) * (s - 2) / 2;
    const double w2 = -(s + 1) * s * (s - 2) / 2, w3 = (s + 1) * s * (s - 1) / 6;
    return w0 * v[i - 1] + w1 * v[i] + w2 * v[i + 1] + w3 * v[i + 2];
  }
};

std::shared_ptr<SpectrumTable> spectrum_of(const std::function<double(double)>& f, double support, double umax) {
  const int per_unit = 1024;
  const long N = 1L << 21;
  const double h = 1.0 / per_unit;
  std::vector<cplx> buf(N, 0.0);
  const long m = static_cast<long>(std::ceil(support * per_unit));
  // x_i = i h for i in [-m, m], stored circularly
  for (long i = -m; i <= m; ++i) buf[(i + N) % N] = f(i * h) * h;
  {
    std::lock_guard<std::mutex> lk(detail::fftw_mutex());
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(N), reinterpret_cast<fftw_complex*>(buf.data()),
                                   reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
  }
  auto tab = std::make_shared<SpectrumTable>();
  tab->du = 2.0 * kPi / (N * h);
  tab->half = std::min<long>(static_cast<long>(umax / tab->du), N / 2 - 2);
  tab->v.resize(2 * tab->half + 1);
  for (long k = -tab->half; k <= tab->half; ++k) tab->v[k + tab->half] = buf[(k + N) % N];
  return tab;
}

std::vector<double> sample_phi(const MotherWavelet& w, double R) {
  std::vector<double> s(257);
  for (int i = 0; i <= 256; ++i) s[i] = std::real(w.phi(-R + 2.0 * R * i / 256));
  return s;
}

}  // namespace

double trapezoid(const std::function<double(double)>& g, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (g(a) + g(b));
  for (int i = 1; i < n; ++i) s += g(a + i * h);
  return s * h;
}

MotherWavelet MotherWavelet::bump() {
  MotherWavelet w;
  w.kind = WaveletKind::SpaceCompact;
  w.name = "bump";
  w.support = 1.0;
  w.phi = [](double x) { return cplx(bump_fn(x), 0.0); };
  auto tab = spectrum_of(bump_fn, 1.0, 2000.0);
  w.phi_hat = [tab](double u) { return tab->at(u); };
  w.samples = sample_phi(w, 1.0);
  return w;
}

MotherWavelet MotherWavelet::bump_derivative() {
  MotherWavelet w;
  w.kind = WaveletKind::SpaceCompact;
  w.name = "bump-derivative";
  w.support = 1.0;
  w.phi = [](double x) { return cplx(bump_deriv_fn(x), 0.0); };
  // hat of B' is i u hat(B); tabulate B and multiply, B is smoother at the table level.
  auto tab = spectrum_of(bump_fn, 1.0, 2000.0);
  w.phi_hat = [tab](double u) { return cplx(0.0, u) * tab->at(u); };
  w.samples = sample_phi(w, 1.0);
  return w;
}

MotherWavelet MotherWavelet::frequency_bump(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("frequency bump needs bandwidth > 0");
  MotherWavelet w;
  w.kind = WaveletKind::FrequencyCompact;
  w.name = "frequency-bump";
  w.bandwidth = a;
  w.phi_hat = [a](double xi) { return cplx(bump_fn(xi / a) * std::exp(1.0), 0.0); };
  // phi(x) = (a / 2 pi) int_{-1}^{1} e B(u) cos(a u x) du; B vanishes to all orders at +-1.
  w.phi = [a](double x) {
    const int n = std::clamp(static_cast<int>(std::abs(a * x) * 4.0) + 400, 400, 200000);
    const double ex = std::exp(1.0);
    const double v = trapezoid([&](double u) { return ex * bump_fn(u) * std::cos(a * u * x); }, -1.0, 1.0, n);
    return cplx(a / (2.0 * kPi) * v, 0.0);
  };
  // tail radius from |phi|^2 mass, scanned in units of 1/a
  const double l2sq = w.l2_norm() * w.l2_norm();
  const double step = 0.25 / a;
  std::vector<double> dens;
  for (int i = 0; i < 40000; ++i) {
    const double p = std::abs(w.phi(i * step));
    dens.push_back(p * p);
    if (i > 200 && p * p < 1e-30 * l2sq) break;
  }
  double tail = 0.0;
  double R = dens.size() * step;
  for (long i = static_cast<long>(dens.size()) - 1; i >= 0; --i) {
    tail += 2.0 * dens[i] * step;
    if (tail >= 1e-10 * l2sq) {
      R = (i + 1) * step;
      break;
    }
  }
  w.tail_radius = R;
  w.support = R;
  w.samples = sample_phi(w, R);
  return w;
}

MotherWavelet MotherWavelet::dilated(double c) const {
  if (!(c > 0.0)) throw InputError("dilation factor must be positive");
  MotherWavelet w = *this;
  auto f = phi;
  auto g = phi_hat;
  w.name = name + "-dilated";
  w.phi = [f, c](double x) { return f(c * x); };
  w.phi_hat = [g, c](double u) { return g(u / c) / c; };
  if (kind == WaveletKind::SpaceCompact) {
    w.support = support / c;
  } else {
    w.bandwidth = bandwidth * c;
    w.tail_radius = tail_radius / c;
    w.support = w.tail_radius;
  }
  w.samples = sample_phi(w, w.support);
  return w;
}

double MotherWavelet::integral() const { return std::real(phi_hat(0.0)); }

double MotherWavelet::l1_norm() const {
  const double R = support;
  return trapezoid([&](double x) { return std::abs(phi(x)); }, -R, R, 20000);
}

double MotherWavelet::l2_norm() const {
  if (kind == WaveletKind::FrequencyCompact) {
    // Plancherel: ||phi||^2 = (1/2pi) int |hat phi|^2
    const double a = bandwidth;
    const double s = trapezoid([&](double u) { return std::norm(phi_hat(u)); }, -a, a, 4000);
    return std::sqrt(s / (2.0 * kPi));
  }
  const double R = support;
  return std::sqrt(trapezoid([&](double x) { return std::norm(phi(x)); }, -R, R, 20000));
}

double LineSignal::norm(double q) const {
  if (!(q > 0.0)) throw InputError("norm exponent must be positive");
  if (q == kInf) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  double s = 0.0;
  for (const auto& z : v) s += std::pow(std::abs(z), q);
  return std::pow(s * dx, 1.0 / q);
}

cplx LineSignal::at(double x) const {
  const double u = (x - x0) / dx;
  const long n = static_cast<long>(v.size());
  if (!(u > -1.0) || !(u < static_cast<double>(n))) return 0.0;
  const long i = static_cast<long>(std::floor(u));
  const double s = u - static_cast<double>(i);
  if (s == 0.0) return (i >= 0 && i < n) ? v[i] : cplx(0.0);
  cplx acc = 0.0;
  for (long a = -2; a <= 3; ++a) {
    const long k = i + a;
    if (k < 0 || k >= n) continue;
    double w = 1.0;
    for (long b = -2; b <= 3; ++b)
      if (b != a) w *= (s - static_cast<double>(b)) / static_cast<double>(a - b);
    acc += w * v[k];
  }
  return acc;
}

LineSignal LineSignal::sample(double x0, double dx, std::size_t n, const std::function<cplx(double)>& fn) {
  if (!(dx > 0.0) || n == 0) throw InputError("line signal needs dx > 0 and n > 0");
  LineSignal s;
  s.x0 = x0;
  s.dx = dx;
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.v[i] = fn(s.x(i));
  return s;
}

}  // namespace olp
