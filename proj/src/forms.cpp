#include "olp/forms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fft_lock.hpp"

namespace olp {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Six-point Lagrange interpolation at fractional index u of tab (zero outside).
template <class T>
T lagrange6(const std::vector<T>& tab, double u) {
  const long n = static_cast<long>(tab.size());
  if (!(u >= 0.0) || !(u <= static_cast<double>(n - 1))) return T(0.0);
  const long i = static_cast<long>(std::floor(u));
  const double s = u - static_cast<double>(i);
  if (s == 0.0) return tab[static_cast<std::size_t>(i)];
  T acc = T(0.0);
  for (long a = -2; a <= 3; ++a) {
    const long k = i + a;
    if (k < 0 || k >= n) continue;
    double w = 1.0;
    for (long b = -2; b <= 3; ++b)
      if (b != a) w *= (s - static_cast<double>(b)) / static_cast<double>(a - b);
    acc += w * tab[static_cast<std::size_t>(k)];
  }
  return acc;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// hat f(xi) = dx sum_i f_i e^{-i xi x_i}, tabulated by a zero-padded FFT
// around the centre of the signal and read by six-point interpolation.
class Spectrum {
 public:
  explicit Spectrum(const LineSignal& f) : dx_(f.dx) {
    const long n = static_cast<long>(f.size());
    double peak = 0.0;
    for (const auto& z : f.v) peak = std::max(peak, std::abs(z));
    zero_ = !(peak > 0.0);
    if (zero_) return;
    long lo = 0, hi = n - 1;
    while (std::abs(f.v[static_cast<std::size_t>(lo)]) <= 1e-15 * peak) ++lo;
    while (std::abs(f.v[static_cast<std::size_t>(hi)]) <= 1e-15 * peak) --hi;
    const long ic = (lo + hi) / 2;
    xc_ = f.x(static_cast<std::size_t>(ic));
    const long half = std::max(ic - lo, hi - ic) + 1;
    long N = 64;
    while (N < 2 * half + 2 || N < 64 * half) N *= 2;
    if (N > (1L << 24)) throw InputError("signal too long for the spectral table");
    N_ = N;
    std::vector<cplx> buf(static_cast<std::size_t>(N), 0.0), out(static_cast<std::size_t>(N));
    for (long i = lo; i <= hi; ++i) {
      const long k = ((i - ic) % N + N) % N;
      buf[static_cast<std::size_t>(k)] = f.v[static_cast<std::size_t>(i)];
    }
    {
      fftw_plan pl;
      {
        std::lock_guard<std::mutex> lk(detail::fftw_mutex());
        pl = fftw_plan_dft_1d(static_cast<int>(N), reinterpret_cast<fftw_complex*>(buf.data()),
                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
      }
      fftw_execute(pl);
      std::lock_guard<std::mutex> lk(detail::fftw_mutex());
      fftw_destroy_plan(pl);
    }
    tab_.resize(static_cast<std::size_t>(N));
    for (long m = 0; m < N; ++m) {
      const long src = (m - N / 2 + N) % N;
      tab_[static_cast<std::size_t>(m)] = dx_ * out[static_cast<std::size_t>(src)];
    }
    dxi_ = 2.0 * kPi / (static_cast<double>(N) * dx_);
    double tmax = 0.0;
    for (const auto& z : tab_) tmax = std::max(tmax, std::abs(z));
    for (long m = 0; m < N; ++m)
      if (std::abs(tab_[static_cast<std::size_t>(m)]) > 1e-13 * tmax)
        omega_ = std::max(omega_, std::abs((m - N / 2) * dxi_));
  }

  cplx at(double xi) const {
    if (zero_) return 0.0;
    const double u = xi / dxi_ + static_cast<double>(N_ / 2);
    return lagrange6(tab_, u) * std::exp(cplx(0.0, -xi * xc_));
  }
  bool zero() const { return zero_; }
  double omega() const { return omega_; }  // |hat f| < 1e-13 of its peak beyond omega
  double nyquist() const { return kPi / dx_; }

 private:
  double dx_ = 1.0, xc_ = 0.0, dxi_ = 1.0, omega_ = 0.0;
  long N_ = 0;
  bool zero_ = false;
  std::vector<cplx> tab_;
};

// phi tabulated at spacing h on [-L, L].
struct PhiTable {
  double h = 1.0;
  long n = 0;  // nodes -n..n
  std::vector<double> v;
  double at(double x) const { return lagrange6(v, x / h + static_cast<double>(n)); }
};

PhiTable tabulate_phi(const MotherWavelet& phi, double L, double h) {
  PhiTable t;
  t.h = h;
  t.n = static_cast<long>(std::ceil(L / h));
  t.v.resize(static_cast<std::size_t>(2 * t.n + 1));
  parallel_for(t.v.size(), [&](std::size_t i) {
    t.v[i] = std::real(phi.phi((static_cast<double>(i) - static_cast<double>(t.n)) * h));
  });
  return t;
}

void require_model_wavelet(const MotherWavelet& phi) {
  if (phi.kind != WaveletKind::FrequencyCompact) throw InputError("model form needs a frequency-compact wavelet");
  const double a = phi.bandwidth;
  if (!(std::real(phi.phi_hat(0.0)) > 0.0)) throw InputError("hat phi(0) must be positive");
  for (double u : {-0.7, -0.3, 0.2, 0.6})
    if (std::real(phi.phi_hat(u * a)) < 0.0 || std::abs(std::imag(phi.phi_hat(u * a))) > 1e-12)
      throw InputError("hat phi must be real and nonnegative");
  if (!(a < 0.5)) throw InputError("model form needs bandwidth < 1/2");
}

}  // namespace

// ---------------------------------------------------------------- BetaVector

BetaVector BetaVector::make(double b1, double b2, double b3) {
  const double n = std::sqrt(b1 * b1 + b2 * b2 + b3 * b3);
  if (!(n > 0.0) || !std::isfinite(n)) throw InputError("beta must be a nonzero finite vector");
  if (std::abs(b1 + b2 + b3) > 1e-9 * n) throw InputError("beta must be orthogonal to (1,1,1)");
  BetaVector v;
  v.beta = {b1 / n, b2 / n, b3 / n};
  const double s = (v.beta[0] + v.beta[1] + v.beta[2]) / 3.0;
  for (auto& x : v.beta) x -= s;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v.beta[i]) > 0.9) throw InputError("|beta_j| must be at most 0.9");
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(v.beta[i] - v.beta[j]) < 1e-9) throw InputError("beta entries must be distinct");
  }
  // beta x (1,1,1)
  std::array<double, 3> c = {v.beta[1] - v.beta[2], v.beta[2] - v.beta[0], v.beta[0] - v.beta[1]};
  const double cn = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  for (int i = 0; i < 3; ++i) {
    v.alpha[i] = c[i] / cn;
    if (std::abs(v.alpha[i]) < 1e-9) throw InputError("alpha has a zero component");
  }
  return v;
}

BetaVector BetaVector::standard() { return make(1.0, 0.0, -1.0); }

double BetaVector::min_gap() const {
  return std::min({std::abs(beta[0] - beta[1]), std::abs(beta[0] - beta[2]), std::abs(beta[1] - beta[2])});
}
double BetaVector::max_gap() const {
  return std::max({std::abs(beta[0] - beta[1]), std::abs(beta[0] - beta[2]), std::abs(beta[1] - beta[2])});
}

// ---------------------------------------------------------------- Lambda_beta

namespace {

struct InnerIntegral {
  const LineSignal* f[3];
  std::array<double, 3> beta;
  double h = 1.0;

  cplx operator()(double t) const {
    double lo = -kInf, hi = kInf;
    for (int j = 0; j < 3; ++j) {
      lo = std::max(lo, f[j]->x0 + beta[j] * t);
      hi = std::min(hi, f[j]->x(f[j]->size() - 1) + beta[j] * t);
    }
    if (!(hi > lo)) return 0.0;
    const long i0 = static_cast<long>(std::ceil(lo / h)), i1 = static_cast<long>(std::floor(hi / h));
    cplx s = 0.0;
    for (long i = i0; i <= i1; ++i) {
      const double x = static_cast<double>(i) * h;
      s += f[0]->at(x - beta[0] * t) * f[1]->at(x - beta[1] * t) * f[2]->at(x - beta[2] * t);
    }
    return s * h;
  }
};

struct PVSum {
  cplx value = 0.0;
  std::vector<std::pair<double, cplx>> ladder;
  int nodes = 0;
};

PVSum pv_sum(const InnerIntegral& I, const PVQuadrature& q, int per_octave) {
  const double r = std::pow(2.0, 1.0 / per_octave);
  const double lr = std::log(r);
  double tmax = q.t_max;
  PVSum out;
  if (!(tmax > 0.0)) {
    // support bound: past it the shifted supports no longer meet
    double width = 0.0;
    for (int j = 0; j < 3; ++j) width = std::max(width, I.f[j]->x(I.f[j]->size() - 1) - I.f[j]->x0);
    double mg = kInf;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) mg = std::min(mg, std::abs(I.beta[i] - I.beta[j]));
    tmax = 2.0 * width / mg;
  }
  std::vector<double> ts;
  for (double t = q.t_min; t <= tmax * r; t *= r) ts.push_back(t);
  std::vector<cplx> D(ts.size());
  std::vector<double> mag(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    const cplx a = I(ts[i]), b = I(-ts[i]);
    D[i] = a - b;
    mag[i] = std::max(std::abs(a), std::abs(b));
  });
  out.nodes = static_cast<int>(2 * ts.size());
  // core |t| < t_min: D(t) ~ D'(0) t, so int_0^{t_min} D/t dt ~ D(t_min)
  cplx core = D.empty() ? cplx(0.0) : D[0];
  cplx sum = 0.0;
  std::vector<cplx> partial(ts.size() + 1, 0.0);  // partial[i] = trapezoid over nodes >= i
  for (long i = static_cast<long>(ts.size()) - 1; i >= 0; --i) {
    const double wgt = (i == 0 || i == static_cast<long>(ts.size()) - 1) ? 0.5 * lr : lr;
    sum += D[static_cast<std::size_t>(i)] * wgt;
    partial[static_cast<std::size_t>(i)] = sum;
  }
  out.value = sum + core;
  for (double eps : q.eps_ladder) {
    std::size_t i = 0;
    while (i < ts.size() && ts[i] < eps) ++i;
    out.ladder.push_back({eps, i < ts.size() ? partial[i] : cplx(0.0)});
  }
  return out;
}

}  // namespace

BHTResult bht_direct(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3, const BetaVector& beta,
                     const PVQuadrature& q) {
  if (!(q.t_min > 0.0) || q.per_octave < 1 || q.x_refine < 1) throw InputError("bad p.v. quadrature");
  const LineSignal* fs[3] = {&f1, &f2, &f3};
  double dx = kInf;
  for (auto* f : fs) {
    if (f->size() < 2) throw InputError("signals need at least two samples");
    dx = std::min(dx, f->dx);
  }
  for (auto* f : fs) {
    double peak = 0.0;
    for (const auto& z : f->v) peak = std::max(peak, std::abs(z));
    if (peak > 0.0 && (std::abs(f->v.front()) > 1e-10 * peak || std::abs(f->v.back()) > 1e-10 * peak))
      throw InputError("signals must decay below 1e-10 at the sampling boundary");
  }
  InnerIntegral I{{&f1, &f2, &f3}, beta.beta, dx / q.x_refine};
  BHTResult res;
  PVSum base = pv_sum(I, q, q.per_octave);
  InnerIntegral I2 = I;
  I2.h = I.h / 2.0;
  PVSum fine = pv_sum(I2, q, 2 * q.per_octave);
  res.value = base.value;
  res.refined = fine.value;
  res.ladder = base.ladder;
  res.nodes = base.nodes;
  const double scale = std::max({std::abs(fine.value), std::abs(base.value), 1e-300});
  res.rel_change = std::abs(fine.value - base.value) / scale;
  // an absolute floor for forms that vanish: compare against the size of the inner integrals
  const double floor = 1e-12 * f1.norm(3.0) * f2.norm(3.0) * f3.norm(3.0);
  res.converged = res.rel_change <= q.tol || std::abs(fine.value - base.value) <= floor;
  return res;
}

cplx product_integral(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3) {
  const double lo = std::max({f1.x0, f2.x0, f3.x0});
  const double hi = std::min({f1.x(f1.size() - 1), f2.x(f2.size() - 1), f3.x(f3.size() - 1)});
  if (!(hi > lo)) return 0.0;
  const double h = std::min({f1.dx, f2.dx, f3.dx});
  const long n = static_cast<long>(std::floor((hi - lo) / h + 1e-9));
  cplx s = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * f1.at(x) * f2.at(x) * f3.at(x);
  }
  return s * h;
}

// ---------------------------------------------------------------- paraproduct

ParaproductResult paraproduct_form(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                                   const MotherWavelet& phi1, const MotherWavelet& phi2, const MotherWavelet& phi3,
                                   const UpperHalfPlaneGrid& grid, double p1, double p2, double p3,
                                   const LambdaGrid& lg) {
  const double inv = (p1 == kInf ? 0.0 : 1.0 / p1) + (p2 == kInf ? 0.0 : 1.0 / p2) + (p3 == kInf ? 0.0 : 1.0 / p3);
  if (!(p1 >= 1.0) || !(p2 >= 1.0) || !(p3 >= 1.0) || std::abs(inv - 1.0) > 1e-9)
    throw InputError("paraproduct exponents must satisfy 1/p1 + 1/p2 + 1/p3 = 1");
  for (const MotherWavelet* w : {&phi1, &phi2})
    if (std::abs(w->integral()) > 1e-8 * std::max(1.0, w->l1_norm()))
      throw InputError("the first two wavelets must have mean zero");
  ParaproductResult r;
  r.p = {p1, p2, p3};
  const Field F1 = embed_half_plane(f1, phi1, grid);
  const Field F2 = embed_half_plane(f2, phi2, grid);
  const Field F3 = embed_half_plane(f3, phi3, grid);
  const double w = grid.weight();
  cplx s = 0.0;
  for (std::size_t c = 0; c < F1.size(); ++c) s += F1.values[c] * F2.values[c] * F3.values[c];
  r.value = s * w;
  const TentSpace ts = build_tent_space(grid, default_tip_lattice(grid));
  r.outer[0] = lp_norm(ts.space, size_Sp(2.0), F1, p1, lg, SolveMode::Greedy).value;
  r.outer[1] = lp_norm(ts.space, size_Sp(2.0), F2, p2, lg, SolveMode::Greedy).value;
  r.outer[2] = lp_norm(ts.space, size_Sp(kInf), F3, p3, lg, SolveMode::Greedy).value;
  r.classical = {f1.norm(p1), f2.norm(p2), f3.norm(p3)};
  r.chain = 4.0 * r.outer[0] * r.outer[1] * r.outer[2];
  const double cl = r.classical[0] * r.classical[1] * r.classical[2];
  r.implied_C = cl > 0.0 ? std::abs(r.value) / cl : 0.0;
  r.chain_holds = std::abs(r.value) <= r.chain * (1.0 + 1e-9) + 1e-300;
  return r;
}

// ---------------------------------------------------------------- model form

namespace {

struct UNode {
  double u[3];
  double w;
};

std::vector<UNode> u_nodes(const MotherWavelet& phi, int n) {
  const double a = phi.bandwidth;
  const double h = 2.0 * a / n;
  std::vector<UNode> out;
  for (int i = 1; i < n; ++i)
    for (int k = 1; k < n; ++k) {
      const double u1 = -a + i * h, u2 = -a + k * h, u3 = -u1 - u2;
      if (!(std::abs(u3) < a)) continue;
      const double w = std::real(phi.phi_hat(u1)) * std::real(phi.phi_hat(u2)) * std::real(phi.phi_hat(u3)) * h * h;
      if (w != 0.0) out.push_back({{u1, u2, u3}, w});
    }
  return out;
}

}  // namespace

cplx model_form(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3, const BetaVector& beta,
                const MotherWavelet& phi, const ModelFormOptions& opt) {
  require_model_wavelet(phi);
  if (opt.eta_nodes < 3 || opt.s_panels < 1 || opt.s_order < 1 || opt.u_nodes < 2)
    throw InputError("bad model form quadrature");
  const Spectrum S[3] = {Spectrum(f1), Spectrum(f2), Spectrum(f3)};
  if (S[0].zero() || S[1].zero() || S[2].zero()) return 0.0;
  double omega = 0.0, nyq = kInf;
  for (const auto& sp : S) {
    omega = std::max(omega, sp.omega());
    nyq = std::min(nyq, sp.nyquist());
  }
  if (omega > 0.75 * nyq)
    throw InputError("sampling rate too low for the frequency shifts: spectrum reaches the Nyquist band");
  const double a = phi.bandwidth;
  const double E = kSqrt3 * omega / (1.0 - std::sqrt(2.0) * a);
  const auto U = u_nodes(phi, opt.u_nodes);
  const double he = 2.0 * E / (opt.eta_nodes - 1);
  std::vector<double> gx, gw;
  gauss_legendre(opt.s_order, gx, gw);
  std::vector<double> sn, sw;
  const double ps = E / opt.s_panels;
  for (int p = 0; p < opt.s_panels; ++p)
    for (int i = 0; i < opt.s_order; ++i) {
      sn.push_back(ps * (p + 0.5 * (gx[static_cast<std::size_t>(i)] + 1.0)));
      sw.push_back(0.5 * ps * gw[static_cast<std::size_t>(i)]);
    }
  const auto& al = beta.alpha;
  const auto& be = beta.beta;
  std::vector<cplx> part(sn.size(), 0.0);
  parallel_for(sn.size(), [&](std::size_t is) {
    const double s = sn[is];
    cplx acc = 0.0;
    for (int ie = 0; ie < opt.eta_nodes; ++ie) {
      const double eta = -E + ie * he;
      const double we = (ie == 0 || ie == opt.eta_nodes - 1) ? 0.5 * he : he;
      cplx inner = 0.0;
      for (const auto& un : U) {
        cplx prod = un.w;
        bool zero = false;
        for (int j = 0; j < 3; ++j) {
          const double xi = al[j] * eta + (be[j] + un.u[j]) * s;
          if (std::abs(xi) > omega) {
            zero = true;
            break;
          }
          prod *= S[j].at(xi);
        }
        if (!zero) inner += prod;
      }
      acc += we * inner;
    }
    part[is] = acc * sw[is];
  });
  cplx total = 0.0;
  for (const auto& p : part) total += p;
  return total / (4.0 * kPi * kPi);
}

double model_form_phi0(const MotherWavelet& phi, const BetaVector& beta, int n) {
  require_model_wavelet(phi);
  double s = 0.0;
  for (const auto& un : u_nodes(phi, n)) {
    const double ub = un.u[0] * beta.beta[0] + un.u[1] * beta.beta[1] + un.u[2] * beta.beta[2];
    s += un.w / (1.0 + ub);
  }
  return s;
}

// ---------------------------------------------------------------- psi

double PsiResult::psi_at(double x) const {
  if (w.empty()) return 0.0;
  return lagrange6(psi, (x - w.front()) / h_w);
}

double psi_hat_formula(const MotherWavelet& phi, const BetaVector& beta, double eta) {
  const double a = phi.bandwidth;
  double lo = -kInf, hi = kInf;
  for (int j = 0; j < 3; ++j) {
    double l = (beta.beta[j] * eta - a) / beta.alpha[j], h = (beta.beta[j] * eta + a) / beta.alpha[j];
    if (l > h) std::swap(l, h);
    lo = std::max(lo, l);
    hi = std::min(hi, h);
  }
  if (!(hi > lo)) return 0.0;
  const int n = 4000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 1; i < n; ++i) {
    const double xi = lo + i * h;
    double p = 1.0;
    for (int j = 0; j < 3; ++j) p *= std::real(phi.phi_hat(beta.alpha[j] * xi - beta.beta[j] * eta));
    s += p;
  }
  return s * h / (2.0 * kPi * kSqrt3);
}

double reduction_K(const MotherWavelet& phi, const BetaVector& beta) {
  require_model_wavelet(phi);
  // hat psi(1 - r) vanishes unless |1 - r| < sqrt3 a
  const double rho = kSqrt3 * phi.bandwidth;
  const double lo = 1.0 - rho, hi = 1.0 + rho;
  const int n = 2000;
  const double h = (hi - lo) / n;
  std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
  parallel_for(v.size(), [&](std::size_t i) {
    const double r = lo + static_cast<double>(i) * h;
    v[i] = psi_hat_formula(phi, beta, 1.0 - r) / r;
  });
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * h;
}

PsiResult psi_and_hat(const MotherWavelet& phi, const BetaVector& beta, double tol) {
  require_model_wavelet(phi);
  const double a = phi.bandwidth;
  const double L = 3.0 * phi.tail_radius;
  const PhiTable tab = tabulate_phi(phi, L, 2.0 * kPi / (64.0 * a));
  PsiResult r;
  // psi is band limited to sqrt3 a; the z integrand to 3a
  r.h_w = 2.0 * kPi / (64.0 * kSqrt3 * a);
  const double hz = 2.0 * kPi / (3.0 * a) / 1.25;
  const double W = 2.0 * L / beta.max_gap();
  const long nw = static_cast<long>(std::ceil(W / r.h_w));
  r.w.resize(static_cast<std::size_t>(2 * nw + 1));
  r.psi.resize(r.w.size());
  parallel_for(r.w.size(), [&](std::size_t i) {
    const double w = (static_cast<double>(i) - static_cast<double>(nw)) * r.h_w;
    r.w[i] = w;
    double lo = -kInf, hi = kInf;
    for (int j = 0; j < 3; ++j) {
      lo = std::max(lo, beta.beta[j] * w - L);
      hi = std::min(hi, beta.beta[j] * w + L);
    }
    double s = 0.0;
    if (hi > lo) {
      for (long m = static_cast<long>(std::ceil(lo / hz)); m <= static_cast<long>(std::floor(hi / hz)); ++m) {
        const double z = static_cast<double>(m) * hz;
        s += tab.at(z - beta.beta[0] * w) * tab.at(z - beta.beta[1] * w) * tab.at(z - beta.beta[2] * w);
      }
    }
    r.psi[i] = s * hz;
  });
  double pmax = 0.0;
  for (double v : r.psi) pmax = std::max(pmax, std::abs(v));
  for (std::size_t i = 0; i < r.psi.size(); ++i)
    r.even_error = std::max(r.even_error, std::abs(r.psi[i] - r.psi[r.psi.size() - 1 - i]));
  r.even_error /= std::max(pmax, 1e-300);

  const double eta_hi = 1.6 * kSqrt3 * a;
  const int ne = 481;
  r.eta.resize(ne);
  r.hat_transform.resize(ne);
  r.hat_formula.resize(ne);
  std::vector<double> imag(ne);
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t k) {
    const double eta = -eta_hi + 2.0 * eta_hi * static_cast<double>(k) / (ne - 1);
    r.eta[k] = eta;
    cplx s = 0.0;
    for (std::size_t i = 0; i < r.w.size(); ++i) s += r.psi[i] * std::exp(cplx(0.0, -eta * r.w[i]));
    s *= r.h_w;
    r.hat_transform[k] = s.real();
    imag[k] = std::abs(s.imag());
    r.hat_formula[k] = psi_hat_formula(phi, beta, eta);
  });
  double fmax = 0.0, dmax = 0.0;
  for (int k = 0; k < ne; ++k) {
    fmax = std::max(fmax, std::abs(r.hat_formula[k]));
    dmax = std::max(dmax, std::abs(r.hat_formula[k] - r.hat_transform[k]));
    r.hat_imag_max = std::max(r.hat_imag_max, imag[k]);
  }
  r.max_rel_diff = dmax / std::max(fmax, 1e-300);
  r.hat0 = r.hat_formula[ne / 2];
  r.min_hat = 0.0;
  for (int k = 0; k < ne; ++k) {
    r.min_hat = std::min({r.min_hat, r.hat_formula[k], r.hat_transform[k]});
    if (std::max(std::abs(r.hat_formula[k]), std::abs(r.hat_transform[k])) > 1e-8 * r.hat0)
      r.support_radius = std::max(r.support_radius, std::abs(r.eta[k]));
  }
  if (r.max_rel_diff > tol)
    throw NumericError("psi transform and formula routes disagree: " + std::to_string(r.max_rel_diff));
  return r;
}

// ---------------------------------------------------------------- constants a, b

double pv_integral(const std::function<double(double)>& g, double L, int n) {
  // midpoint rule on the even integrand (g(v) - g(-v))/v
  const double h = L / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = (i + 0.5) * h;
    s += (g(v) - g(-v)) / v;
  }
  return s * h;
}

namespace {

cplx reduction_lhs(const PsiResult& psi, const std::function<double(double)>& g) {
  const double rho = psi.support_radius;
  if (!(rho < 1.0)) throw InputError("hat psi must vanish near 1");
  const double vlo = -12.0, vhi = 12.5;
  const double tlo = (1.0 - rho) / 9.0, T = 1e4;
  const int per = 64;
  std::vector<double> ts;
  for (double t = tlo; t < T * 1.0001; t *= std::pow(2.0, 1.0 / per)) ts.push_back(t);
  std::vector<cplx> I(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    const double t = ts[k];
    const double dv = std::min(0.01, t / 32.0);
    const long n = static_cast<long>(std::ceil((vhi - vlo) / dv));
    const double h = (vhi - vlo) / n;
    cplx s = 0.0;
    for (long i = 0; i <= n; ++i) {
      const double v = vlo + i * h;
      s += g(v) * psi.psi_at(v / t) * std::exp(cplx(0.0, -v / t));
    }
    I[k] = s * h / (t * t);
  });
  const double lr = std::log(2.0) / per;
  cplx sum = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double w = (k == 0 || k + 1 == ts.size()) ? 0.5 : 1.0;
    sum += w * I[k] * ts[k] * lr;
  }
  // tail past the last node: psi(v/t) e^{-iv/t} ~ psi(0) + (psi'(0) - i psi(0)) v/t
  double G0 = 0.0, G1 = 0.0;
  const int n = 20000;
  const double h = (vhi - vlo) / n;
  for (int i = 0; i <= n; ++i) {
    const double v = vlo + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    G0 += w * g(v) * h;
    G1 += w * v * g(v) * h;
  }
  const double Tl = ts.back();
  const double p0 = psi.psi_at(0.0);
  const double dp = (psi.psi_at(psi.h_w) - psi.psi_at(-psi.h_w)) / (2.0 * psi.h_w);
  sum += p0 * G0 / Tl + cplx(dp, -p0) * G1 / (2.0 * Tl * Tl);
  return sum;
}

}  // namespace

ReductionConstants reduction_constants(const PsiResult& psi) {
  auto g1 = [](double v) { return std::exp(-0.5 * v * v); };
  auto g2 = [](double v) { return v * std::exp(-0.5 * v * v); };
  auto g3 = [](double v) { return std::exp(-0.5 * (v - 0.5) * (v - 0.5)); };
  ReductionConstants rc;
  rc.lhs_even = reduction_lhs(psi, g1);
  rc.lhs_odd = reduction_lhs(psi, g2);
  rc.lhs_third = reduction_lhs(psi, g3);
  const double m11 = g1(0.0), m12 = pv_integral(g1), m21 = g2(0.0), m22 = pv_integral(g2);
  const double det = m11 * m22 - m12 * m21;
  if (std::abs(det) < 1e-10 * (std::abs(m11 * m22) + std::abs(m12 * m21) + 1e-300))
    throw NumericError("test functions give a near-singular system for (a, b)");
  rc.a = (rc.lhs_even * m22 - rc.lhs_odd * m12) / det;
  rc.b = (rc.lhs_odd * m11 - rc.lhs_even * m21) / det;
  if (!(std::abs(rc.a) > 0.0) || !(std::abs(rc.b) > 0.0)) throw NumericError("a or b vanished");
  const cplx pred = rc.a * g3(0.0) + rc.b * pv_integral(g3);
  rc.residual = std::abs(rc.lhs_third - pred) / std::max(std::abs(rc.lhs_third), 1e-300);
  return rc;
}

ReductionFit calibrate_reduction(const std::array<LineSignal, 3>& even, const std::array<LineSignal, 3>& odd,
                                 const MotherWavelet& phi, const BetaVector& beta, const ModelFormOptions& mo,
                                 const PVQuadrature& pq) {
  ReductionFit fit;
  const cplx me = model_form(even[0], even[1], even[2], beta, phi, mo);
  const cplx pe = product_integral(even[0], even[1], even[2]);
  if (!(std::abs(pe) > 0.0)) throw InputError("calibration triple has zero product integral");
  fit.a = me / pe;
  const cplx mo2 = model_form(odd[0], odd[1], odd[2], beta, phi, mo);
  const cplx po = product_integral(odd[0], odd[1], odd[2]);
  const cplx lo = bht_direct(odd[0], odd[1], odd[2], beta, pq).value;
  if (!(std::abs(lo) > 1e-8 * std::abs(po))) throw InputError("calibration triple has Lambda_beta = 0");
  fit.b = (mo2 - fit.a * po) / lo;
  return fit;
}

ReductionReport verify_reduction(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                                 const MotherWavelet& phi, const BetaVector& beta, const ReductionFit& fit,
                                 const ModelFormOptions& mo, const PVQuadrature& pq) {
  ReductionReport r;
  r.model = model_form(f1, f2, f3, beta, phi, mo);
  r.product = product_integral(f1, f2, f3);
  r.lambda = bht_direct(f1, f2, f3, beta, pq).value;
  r.predicted = fit.a * r.product + fit.b * r.lambda;
  const double scale = std::max({std::abs(r.model), std::abs(fit.a * r.product), std::abs(fit.b * r.lambda)});
  r.residual = scale > 0.0 ? std::abs(r.model - r.predicted) / scale : 0.0;
  return r;
}

// ---------------------------------------------------------------- sizes S_j

std::vector<GenTent> bht_tip_lattice(const Upper3Grid& g, int ystride, int estride) {
  if (ystride < 1 || estride < 1) throw InputError("strides must be positive");
  std::vector<GenTent> tips;
  for (int q = 0; q < g.nt(); ++q)
    for (int l = estride / 2; l < g.neta(); l += estride)
      for (int j = ystride / 2; j < g.ny(); j += ystride) tips.push_back({g.y(j), g.eta(l), 2.0 * g.t(q)});
  return tips;
}

BHTSizes sizes_Sj(const Upper3Grid& grid, const BetaVector& beta, const std::vector<GenTent>& tips) {
  BHTSizes bs;
  bs.grid = grid;
  bs.beta = beta;
  bs.b = beta.min_gap() / 256.0;
  if (!(bs.b > 0.0)) throw InputError("degenerate beta: b = 0");
  bs.tents = build_gentent_space(grid, GenTentParams{1.0, 0.0, bs.b}, tips);
  const auto& gens = bs.tents.space.gensets;
  for (auto& l : bs.l2) l.resize(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const GenTent& T = bs.tents.tents[g];
    for (int c : gens[g].members) {
      const auto& co = bs.tents.space.cells[static_cast<std::size_t>(c)].coords;
      const double eta = co[1], t = co[2];
      int hits = 0;
      for (int j = 0; j < 3; ++j) {
        const bool in = std::abs((eta - T.xi - beta.beta[j] / t) / beta.alpha[j]) <= bs.b / t;
        if (in)
          ++hits;
        else
          bs.l2[j][g].push_back(c);
      }
      ++bs.checked_cells;
      if (hits > 1) ++bs.overlap_cells;
    }
  }
  bs.disjoint = bs.overlap_cells == 0;
  for (int j = 0; j < 3; ++j) bs.sizes[j] = SizeSpec::sb_composite(bs.l2[j]);
  return bs;
}

FactorizationReport factorization_check(const BHTSizes& bs, const std::array<Field, 3>& G) {
  FactorizationReport r;
  const auto& sp = bs.tents.space;
  std::array<std::vector<double>, 3> ab;
  for (int j = 0; j < 3; ++j) ab[j] = G[j].abs();
  std::vector<double> prod(sp.num_cells());
  for (std::size_t c = 0; c < prod.size(); ++c) prod[c] = ab[0][c] * ab[1][c] * ab[2][c];
  const SizeSpec s1 = SizeSpec::avg_l1();
  for (std::size_t g = 0; g < sp.num_gensets(); ++g) {
    const int gi = static_cast<int>(g);
    const double S = size_value(sp, s1, gi, prod);
    double P = 1.0;
    for (int j = 0; j < 3; ++j) P *= size_value(sp, bs.sizes[j], gi, ab[j]);
    ++r.tents;
    if (S == 0.0) continue;
    const double ratio = P > 0.0 ? S / P : kInf;
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.worst = gi;
    }
  }
  r.holds = r.max_ratio <= 4.0 * (1.0 + 1e-12);
  return r;
}

Field bht_G(const LineSignal& f, int j, const BetaVector& beta, const MotherWavelet& phi, const Upper3Grid& grid) {
  if (j < 0 || j > 2) throw InputError("component index must be 0, 1 or 2");
  grid.validate();
  std::vector<std::pair<double, double>> et;
  for (int q = 0; q < grid.nt(); ++q)
    for (int l = 0; l < grid.neta(); ++l) {
      const double t = grid.t(q);
      et.push_back({beta.alpha[j] * grid.eta(l) + beta.beta[j] / t, t});
    }
  const auto rows = time_frequency_rows(f, phi, et, grid.y(0), grid.dy, grid.ny());
  Field F(static_cast<std::size_t>(grid.num_cells()));
  for (int q = 0; q < grid.nt(); ++q)
    for (int l = 0; l < grid.neta(); ++l) {
      const auto& row = rows[static_cast<std::size_t>(q * grid.neta() + l)];
      for (int y = 0; y < grid.ny(); ++y) F.values[static_cast<std::size_t>(grid.index(y, l, q))] = row[y];
    }
  return F;
}

PhiMapCheck check_phi_map(const BetaVector& beta, const Upper3Grid& grid, const std::vector<GenTent>& tents,
                          int samples, std::uint64_t seed) {
  PhiMapCheck r;
  Rng rng(seed);
  const double slack = 1e-12;
  for (const auto& T : tents) {
    for (int j = 0; j < 3; ++j) {
      const double a = beta.alpha[j], b = beta.beta[j];
      auto in_tilted = [&](double y, double eta, double t) {
        if (!(t <= T.s * (1 + slack)) || std::abs(y - T.x) > T.s - t + slack) return false;
        return std::abs(a * (eta - T.xi / a) + b / t) <= (1.0 + slack) / t;
      };
      auto in_T = [&](double y, double eta, double t) {
        if (!(t <= T.s * (1 + slack)) || std::abs(y - T.x) > T.s - t + slack) return false;
        return std::abs(eta - T.xi) <= (1.0 + slack) / t;
      };
      // cell centres of T pulled back by Phi_j
      for (int q = 0; q < grid.nt(); ++q)
        for (int l = 0; l < grid.neta(); ++l)
          for (int y = 0; y < grid.ny(); ++y) {
            const double yy = grid.y(y), eta = grid.eta(l), t = grid.t(q);
            if (!in_gentent(GenTentParams{1.0, 0.0, 1.0}, T, yy, eta, t)) continue;
            ++r.backward;
            if (!in_tilted(yy, (eta - b / t) / a, t)) r.holds = false;
          }
      // random points of the tilted tent pushed forward
      for (int k = 0; k < samples; ++k) {
        const double t = T.s * (1.0 - rng.uniform());
        const double y = T.x + (T.s - t) * rng.uniform(-1.0, 1.0);
        const double c = T.xi / a - b / (a * t);
        const double eta = c + rng.uniform(-1.0, 1.0) / (std::abs(a) * t);
        ++r.forward;
        if (!in_tilted(y, eta, t)) r.holds = false;
        if (!in_T(y, a * eta + b / t, t)) r.holds = false;
      }
    }
  }
  return r;
}

BHTBoundReport bht_outer_bound(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                               const BetaVector& beta, double p1, double p2, double p3, const MotherWavelet& phi,
                               const Upper3Grid& grid, const ReductionFit& fit, const LambdaGrid& lg) {
  for (double p : {p1, p2, p3})
    if (!(p > 2.0) || !(p < kInf)) throw InputError("exponents must satisfy 2 < p_j < inf");
  if (std::abs(1.0 / p1 + 1.0 / p2 + 1.0 / p3 - 1.0) > 1e-9) throw InputError("1/p1 + 1/p2 + 1/p3 must be 1");
  BHTBoundReport r;
  r.p = {p1, p2, p3};
  r.fit = fit;
  const LineSignal* fs[3] = {&f1, &f2, &f3};
  r.model_value = model_form(f1, f2, f3, beta, phi);
  r.lambda_value = bht_direct(f1, f2, f3, beta).value;
  const cplx prod = product_integral(f1, f2, f3);
  const double scale =
      std::max({std::abs(r.model_value), std::abs(fit.a * prod), std::abs(fit.b * r.lambda_value)});
  r.residual = scale > 0.0 ? std::abs(r.model_value - fit.a * prod - fit.b * r.lambda_value) / scale : 0.0;
  const BHTSizes bs = sizes_Sj(grid, beta, bht_tip_lattice(grid));
  r.disjoint = bs.disjoint;
  std::array<Field, 3> G;
  double cl = 1.0, on = 1.0;
  for (int j = 0; j < 3; ++j) {
    G[j] = bht_G(*fs[j], j, beta, phi, grid);
    r.outer_norms[j] = lp_norm(bs.tents.space, bs.sizes[j], G[j], r.p[j], lg, SolveMode::Greedy).value;
    r.classical[j] = fs[j]->norm(r.p[j]);
    cl *= r.classical[j];
    on *= r.outer_norms[j];
  }
  r.ratio_lambda = cl > 0.0 ? std::abs(r.lambda_value) / cl : 0.0;
  r.ratio_model = cl > 0.0 ? std::abs(r.model_value) / cl : 0.0;
  r.ratio_model_outer = on > 0.0 ? std::abs(r.model_value) / on : 0.0;
  r.factorization = factorization_check(bs, G);
  return r;
}

}  // namespace olp
