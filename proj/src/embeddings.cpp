#include "olp/embeddings.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

#include "fft_lock.hpp"

namespace olp {

namespace {

bool near_int(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol * std::max(1.0, std::abs(v)); }

// Zero-padded copy of a signal with its DFT.  Buffer index i sits at xb + i dx.
class Spectral {
 public:
  Spectral(const LineSignal& f, double ylo, double yhi, double reach) : dx_(f.dx) {
    if (f.size() == 0) throw InputError("empty signal");
    const double xend = f.x(f.size() - 1);
    const double lo = std::min(f.x0, ylo) - reach - 8 * dx_;
    const double hi = std::max(xend, yhi) + reach + 8 * dx_;
    const long lead = static_cast<long>(std::ceil((f.x0 - lo) / dx_));
    const long span = lead + static_cast<long>(std::ceil((hi - f.x0) / dx_)) + 1;
    N_ = 1;
    while (N_ < span) N_ <<= 1;
    if (N_ > (1L << 24)) throw InputError("embedding buffer exceeds 2^24 samples; reduce kernel reach or extent");
    xb_ = f.x0 - static_cast<double>(lead) * dx_;
    fhat_.assign(N_, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) fhat_[lead + static_cast<long>(i)] = f.v[i];
    std::vector<cplx> tmp(N_);
    {
      std::lock_guard<std::mutex> lk(detail::fftw_mutex());
      fwd_ = fftw_plan_dft_1d(static_cast<int>(N_), reinterpret_cast<fftw_complex*>(fhat_.data()),
                              reinterpret_cast<fftw_complex*>(tmp.data()), FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
      bwd_ = fftw_plan_dft_1d(static_cast<int>(N_), reinterpret_cast<fftw_complex*>(tmp.data()),
                              reinterpret_cast<fftw_complex*>(fhat_.data()), FFTW_BACKWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(fhat_.data()), reinterpret_cast<fftw_complex*>(tmp.data()));
    fhat_.swap(tmp);
  }
  ~Spectral() {
    std::lock_guard<std::mutex> lk(detail::fftw_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  double xi(long m) const {
    const long k = m < N_ / 2 ? m : m - N_;
    return 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(N_) * dx_);
  }
  double nyquist() const { return kPi / dx_; }

  // Convolution row for a given multiplier, one thread per call.
  std::vector<cplx> row(const std::function<cplx(double)>& mult) const {
    std::vector<cplx> a(N_), out(N_);
    for (long m = 0; m < N_; ++m) a[m] = fhat_[m] * mult(xi(m));
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(a.data()), reinterpret_cast<fftw_complex*>(out.data()));
    const double inv = 1.0 / static_cast<double>(N_);
    for (auto& z : out) z *= inv;
    return out;
  }

  cplx at(const std::vector<cplx>& r, double y) const {
    const double u = (y - xb_) / dx_;
    const double iu = std::round(u);
    if (std::abs(u - iu) <= 1e-9 * std::max(1.0, std::abs(u))) {
      const long i = static_cast<long>(iu);
      return (i >= 0 && i < N_) ? r[i] : cplx(0.0);
    }
    const long i = static_cast<long>(std::floor(u));
    if (i < 0 || i + 1 >= N_) return 0.0;
    const double s = u - static_cast<double>(i);
    return (1.0 - s) * r[i] + s * r[i + 1];
  }

 private:
  double dx_, xb_ = 0.0;
  long N_ = 0;
  std::vector<cplx> fhat_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

void check_alignment(const LineSignal& f, double y0, double dy) {
  if (!(f.dx > 0.0)) throw InputError("signal step must be positive");
  if (!near_int(dy / f.dx) || std::round(dy / f.dx) < 1.0)
    throw InputError("grid step must be an integer multiple of the signal step");
  if (!near_int((y0 - f.x0) / f.dx)) throw InputError("grid points must lie on the signal lattice");
}

}  // namespace

Field embed_half_plane(const LineSignal& f, const MotherWavelet& phi, const UpperHalfPlaneGrid& grid) {
  return embed_tilted(f, phi, 0.0, 1.0, grid);
}

Field embed_tilted(const LineSignal& f, const MotherWavelet& phi, double alpha, double beta,
                   const UpperHalfPlaneGrid& grid) {
  grid.validate();
  if (phi.kind != WaveletKind::SpaceCompact) throw InputError("half-plane embedding needs a space-compact wavelet");
  if (!(std::abs(alpha) <= 1.0)) throw InputError("alpha must lie in [-1, 1]");
  if (!(beta > 0.0) || beta > 1.0) throw InputError("beta must lie in (0, 1]");
  const double m = -std::log2(beta) * grid.per_octave;
  if (!near_int(m)) throw InputError("beta is not on the level lattice (need log2(beta) * per_octave integral)");
  check_alignment(f, grid.y(0), grid.dy);
  const int ny = grid.ny();
  Field F(static_cast<std::size_t>(grid.num_cells()));
  const auto& ph = phi.phi_hat;
  const double ylo = grid.y(0), yhi = grid.y(ny - 1);
  // one padded buffer per level, sized by that level's kernel reach
  parallel_for(static_cast<std::size_t>(grid.levels), [&](std::size_t k) {
    const double t = grid.t(static_cast<int>(k));
    const double tb = beta * t;
    const double shift = std::abs(alpha) * t;
    Spectral sp(f, ylo - shift, yhi + shift, phi.support * tb);
    const auto r = sp.row([&](double xi) { return std::conj(ph(-tb * xi)); });
    for (int j = 0; j < ny; ++j) F.values[grid.index(j, static_cast<int>(k))] = sp.at(r, grid.y(j) + alpha * t);
  });
  return F;
}

std::vector<std::vector<cplx>> time_frequency_rows(const LineSignal& f, const MotherWavelet& phi,
                                                   const std::vector<std::pair<double, double>>& eta_t, double y0,
                                                   double dy, int ny) {
  if (phi.kind != WaveletKind::FrequencyCompact)
    throw InputError("time-frequency embedding needs a frequency-compact wavelet");
  check_alignment(f, y0, dy);
  if (eta_t.empty()) return {};
  double need = 0.0, emax = 0.0;
  for (const auto& [eta, t] : eta_t) {
    if (!(t > 0.0)) throw InputError("scale must be positive");
    emax = std::max(emax, std::abs(eta));
    need = std::max(need, std::abs(eta) + phi.bandwidth / t);
  }
  // eight samples per modulation period, and the kernel spectrum inside the Nyquist band
  if (emax * f.dx > 2.0 * kPi / 8.0) throw InputError("signal step too coarse for the modulation frequencies");
  if (need >= kPi / f.dx) throw InputError("signal step too coarse for the kernel bandwidth");
  // rows sharing a scale share one padded buffer sized by that scale's reach
  std::vector<double> scales;
  for (const auto& [eta, t] : eta_t) scales.push_back(t);
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  std::vector<std::unique_ptr<Spectral>> bufs(scales.size());
  parallel_for(scales.size(), [&](std::size_t i) {
    bufs[i] = std::make_unique<Spectral>(f, y0, y0 + (ny - 1) * dy, phi.tail_radius * scales[i]);
  });
  std::vector<std::vector<cplx>> out(eta_t.size(), std::vector<cplx>(static_cast<std::size_t>(ny)));
  const auto& ph = phi.phi_hat;
  parallel_for(eta_t.size(), [&](std::size_t i) {
    const double eta = eta_t[i].first, t = eta_t[i].second;
    const auto& sp = *bufs[std::lower_bound(scales.begin(), scales.end(), t) - scales.begin()];
    const auto r = sp.row([&](double xi) { return ph(t * (xi - eta)); });
    for (int j = 0; j < ny; ++j) out[i][j] = sp.at(r, y0 + j * dy);
  });
  return out;
}

Field embed_time_frequency(const LineSignal& f, const MotherWavelet& phi, const Upper3Grid& grid) {
  grid.validate();
  std::vector<std::pair<double, double>> rows;
  for (int q = 0; q < grid.nt(); ++q)
    for (int l = 0; l < grid.neta(); ++l) rows.emplace_back(grid.eta(l), grid.t(q));
  const int ny = grid.ny();
  auto r = time_frequency_rows(f, phi, rows, grid.y(0), grid.dy, ny);
  Field F(static_cast<std::size_t>(grid.num_cells()));
  for (int q = 0; q < grid.nt(); ++q)
    for (int l = 0; l < grid.neta(); ++l) {
      const auto& row = r[static_cast<std::size_t>(q) * grid.neta() + l];
      for (int j = 0; j < ny; ++j) F.values[grid.index(j, l, q)] = row[j];
    }
  return F;
}

LineSignal hl_maximal(const LineSignal& f) {
  const long n = static_cast<long>(f.size());
  std::vector<double> P(n + 1, 0.0);
  for (long i = 0; i < n; ++i) P[i + 1] = P[i] + std::abs(f.v[i]);
  std::vector<double> M(n, 0.0);
  for (long a = 0; a < n; ++a) {
    double suf = 0.0;
    for (long b = n - 1; b >= a; --b) {
      suf = std::max(suf, (P[b + 1] - P[a]) / static_cast<double>(b - a + 1));
      M[b] = std::max(M[b], suf);
    }
  }
  LineSignal out = f;
  for (long i = 0; i < n; ++i) out.v[i] = M[i];
  return out;
}

CZDecomposition cz_decompose(const LineSignal& f, double level, double c_phi) {
  if (!(level > 0.0)) throw InputError("CZ level must be positive");
  if (!(c_phi > 0.0)) throw InputError("CZ constant must be positive");
  const long n = static_cast<long>(f.size());
  const double thr = c_phi * level;
  const auto M = hl_maximal(f);
  std::vector<char> om(n, 0);
  long count = 0;
  for (long i = 0; i < n; ++i)
    if (std::real(M.v[i]) > thr) om[i] = 1, ++count;
  if (count == n) throw InputError("CZ level too small: the maximal function exceeds it everywhere");
  CZDecomposition cz;
  cz.level = level;
  cz.c_phi = c_phi;
  cz.good = f;
  std::vector<std::pair<long, long>> iv;
  for (long i = 0; i < n;) {
    if (!om[i]) {
      ++i;
      continue;
    }
    long j = i;
    while (j + 1 < n && om[j + 1]) ++j;
    const long a = std::max(0L, i - 1), b = std::min(n - 1, j + 1);
    if (!iv.empty() && a <= iv.back().second)
      iv.back().second = b;
    else
      iv.emplace_back(a, b);
    i = j + 1;
  }
  for (const auto& [a, b] : iv) {
    cplx avg = 0.0;
    for (long i = a; i <= b; ++i) avg += f.v[i];
    avg /= static_cast<double>(b - a + 1);
    CZBad bd;
    bd.i0 = a;
    bd.i1 = b;
    bd.x = 0.5 * (f.x(a) + f.x(b));
    bd.s = 0.5 * static_cast<double>(b - a + 1) * f.dx;
    for (long i = a; i <= b; ++i) {
      bd.v.push_back(f.v[i] - avg);
      cz.good.v[i] = avg;
    }
    cz.bad.push_back(std::move(bd));
  }
  return cz;
}

double calderon_constant(const MotherWavelet& phi) {
  double peak = 0.0;
  for (int i = -2000; i <= 2000; ++i) peak = std::max(peak, std::abs(phi.phi_hat(i * 0.01)));
  if (!(peak > 0.0)) throw NumericError("wavelet spectrum vanishes");
  if (std::abs(phi.phi_hat(0.0)) > 1e-8 * peak)
    throw InputError("wavelet is not mean zero: the Calderon integral diverges at t -> inf");
  const double umax = phi.kind == WaveletKind::FrequencyCompact ? phi.bandwidth : 2000.0 * std::max(1.0, 1.0 / phi.support);
  const double umin = 1e-7;
  auto side = [&](double xi) {
    const double a = std::log(umin / std::abs(xi)), b = std::log(umax / std::abs(xi));
    const int n = static_cast<int>((b - a) / 2e-4);
    return trapezoid([&](double v) { return std::norm(phi.phi_hat(std::exp(v) * xi)); }, a, b, n);
  };
  const double xs[] = {1.0, 2.5, 0.4};
  const double ref = side(1.0);
  for (double x : xs)
    for (double sg : {1.0, -1.0}) {
      const double v = side(sg * x);
      if (std::abs(v - ref) > 1e-6 * ref)
        throw InputError("Calderon integral depends on the frequency (" + std::to_string(sg * x) + ": " +
                         std::to_string(v) + " vs " + std::to_string(ref) + ")");
    }
  return ref;
}

CalderonCheck calderon_grid_check(const LineSignal& f, const MotherWavelet& phi, const UpperHalfPlaneGrid& grid) {
  CalderonCheck c;
  const auto F = embed_half_plane(f, phi, grid);
  const double w = grid.weight();
  for (const auto& z : F.values) c.grid_integral += std::norm(z) * w;
  const double n2 = f.norm(2.0);
  c.predicted = calderon_constant(phi) * n2 * n2;
  c.rel_error = std::abs(c.grid_integral - c.predicted) / c.predicted;
  return c;
}

}  // namespace olp
