#include "olp/gentents.hpp"

#include <algorithm>
#include <cmath>

namespace olp {

int Upper3Grid::ny() const { return static_cast<int>(std::lround(2.0 * Y / dy)); }
int Upper3Grid::neta() const { return static_cast<int>(std::lround(2.0 * H / deta)); }
double Upper3Grid::t(int q) const { return std::ldexp(1.0, kmin + q); }
double Upper3Grid::dt(int q) const { return t(q) / std::sqrt(2.0); }

void Upper3Grid::validate() const {
  if (!(Y > 0.0) || !(dy > 0.0) || !(H > 0.0) || !(deta > 0.0)) throw InputError("Upper3Grid: extents and steps must be positive");
  if (std::abs(2.0 * Y / dy - ny()) > 1e-9 || ny() < 1) throw InputError("Upper3Grid: 2Y must be a multiple of dy");
  if (std::abs(2.0 * H / deta - neta()) > 1e-9 || neta() < 1) throw InputError("Upper3Grid: 2H must be a multiple of deta");
  if (kmax < kmin) throw InputError("Upper3Grid: empty level range");
  if (num_cells() > (1L << 28)) throw InputError("Upper3Grid: too many cells");
}

void GenTentParams::validate() const {
  if (!(std::abs(alpha) > 0.0) || std::abs(alpha) > 1.0) throw InputError("generalized tents need 0 < |alpha| <= 1");
  if (!(std::abs(beta) <= 0.9)) throw InputError("generalized tents need |beta| <= 0.9");
  if (!(b > 0.0) || b > (1.0 - std::abs(beta)) / std::abs(alpha)) throw InputError("bandwidth b out of range");
}

bool in_gentent(const GenTentParams& p, const GenTent& T, double y, double eta, double t) {
  if (!(t <= T.s) || !(t > 0.0)) return false;
  if (std::abs(y - T.x) > T.s - t) return false;
  return std::abs(p.alpha * (eta - T.xi) + p.beta / t) <= 1.0 / t;
}

bool in_btent(double b, const GenTent& T, double y, double eta, double t) {
  if (!(t <= T.s) || !(t > 0.0)) return false;
  if (std::abs(y - T.x) > T.s - t) return false;
  return std::abs(eta - T.xi) <= b / t;
}

namespace {

// Smallest/largest index in [0, n) satisfying a predicate that holds on an interval of indices,
// starting from a guess computed in floating point and corrected against the predicate itself.
template <class Pred>
void index_range(int n, double guess_lo, double guess_hi, Pred pred, int& lo, int& hi) {
  auto clampi = [n](double v) {
    if (!(v > -1.0)) return 0;
    if (v > n - 1) return n - 1;
    return static_cast<int>(v);
  };
  int a = clampi(std::ceil(guess_lo));
  int c = clampi(std::floor(guess_hi));
  if (a > c) std::swap(a, c);
  // find one member near the guess
  int m = -1;
  for (int i = std::max(0, a - 2); i <= std::min(n - 1, c + 2); ++i)
    if (pred(i)) {
      m = i;
      break;
    }
  if (m < 0) {
    lo = 0;
    hi = -1;
    return;
  }
  lo = m;
  while (lo > 0 && pred(lo - 1)) --lo;
  hi = m;
  while (hi + 1 < n && pred(hi + 1)) ++hi;
}

void y_range(const Upper3Grid& g, double x, double half, int& j0, int& j1) {
  const double base = -g.Y + 0.5 * g.dy;
  index_range(
      g.ny(), (x - half - base) / g.dy, (x + half - base) / g.dy,
      [&](int j) { return std::abs(g.y(j) - x) <= half; }, j0, j1);
}

template <class Pred>
void eta_range(const Upper3Grid& g, double lo, double hi, Pred pred, int& l0, int& l1) {
  const double base = g.eta0 - g.H + 0.5 * g.deta;
  index_range(g.neta(), (lo - base) / g.deta, (hi - base) / g.deta, pred, l0, l1);
}

// Continuum eta interval of T_{alpha,beta} at height t.
void gentent_band(const GenTentParams& p, const GenTent& T, double t, double& lo, double& hi) {
  const double a = (-1.0 - p.beta) / (p.alpha * t);
  const double c = (1.0 - p.beta) / (p.alpha * t);
  lo = T.xi + std::min(a, c);
  hi = T.xi + std::max(a, c);
}

}  // namespace

void gentent_y_range(const Upper3Grid& g, const GenTent& T, int q, int& j0, int& j1) {
  y_range(g, T.x, T.s - g.t(q), j0, j1);
}

void gentent_eta_range(const Upper3Grid& g, const GenTentParams& p, const GenTent& T, int q, int& l0, int& l1) {
  const double t = g.t(q);
  double lo, hi;
  gentent_band(p, T, t, lo, hi);
  eta_range(
      g, lo, hi, [&](int l) { return std::abs(p.alpha * (g.eta(l) - T.xi) + p.beta / t) <= 1.0 / t; }, l0, l1);
}

void btent_eta_range(const Upper3Grid& g, double b, const GenTent& T, int q, int& l0, int& l1) {
  const double t = g.t(q);
  eta_range(
      g, T.xi - b / t, T.xi + b / t, [&](int l) { return std::abs(g.eta(l) - T.xi) <= b / t; }, l0, l1);
}

int eta_split(const Upper3Grid& g, double xi) {
  const int n = g.neta();
  const double base = g.eta0 - g.H + 0.5 * g.deta;
  int l = static_cast<int>(std::clamp(std::ceil((xi - base) / g.deta), 0.0, static_cast<double>(n)));
  while (l > 0 && g.eta(l - 1) >= xi) --l;
  while (l < n && g.eta(l) < xi) ++l;
  return l;
}

std::vector<LevelRect> gentent_rects(const Upper3Grid& g, const GenTentParams& p, const GenTent& T) {
  std::vector<LevelRect> out;
  for (int q = 0; q < g.nt(); ++q) {
    const double t = g.t(q);
    if (!(t <= T.s)) continue;
    LevelRect r;
    r.q = q;
    y_range(g, T.x, T.s - t, r.j0, r.j1);
    double lo, hi;
    gentent_band(p, T, t, lo, hi);
    eta_range(
        g, lo, hi, [&](int l) { return std::abs(p.alpha * (g.eta(l) - T.xi) + p.beta / t) <= 1.0 / t; }, r.l0, r.l1);
    if (!r.empty()) out.push_back(r);
  }
  return out;
}

std::vector<LevelRect> btent_rects(const Upper3Grid& g, double b, const GenTent& T) {
  std::vector<LevelRect> out;
  for (int q = 0; q < g.nt(); ++q) {
    const double t = g.t(q);
    if (!(t <= T.s)) continue;
    LevelRect r;
    r.q = q;
    y_range(g, T.x, T.s - t, r.j0, r.j1);
    eta_range(
        g, T.xi - b / t, T.xi + b / t, [&](int l) { return std::abs(g.eta(l) - T.xi) <= b / t; }, r.l0, r.l1);
    if (!r.empty()) out.push_back(r);
  }
  return out;
}

std::vector<int> rect_cells(const Upper3Grid& g, const std::vector<LevelRect>& rects) {
  std::vector<int> out;
  for (const auto& r : rects)
    for (int l = r.l0; l <= r.l1; ++l)
      for (int j = r.j0; j <= r.j1; ++j) out.push_back(static_cast<int>(g.index(j, l, r.q)));
  std::sort(out.begin(), out.end());
  return out;
}

bool gentent_clipped(const Upper3Grid& g, const GenTentParams& p, const GenTent& T) {
  for (int q = 0; q < g.nt(); ++q) {
    const double t = g.t(q);
    if (!(t <= T.s)) continue;
    if (T.x - (T.s - t) < -g.Y || T.x + (T.s - t) > g.Y) return true;
    double lo, hi;
    gentent_band(p, T, t, lo, hi);
    if (lo < g.eta0 - g.H || hi > g.eta0 + g.H) return true;
  }
  return false;
}

double TentLattice::x_step(int k) const { return cx * std::ldexp(1.0, k); }
double TentLattice::xi_step(int k) const { return cxi * params.b * std::ldexp(1.0, -k); }

GenTent TentLattice::point(int k, long n, long l) const {
  return GenTent{x_step(k) * static_cast<double>(n), xi_step(k) * static_cast<double>(l), std::ldexp(1.0, k)};
}

std::vector<LatticePoint> TentLattice::enumerate(const Upper3Grid& g) const {
  params.validate();
  if (!(cx > 0.0) || !(cxi > 0.0)) throw InputError("lattice steps must be positive");
  std::vector<LatticePoint> out;
  const double tmin = g.t(0);
  for (int k = kmin; k <= kmax; ++k) {
    const double s = std::ldexp(1.0, k);
    if (s < tmin) continue;
    const double xs = x_step(k), es = xi_step(k);
    const long n0 = static_cast<long>(std::floor((-g.Y - s) / xs)) - 1;
    const long n1 = static_cast<long>(std::ceil((g.Y + s) / xs)) + 1;
    const double w = (1.0 + std::abs(params.beta)) / (std::abs(params.alpha) * tmin);
    const long l0 = static_cast<long>(std::floor((g.eta0 - g.H - w) / es)) - 1;
    const long l1 = static_cast<long>(std::ceil((g.eta0 + g.H + w) / es)) + 1;
    if (static_cast<double>(n1 - n0) * static_cast<double>(l1 - l0) > 5e7)
      throw InputError("lattice too large for this grid; coarsen the lattice constants");
    for (long n = n0; n <= n1; ++n) {
      const GenTent ty = point(k, n, 0);
      // y extent is independent of xi
      bool yhit = false;
      for (int q = 0; q < g.nt() && !yhit; ++q) {
        if (!(g.t(q) <= s)) continue;
        int j0, j1;
        y_range(g, ty.x, s - g.t(q), j0, j1);
        yhit = j0 <= j1;
      }
      if (!yhit) continue;
      for (long l = l0; l <= l1; ++l) {
        const GenTent T = point(k, n, l);
        bool hit = false;
        for (int q = 0; q < g.nt() && !hit; ++q) {
          const double t = g.t(q);
          if (!(t <= s)) continue;
          double lo, hi;
          gentent_band(params, T, t, lo, hi);
          int a, c;
          eta_range(
              g, lo, hi, [&](int li) { return std::abs(params.alpha * (g.eta(li) - T.xi) + params.beta / t) <= 1.0 / t; },
              a, c);
          hit = a <= c;
        }
        if (!hit) continue;
        out.push_back(LatticePoint{k, n, l, T, gentent_clipped(g, params, T)});
      }
    }
  }
  return out;
}

GenTentSpace build_gentent_space(const Upper3Grid& g, const GenTentParams& p, const std::vector<GenTent>& tips) {
  g.validate();
  p.validate();
  GenTentSpace gs;
  gs.grid = g;
  gs.params = p;
  gs.space.cells.resize(static_cast<std::size_t>(g.num_cells()));
  for (int q = 0; q < g.nt(); ++q)
    for (int l = 0; l < g.neta(); ++l)
      for (int j = 0; j < g.ny(); ++j) {
        Cell& c = gs.space.cells[static_cast<std::size_t>(g.index(j, l, q))];
        c.id = static_cast<int>(g.index(j, l, q));
        c.coords = {g.y(j), g.eta(l), g.t(q)};
        c.weight = g.weight(q);
      }
  // member lists dominate memory; fail as an input problem well before the allocator does
  constexpr std::size_t kMembershipBudget = 60'000'000;
  std::size_t stored = 0;
  for (const auto& T : tips) {
    if (!(T.s > 0.0)) throw InputError("tent height must be positive");
    auto cells = rect_cells(g, gentent_rects(g, p, T));
    if (cells.empty()) continue;
    auto bcells = rect_cells(g, btent_rects(g, p.b, T));
    std::vector<int> l2;
    std::set_difference(cells.begin(), cells.end(), bcells.begin(), bcells.end(), std::back_inserter(l2));
    stored += cells.size() + l2.size();
    if (stored > kMembershipBudget)
      throw InputError("generalized tent space too large for this grid; coarsen the lattice constants");
    GeneratingSet G;
    G.id = static_cast<int>(gs.space.gensets.size());
    G.members = std::move(cells);
    G.sigma = T.s;
    gs.space.gensets.push_back(std::move(G));
    gs.l2_regions.push_back(std::move(l2));
    gs.tents.push_back(T);
    gs.clipped.push_back(gentent_clipped(g, p, T) ? 1 : 0);
  }
  gs.space.finalize();
  return gs;
}

GenTentSpace build_gentent_space(const Upper3Grid& g, const TentLattice& lat) {
  std::vector<GenTent> tips;
  for (const auto& lp : lat.enumerate(g)) tips.push_back(lp.tent);
  return build_gentent_space(g, lat.params, tips);
}

SizeSpec size_Sb(const GenTentSpace& gs) { return SizeSpec::sb_composite(gs.l2_regions); }

double sb_value(const Upper3Grid& g, const GenTentParams& p, const GenTent& T, const std::vector<double>& absF,
                const std::vector<char>& removed) {
  if (absF.size() != static_cast<std::size_t>(g.num_cells())) throw InputError("field size does not match grid");
  auto live = [&](long c) { return removed.empty() || !removed[static_cast<std::size_t>(c)]; };
  double sup = 0.0, l2 = 0.0;
  for (const auto& r : gentent_rects(g, p, T)) {
    const double t = g.t(r.q);
    for (int l = r.l0; l <= r.l1; ++l) {
      const bool inb = std::abs(g.eta(l) - T.xi) <= p.b / t;
      for (int j = r.j0; j <= r.j1; ++j) {
        const long c = g.index(j, l, r.q);
        if (!live(c)) continue;
        const double v = absF[static_cast<std::size_t>(c)];
        sup = std::max(sup, v);
        if (!inb) l2 += v * v * g.weight(r.q);
      }
    }
  }
  return std::sqrt(l2 / T.s) + sup;
}

CentralContainment central_containment(double xp, double xip, double sp, const TentLattice& lat) {
  if (!(sp > 0.0) || !std::isfinite(sp) || !std::isfinite(xp) || !std::isfinite(xip))
    throw InputError("central containment needs finite input with s' > 0");
  CentralContainment cc;
  int k = static_cast<int>(std::ceil(std::log2(4.0 * sp)));
  while (std::ldexp(1.0, k) < 4.0 * sp) ++k;
  while (std::ldexp(1.0, k - 1) >= 4.0 * sp) --k;
  if (k < lat.kmin || k > lat.kmax) throw InputError("central containment: scale outside the lattice extent");
  cc.k = k;
  cc.s = std::ldexp(1.0, k);
  const double xs = lat.x_step(k), es = lat.xi_step(k);
  cc.n = std::lround(xp / xs);
  cc.x = xs * static_cast<double>(cc.n);
  long lm = static_cast<long>(std::floor(xip / es));
  while (es * static_cast<double>(lm) > xip) --lm;
  while (es * static_cast<double>(lm + 1) <= xip) ++lm;
  long lp = static_cast<long>(std::ceil(xip / es));
  while (es * static_cast<double>(lp) < xip) ++lp;
  while (es * static_cast<double>(lp - 1) >= xip) --lp;
  cc.l_minus = lm;
  cc.l_plus = lp;
  cc.xi_minus = es * static_cast<double>(lm);
  cc.xi_plus = es * static_cast<double>(lp);
  return cc;
}

ContainmentCheck check_central_containment(double xp, double xip, double sp, const TentLattice& lat, int points,
                                           Rng& rng) {
  const auto cc = central_containment(xp, xip, sp, lat);
  const auto& p = lat.params;
  ContainmentCheck r;
  r.scale_ok = cc.s >= 4.0 * sp && cc.s < 8.0 * sp;
  r.x_ok = std::abs(xp - cc.x) <= lat.cx * cc.s;
  const double tol = lat.cxi * p.b / cc.s;
  r.xi_ok = cc.xi_minus <= xip && xip <= cc.xi_plus && xip - cc.xi_minus <= tol && cc.xi_plus - xip <= tol;
  const GenTent Tp{xp, xip, sp}, Tm{cc.x, cc.xi_minus, cc.s}, Tq{cc.x, cc.xi_plus, cc.s};
  for (int i = 0; i < points; ++i) {
    // t spread over several octaves below s'
    const double t = sp * std::exp2(-6.0 * rng.uniform());
    const double y = xp + (sp - t) * rng.uniform(-1.0, 1.0);
    double eta;
    if (i % 2 == 0) {
      double lo, hi;
      gentent_band(p, Tp, t, lo, hi);
      eta = rng.uniform(lo, hi);
    } else {
      // aim at T^b(x, xi-, s) and T^b(x, xi+, s) jointly
      const double lo = cc.xi_plus - p.b / t, hi = cc.xi_minus + p.b / t;
      eta = rng.uniform(lo, hi);
    }
    if (!in_gentent(p, Tp, y, eta, t)) continue;
    ++r.points;
    if (!in_gentent(p, Tm, y, eta, t) && !in_gentent(p, Tq, y, eta, t)) r.cover_ok = false;
    if (in_btent(p.b, Tm, y, eta, t) && in_btent(p.b, Tq, y, eta, t) && !in_btent(p.b, Tp, y, eta, t))
      r.btent_ok = false;
  }
  return r;
}

EquivalenceReport measure_equivalence_check(const GenTentSpace& continuum, const GenTentSpace& lattice, int samples,
                                            std::uint64_t seed, SolveMode mode) {
  if (continuum.space.num_cells() != lattice.space.num_cells()) throw InputError("spaces must share the grid");
  EquivalenceReport rep;
  const int G = static_cast<int>(continuum.space.num_gensets());
  if (G == 0) return rep;
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const int m = 1 + static_cast<int>(rng.below(3));
    std::vector<int> target;
    for (int a = 0; a < m; ++a) {
      const auto& mem = continuum.space.gensets[rng.below(static_cast<std::uint64_t>(G))].members;
      target.insert(target.end(), mem.begin(), mem.end());
    }
    std::sort(target.begin(), target.end());
    target.erase(std::unique(target.begin(), target.end()), target.end());
    const auto mc = outer_measure(continuum.space, target, mode);
    const auto ml = outer_measure(lattice.space, target, mode);
    ++rep.samples;
    if (!(mc.value > 0.0)) continue;
    const double ratio = ml.value / mc.value;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    // greedy is not monotone in the collection, so only certified values can contradict mu <= mu_Delta
    const bool exact = mc.status == SolveStatus::Exact && ml.status == SolveStatus::Exact;
    if (exact) ++rep.exact_samples;
    if (exact && ml.value < mc.value * (1.0 - 1e-12)) rep.lower_ok = false;
  }
  return rep;
}

}  // namespace olp
