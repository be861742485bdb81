#include "olp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace olp {

namespace {

// Groups [a, b] into maximal runs with equal signature; the signature is
// monotone in the index, so equal values form intervals and galloping is exact.
template <class Sig, class Emit>
void group_runs(long a, long b, Sig sig, Emit emit) {
  long cur = a;
  while (cur <= b) {
    const auto s0 = sig(cur);
    long last = cur, step = 1;
    while (last + step <= b && sig(last + step) == s0) {
      last += step;
      step *= 2;
    }
    long lo = last, hi = std::min(last + step, b + 1);
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      if (sig(mid) == s0)
        lo = mid;
      else
        hi = mid;
    }
    emit(cur, lo, s0);
    cur = lo + 1;
  }
}

struct Sparse {
  std::vector<std::vector<double>> t;
  void build(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    t.assign(1, v);
    for (int w = 1; 2 * w <= n; w *= 2) {
      const auto& p = t.back();
      std::vector<double> nx(n - 2 * w + 1);
      for (int i = 0; i + 2 * w <= n; ++i) nx[i] = std::max(p[i], p[i + w]);
      t.push_back(std::move(nx));
    }
  }
  double query(int a, int b) const {
    if (a > b) return 0.0;
    int lev = 0;
    while ((2 << lev) <= b - a + 1) ++lev;
    return std::max(t[lev][a], t[lev][b - (1 << lev) + 1]);
  }
};

// Prefix sums of the live energy |F|^2 w on each level.
struct Energy {
  const Upper3Grid* g = nullptr;
  int ny = 0, ne = 0, nq = 0;
  std::vector<std::vector<double>> P, R;

  void init(const Upper3Grid& grid) {
    g = &grid;
    ny = grid.ny();
    ne = grid.neta();
    nq = grid.nt();
    P.assign(nq, std::vector<double>(static_cast<std::size_t>(ne + 1) * (ny + 1), 0.0));
    R.assign(nq, std::vector<double>(ne + 1, 0.0));
  }
  void build(int q, const std::vector<double>& absF, const std::vector<char>& removed) {
    auto& p = P[q];
    auto& r = R[q];
    const double w = g->weight(q);
    for (int l = 0; l < ne; ++l) {
      double row = 0.0;
      for (int j = 0; j < ny; ++j) {
        const long c = g->index(j, l, q);
        const double v = removed[c] ? 0.0 : absF[c] * absF[c] * w;
        row += v;
        p[(l + 1) * (ny + 1) + j + 1] = p[l * (ny + 1) + j + 1] + row;
      }
      r[l + 1] = r[l] + row;
    }
  }
  double rect(int q, int j0, int j1, int l0, int l1) const {
    if (j0 > j1 || l0 > l1) return 0.0;
    const auto& p = P[q];
    auto at = [&](int l, int j) { return p[l * (ny + 1) + j]; };
    return at(l1 + 1, j1 + 1) - at(l0, j1 + 1) - at(l1 + 1, j0) + at(l0, j0);
  }
  double rows(int q, int l0, int l1) const { return l0 > l1 ? 0.0 : R[q][l1 + 1] - R[q][l0]; }
};

// eta pieces of T \ T^b at level q, restricted to one half (side = +1, -1) or not (0).
int pieces(const LatticeClasses::XiClass& e, int q, int side, int ne, int (&lo)[2], int (&hi)[2]) {
  int cnt = 0;
  const int a = e.l0[q], b = e.l1[q], m0 = e.m0[q], m1 = e.m1[q];
  if (a > b) return 0;
  auto push = [&](int x, int y) {
    if (side > 0) x = std::max(x, e.split);
    if (side < 0) y = std::min(y, e.split - 1);
    x = std::max(x, 0);
    y = std::min(y, ne - 1);
    if (x <= y) lo[cnt] = x, hi[cnt] = y, ++cnt;
  };
  if (m0 > m1) {
    push(a, b);
  } else {
    push(a, std::min(b, m0 - 1));
    push(std::max(a, m1 + 1), b);
  }
  return cnt;
}

double region_energy(const Energy& E, const LatticeClasses::Scale& sc, const LatticeClasses::XClass& x,
                     const LatticeClasses::XiClass& e, int side) {
  double v = 0.0;
  for (int q = 0; q < sc.nq; ++q) {
    if (x.j0[q] > x.j1[q]) continue;
    int lo[2], hi[2];
    const int c = pieces(e, q, side, E.ne, lo, hi);
    for (int i = 0; i < c; ++i) v += E.rect(q, x.j0[q], x.j1[q], lo[i], hi[i]);
  }
  return v;
}

double region_bound(const Energy& E, const LatticeClasses::Scale& sc, const LatticeClasses::XiClass& e, int side) {
  double v = 0.0;
  for (int q = 0; q < sc.nq; ++q) {
    int lo[2], hi[2];
    const int c = pieces(e, q, side, E.ne, lo, hi);
    for (int i = 0; i < c; ++i) v += E.rows(q, lo[i], hi[i]);
  }
  return v;
}

bool overlaps(const LatticeClasses::Scale& sc, const LatticeClasses::XClass& x, const LatticeClasses::XiClass& e) {
  for (int q = 0; q < sc.nq; ++q)
    if (x.j0[q] <= x.j1[q] && e.l0[q] <= e.l1[q]) return true;
  return false;
}

}  // namespace

long LatticeClasses::lattice_tents() const {
  long n = 0;
  for (const auto& sc : scales)
    for (const auto& x : sc.xs)
      for (const auto& e : sc.xis)
        if (overlaps(sc, x, e)) n += (x.n_last - x.n_first + 1) * (e.l_last - e.l_first + 1);
  return n;
}

LatticeClasses build_lattice_classes(const Upper3Grid& g, const TentLattice& lat) {
  g.validate();
  lat.params.validate();
  LatticeClasses lc;
  lc.grid = g;
  lc.lattice = lat;
  const auto& p = lat.params;
  const double t0 = g.t(0);
  for (int k = lat.kmin; k <= lat.kmax; ++k) {
    const double s = std::ldexp(1.0, k);
    if (s < t0) continue;
    LatticeClasses::Scale sc;
    sc.k = k;
    sc.s = s;
    while (sc.nq < g.nt() && g.t(sc.nq) <= s) ++sc.nq;
    const int nq = sc.nq;
    const double xs = lat.x_step(k), es = lat.xi_step(k);
    // x classes
    const long n0 = static_cast<long>(std::floor((-g.Y - s) / xs)) - 1;
    const long n1 = static_cast<long>(std::ceil((g.Y + s) / xs)) + 1;
    auto xsig = [&](long n) {
      std::vector<int> v(2 * nq);
      const GenTent T{xs * static_cast<double>(n), 0.0, s};
      for (int q = 0; q < nq; ++q) {
        gentent_y_range(g, T, q, v[2 * q], v[2 * q + 1]);
        if (v[2 * q] > v[2 * q + 1]) v[2 * q] = 0, v[2 * q + 1] = -1;
      }
      return v;
    };
    group_runs(n0, n1, xsig, [&](long a, long b, const std::vector<int>& v) {
      LatticeClasses::XClass x;
      x.n_first = a;
      x.n_last = b;
      bool any = false;
      for (int q = 0; q < nq; ++q) {
        x.j0.push_back(v[2 * q]);
        x.j1.push_back(v[2 * q + 1]);
        any = any || v[2 * q] <= v[2 * q + 1];
      }
      if (!any) return;
      for (long n = a; n <= b; ++n) {
        const double xv = xs * static_cast<double>(n);
        if (xv - (s - t0) < -g.Y || xv + (s - t0) > g.Y) ++x.clipped;
      }
      sc.xs.push_back(std::move(x));
    });
    // xi classes
    const double w = (1.0 + std::abs(p.beta)) / (std::abs(p.alpha) * t0);
    const long l0 = static_cast<long>(std::floor((g.eta0 - g.H - w) / es)) - 1;
    const long l1 = static_cast<long>(std::ceil((g.eta0 + g.H + w) / es)) + 1;
    if (l1 - l0 > (1L << 30)) throw InputError("xi lattice too fine for this grid");
    auto esig = [&](long l) {
      std::vector<int> v(4 * nq + 1);
      const GenTent T{0.0, es * static_cast<double>(l), s};
      for (int q = 0; q < nq; ++q) {
        int a, b, c, d;
        gentent_eta_range(g, p, T, q, a, b);
        btent_eta_range(g, p.b, T, q, c, d);
        if (a > b) a = 0, b = -1;
        if (c > d) c = 0, d = -1;
        v[4 * q] = a, v[4 * q + 1] = b, v[4 * q + 2] = c, v[4 * q + 3] = d;
      }
      v[4 * nq] = eta_split(g, T.xi);
      return v;
    };
    const double A = std::min(-1.0 - p.beta, 1.0 - p.beta) / (p.alpha * t0);
    const double B = std::max(-1.0 - p.beta, 1.0 - p.beta) / (p.alpha * t0);
    group_runs(l0, l1, esig, [&](long a, long b, const std::vector<int>& v) {
      LatticeClasses::XiClass e;
      e.l_first = a;
      e.l_last = b;
      bool any = false;
      for (int q = 0; q < nq; ++q) {
        e.l0.push_back(v[4 * q]);
        e.l1.push_back(v[4 * q + 1]);
        e.m0.push_back(v[4 * q + 2]);
        e.m1.push_back(v[4 * q + 3]);
        any = any || v[4 * q] <= v[4 * q + 1];
      }
      e.split = v[4 * nq];
      if (!any) return;
      for (long l = a; l <= b; ++l) {
        const double xi = es * static_cast<double>(l);
        if (xi + A < g.eta0 - g.H || xi + B > g.eta0 + g.H) ++e.clipped;
      }
      sc.xis.push_back(std::move(e));
    });
    if (!sc.xs.empty() && !sc.xis.empty()) lc.scales.push_back(std::move(sc));
  }
  return lc;
}

SelectionCertificate certify_selection(const LatticeClasses& lc, const std::vector<double>& absF,
                                       const std::vector<char>& removed, double lambda) {
  const auto& g = lc.grid;
  if (absF.size() != static_cast<std::size_t>(g.num_cells()) || removed.size() != absF.size())
    throw InputError("field size does not match grid");
  const int ny = g.ny(), ne = g.neta(), nq = g.nt();
  Energy E;
  E.init(g);
  for (int q = 0; q < nq; ++q) E.build(q, absF, removed);
  // row maxima over y, and per-level maxima over all y for the cheap bound
  std::vector<std::vector<Sparse>> rowmax(nq, std::vector<Sparse>(ne));
  std::vector<Sparse> bandmax(nq);
  for (int q = 0; q < nq; ++q) {
    std::vector<double> full(ne, 0.0);
    for (int l = 0; l < ne; ++l) {
      std::vector<double> r(ny);
      for (int j = 0; j < ny; ++j) {
        const long c = g.index(j, l, q);
        r[j] = removed[c] ? 0.0 : absF[c];
        full[l] = std::max(full[l], r[j]);
      }
      rowmax[q][l].build(r);
    }
    bandmax[q].build(full);
  }
  struct Part {
    long classes = 0, tents = 0, clipped = 0;
    double max_size = 0.0;
    bool holds = true;
  };
  std::vector<Part> parts(lc.scales.size());
  parallel_for(lc.scales.size(), [&](std::size_t si) {
    const auto& sc = lc.scales[si];
    Part& P = parts[si];
    std::vector<double> bound_l2(sc.xis.size()), bound_sup(sc.xis.size());
    for (std::size_t ei = 0; ei < sc.xis.size(); ++ei) {
      const auto& e = sc.xis[ei];
      bound_l2[ei] = region_bound(E, sc, e, 0);
      double m = 0.0;
      for (int q = 0; q < sc.nq; ++q) m = std::max(m, bandmax[q].query(e.l0[q], e.l1[q]));
      bound_sup[ei] = m;
    }
    for (const auto& x : sc.xs) {
      std::vector<Sparse> col;  // built on first exact evaluation
      for (std::size_t ei = 0; ei < sc.xis.size(); ++ei) {
        const auto& e = sc.xis[ei];
        if (!overlaps(sc, x, e)) continue;
        const long mx = x.n_last - x.n_first + 1, me = e.l_last - e.l_first + 1;
        ++P.classes;
        P.tents += mx * me;
        P.clipped += mx * me - (mx - x.clipped) * (me - e.clipped);
        if (std::sqrt(bound_l2[ei] / sc.s) + bound_sup[ei] <= P.max_size) continue;
        if (col.empty()) {
          col.resize(sc.nq);
          for (int q = 0; q < sc.nq; ++q) {
            std::vector<double> c(ne, 0.0);
            if (x.j0[q] <= x.j1[q])
              for (int l = 0; l < ne; ++l) c[l] = rowmax[q][l].query(x.j0[q], x.j1[q]);
            col[q].build(c);
          }
        }
        double sup = 0.0;
        for (int q = 0; q < sc.nq; ++q)
          if (x.j0[q] <= x.j1[q]) sup = std::max(sup, col[q].query(e.l0[q], e.l1[q]));
        const double size = std::sqrt(region_energy(E, sc, x, e, 0) / sc.s) + sup;
        P.max_size = std::max(P.max_size, size);
        if (size > lambda * (1.0 + 1e-12)) P.holds = false;
      }
    }
  });
  SelectionCertificate cert;
  for (const auto& P : parts) {
    cert.classes += P.classes;
    cert.tents += P.tents;
    cert.clipped_tents += P.clipped;
    cert.max_size = std::max(cert.max_size, P.max_size);
    cert.holds = cert.holds && P.holds;
  }
  return cert;
}

SelectionResult select_tents_weak2(const LatticeClasses& lc, const std::vector<double>& absF, double lambda,
                                   const SelectionOptions& opt) {
  const auto& g = lc.grid;
  const auto& lat = lc.lattice;
  if (!(lambda > 0.0)) throw InputError("selection level must be positive");
  if (absF.size() != static_cast<std::size_t>(g.num_cells())) throw InputError("field size does not match grid");
  const int ny = g.ny(), ne = g.neta(), nq = g.nt();
  SelectionResult res;
  res.lambda = lambda;
  res.removed.assign(absF.size(), 0);
  auto& removed = res.removed;

  // stage 1
  const double lam0 = opt.stage1_fraction * lambda;
  struct Cand {
    int q;
    long l, n;
    long cell;
    CentralContainment cc;
  };
  std::vector<Cand> cands;
  for (int q = 0; q < nq; ++q)
    for (int l = 0; l < ne; ++l)
      for (int j = 0; j < ny; ++j) {
        const long c = g.index(j, l, q);
        if (!(absF[c] > lam0)) continue;
        const auto cc = central_containment(g.y(j), g.eta(l), g.t(q), lat);
        cands.push_back(Cand{q, cc.l_minus, cc.n, c, cc});
      }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::make_tuple(-a.q, a.l, a.n, a.cell) < std::make_tuple(-b.q, b.l, b.n, b.cell);
  });
  auto mark = [&](const GenTent& T) {
    for (const auto& r : gentent_rects(g, lat.params, T))
      for (int l = r.l0; l <= r.l1; ++l)
        for (int j = r.j0; j <= r.j1; ++j) removed[g.index(j, l, r.q)] = 1;
  };
  for (const auto& c : cands) {
    if (removed[c.cell]) continue;
    SelectedTent st;
    st.stage = 0;
    st.k = c.cc.k;
    st.n = c.cc.n;
    st.l = c.cc.l_minus;
    st.tent = GenTent{c.cc.x, c.cc.xi_minus, c.cc.s};
    st.clipped = gentent_clipped(g, lat.params, st.tent);
    mark(st.tent);
    if (!removed[c.cell]) throw NumericError("stage-1 tent does not contain its point");
    res.tents.push_back(st);
    ++res.stage1;
  }

  // stage 2
  Energy E;
  E.init(g);
  for (int q = 0; q < nq; ++q) E.build(q, absF, removed);
  const double thr = opt.bad_fraction * lambda * lambda;
  std::vector<int> owner(absF.size(), -1);
  long overlap = 0;
  for (int side : {+1, -1}) {
    struct Entry {
      double xi, s;
      int si, ei;
    };
    std::vector<Entry> order;
    for (std::size_t si = 0; si < lc.scales.size(); ++si) {
      const auto& sc = lc.scales[si];
      const double es = lat.xi_step(sc.k);
      for (std::size_t ei = 0; ei < sc.xis.size(); ++ei) {
        const auto& e = sc.xis[ei];
        const double xi = es * static_cast<double>(side > 0 ? e.l_last : e.l_first);
        order.push_back(Entry{xi, sc.s, static_cast<int>(si), static_cast<int>(ei)});
      }
    }
    std::sort(order.begin(), order.end(), [side](const Entry& a, const Entry& b) {
      const double ka = side > 0 ? -a.xi : a.xi, kb = side > 0 ? -b.xi : b.xi;
      return std::make_tuple(ka, -a.s, a.si, a.ei) < std::make_tuple(kb, -b.s, b.si, b.ei);
    });
    for (const auto& en : order) {
      const auto& sc = lc.scales[en.si];
      const auto& e = sc.xis[en.ei];
      if (region_bound(E, sc, e, side) / sc.s < thr) continue;
      for (const auto& x : sc.xs) {
        if (!overlaps(sc, x, e)) continue;
        if (region_energy(E, sc, x, e, side) / sc.s < thr) continue;
        SelectedTent st;
        st.stage = side;
        st.k = sc.k;
        st.n = x.n_first;
        st.l = side > 0 ? e.l_last : e.l_first;
        st.tent = lat.point(sc.k, st.n, st.l);
        st.clipped = gentent_clipped(g, lat.params, st.tent);
        // reduced region T* before E grows
        const int id = static_cast<int>(res.tents.size());
        for (int q = 0; q < sc.nq; ++q) {
          if (x.j0[q] > x.j1[q]) continue;
          int lo[2], hi[2];
          const int c = pieces(e, q, side, ne, lo, hi);
          for (int i = 0; i < c; ++i)
            for (int l = lo[i]; l <= hi[i]; ++l)
              for (int j = x.j0[q]; j <= x.j1[q]; ++j) {
                const long cell = g.index(j, l, q);
                if (removed[cell]) continue;
                ++st.reduced_cells;
                if (owner[cell] >= 0) ++overlap;
                owner[cell] = id;
              }
        }
        for (int q = 0; q < sc.nq; ++q)
          for (int l = std::max(0, e.l0[q]); l <= std::min(ne - 1, e.l1[q]); ++l)
            for (int j = x.j0[q]; j <= x.j1[q]; ++j) removed[g.index(j, l, q)] = 1;
        for (int q = 0; q < sc.nq; ++q) E.build(q, absF, removed);
        res.tents.push_back(st);
        if (side > 0)
          ++res.plus;
        else
          ++res.minus;
        if (region_bound(E, sc, e, side) / sc.s < thr) break;
      }
    }
  }
  for (const auto& t : res.tents) res.total_sigma += t.tent.s;
  res.cert = certify_selection(lc, absF, removed, lambda);
  res.cert.overlap_cells = overlap;
  res.cert.disjoint = overlap == 0;
  return res;
}

}  // namespace olp
