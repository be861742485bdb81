#include "olp/outer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace olp {

// ---------------------------------------------------------------- space ----

void OuterSpace::finalize() {
  const int n = static_cast<int>(cells.size());
  for (int i = 0; i < n; ++i) {
    if (cells[i].id != i) throw InputError("cell ids must equal their position (cell " + std::to_string(i) + ")");
    if (!(cells[i].weight >= 0.0) || !std::isfinite(cells[i].weight))
      throw InputError("cell weight must be finite and nonnegative (cell " + std::to_string(i) + ")");
  }
  auto idx = std::make_shared<SpaceIndex>();
  idx->cell_gensets.assign(n, {});
  std::vector<char> covered(n, 0);
  for (std::size_t g = 0; g < gensets.size(); ++g) {
    auto& G = gensets[g];
    if (G.id != static_cast<int>(g)) throw InputError("genset ids must equal their position");
    if (!(G.sigma >= 0.0) || !std::isfinite(G.sigma))
      throw InputError("genset sigma must be finite and nonnegative (genset " + std::to_string(g) + ")");
    std::sort(G.members.begin(), G.members.end());
    G.members.erase(std::unique(G.members.begin(), G.members.end()), G.members.end());
    for (int c : G.members) {
      if (c < 0 || c >= n) throw InputError("genset " + std::to_string(g) + " names unknown cell " + std::to_string(c));
      idx->cell_gensets[c].push_back(static_cast<int>(g));
      covered[c] = 1;
    }
  }
  covers_carrier = std::all_of(covered.begin(), covered.end(), [](char v) { return v != 0; });
  idx->neighbors.assign(gensets.size(), {});
  std::vector<int> stamp(gensets.size(), -1);
  for (std::size_t g = 0; g < gensets.size(); ++g) {
    auto& nb = idx->neighbors[g];
    for (int c : gensets[g].members)
      for (int h : idx->cell_gensets[c])
        if (stamp[h] != static_cast<int>(g)) {
          stamp[h] = static_cast<int>(g);
          nb.push_back(h);
        }
    std::sort(nb.begin(), nb.end());
  }
  index_ = std::move(idx);
}

const SpaceIndex& OuterSpace::index() const {
  if (!index_) throw InputError("OuterSpace used before finalize()");
  return *index_;
}

OuterSpace scaled_space(const OuterSpace& space, double c) {
  OuterSpace out = space;
  for (auto& g : out.gensets) g.sigma *= c;
  out.finalize();
  return out;
}

// ---------------------------------------------------------------- sizes ----

SizeSpec SizeSpec::avg_l1() { return avg_lp(1.0); }
SizeSpec SizeSpec::avg_l2() { return avg_lp(2.0); }

SizeSpec SizeSpec::avg_lp(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("avg-Lp size needs 1 <= p < inf");
  SizeSpec s;
  s.kind = p == 1.0 ? SizeKind::AvgL1 : (p == 2.0 ? SizeKind::AvgL2 : SizeKind::AvgLp);
  s.exponent = p;
  s.quasi_const = 1.0;
  return s;
}

SizeSpec SizeSpec::avg_linf() {
  SizeSpec s;
  s.kind = SizeKind::AvgLinf;
  s.exponent = kInf;
  return s;
}

SizeSpec SizeSpec::sb_composite(std::vector<std::vector<int>> l2) {
  SizeSpec s;
  s.kind = SizeKind::SbComposite;
  s.exponent = 2.0;
  s.quasi_const = 1.0;
  for (auto& v : l2) std::sort(v.begin(), v.end());
  s.l2_members = std::make_shared<const std::vector<std::vector<int>>>(std::move(l2));
  return s;
}

SizeSpec SizeSpec::make_custom(CustomSize fn, double quasi_const) {
  SizeSpec s;
  s.kind = SizeKind::Custom;
  s.custom = std::move(fn);
  s.quasi_const = quasi_const;
  return s;
}

SizeSpec SizeSpec::fractional(const SizeSpec& base, double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0)) throw InputError("fractional size needs 0 < alpha <= 1");
  auto fn = [base, alpha](const OuterSpace& sp, int g, const std::vector<double>& absf,
                          const std::vector<char>& removed) {
    std::vector<double> powed(absf.size());
    for (std::size_t i = 0; i < absf.size(); ++i) powed[i] = std::pow(absf[i], 1.0 / alpha);
    return std::pow(size_value(sp, base, g, powed, removed), alpha);
  };
  // (a+b)^{1/alpha} <= 2^{1/alpha-1}(a^{1/alpha}+b^{1/alpha}) gives C = 2^{1/alpha-1} times base C^alpha.
  return make_custom(fn, std::pow(2.0, 1.0 / alpha - 1.0) * std::pow(base.quasi_const, alpha));
}

std::string SizeSpec::name() const {
  switch (kind) {
    case SizeKind::AvgL1: return "avg-L1";
    case SizeKind::AvgL2: return "avg-L2";
    case SizeKind::AvgLinf: return "avg-Linf";
    case SizeKind::AvgLp: return "avg-L" + std::to_string(exponent);
    case SizeKind::SbComposite: return "Sb-composite";
    case SizeKind::Custom: return "custom";
  }
  return "?";
}

Field Field::from_real(const std::vector<double>& v) {
  Field f(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) f.values[i] = v[i];
  return f;
}

std::vector<double> Field::abs() const {
  std::vector<double> a(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) a[i] = std::abs(values[i]);
  return a;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Exact: return "exact";
    case SolveStatus::GreedyUpperBound: return "greedy-upper-bound";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

// Precomputed evaluation tables for one (space, size, |f|).
class Engine {
 public:
  Engine(const OuterSpace& sp, const SizeSpec& sz, const std::vector<double>& absf)
      : sp_(sp), sz_(sz), absf_(absf), idx_(sp.index()) {
    if (absf.size() != sp.cells.size()) throw InputError("field length does not match the carrier");
    const std::size_t nc = sp.cells.size(), ng = sp.gensets.size();
    switch (sz.kind) {
      case SizeKind::AvgL1:
      case SizeKind::AvgL2:
      case SizeKind::AvgLp:
        has_add_ = true;
        q_ = sz.exponent;
        break;
      case SizeKind::AvgLinf:
        has_max_ = true;
        break;
      case SizeKind::SbComposite:
        has_add_ = has_max_ = true;
        q_ = 2.0;
        if (!sz.l2_members || sz.l2_members->size() != ng)
          throw InputError("Sb-composite size needs one L2 member list per genset");
        break;
      case SizeKind::Custom:
        if (!sz.custom) throw InputError("custom size without evaluator");
        custom_ = true;
        break;
    }
    contrib_.assign(nc, 0.0);
    if (has_add_)
      for (std::size_t c = 0; c < nc; ++c)
        contrib_[c] = sp.cells[c].weight * (q_ == 1.0 ? absf[c] : (q_ == 2.0 ? absf[c] * absf[c] : std::pow(absf[c], q_)));
    // incidence with L2 flags
    inc_.assign(nc, {});
    add_members_.assign(ng, {});
    for (std::size_t g = 0; g < ng; ++g) {
      const auto& mem = sp.gensets[g].members;
      if (sz.kind == SizeKind::SbComposite) {
        const auto& r = (*sz.l2_members)[g];
        if (!std::includes(mem.begin(), mem.end(), r.begin(), r.end()))
          throw InputError("Sb-composite L2 region must be a subset of its genset");
        add_members_[g] = r;
        std::size_t k = 0;
        for (int c : mem) {
          while (k < r.size() && r[k] < c) ++k;
          const bool in = k < r.size() && r[k] == c;
          inc_[c].push_back({static_cast<int>(g), in});
        }
      } else {
        if (has_add_) add_members_[g] = mem;
        for (int c : mem) inc_[c].push_back({static_cast<int>(g), has_add_});
      }
    }
    if (has_max_) {
      sorted_.assign(ng, {});
      for (std::size_t g = 0; g < ng; ++g) {
        auto v = sp.gensets[g].members;
        std::stable_sort(v.begin(), v.end(), [&](int a, int b) { return absf[a] > absf[b]; });
        while (!v.empty() && absf[v.back()] == 0.0) v.pop_back();
        sorted_[g] = std::move(v);
      }
    }
  }

  struct Inc {
    int g;
    bool in_add;
  };

  double combine(int g, double A, double M) const {
    double s = 0.0;
    if (has_add_) {
      const double sigma = sp_.gensets[g].sigma;
      if (A <= 0.0) {
        s = 0.0;
      } else if (sigma <= 0.0) {
        s = kInf;
      } else {
        const double r = A / sigma;
        s = q_ == 1.0 ? r : (q_ == 2.0 ? std::sqrt(r) : std::pow(r, 1.0 / q_));
      }
    }
    if (has_max_) s = s + M;
    return s;
  }

  // removed[c] != 0 or mark[c] == stamp excludes cell c.
  double eval(int g, const std::vector<char>& removed, const std::vector<int>* mark = nullptr, int stamp = 0) const {
    auto gone = [&](int c) {
      return (!removed.empty() && removed[c]) || (mark && (*mark)[c] == stamp);
    };
    if (custom_) {
      if (!mark) return sz_.custom(sp_, g, absf_, removed.empty() ? empty_mask() : removed);
      std::vector<char> tmp(sp_.cells.size(), 0);
      for (std::size_t c = 0; c < tmp.size(); ++c) tmp[c] = gone(static_cast<int>(c)) ? 1 : 0;
      return sz_.custom(sp_, g, absf_, tmp);
    }
    double A = 0.0, M = 0.0;
    if (has_add_)
      for (int c : add_members_[g])
        if (!gone(c)) A += contrib_[c];
    if (has_max_)
      for (int c : sorted_[g])
        if (!gone(c)) {
          M = absf_[c];
          break;
        }
    return combine(g, A, M);
  }

  double max_after(int g, const std::vector<char>& removed, const std::vector<int>& mark, int stamp) const {
    for (int c : sorted_[g])
      if (!removed[c] && mark[c] != stamp) return absf_[c];
    return 0.0;
  }

  double current_add(int g, const std::vector<char>& removed) const {
    double A = 0.0;
    for (int c : add_members_[g])
      if (!removed[c]) A += contrib_[c];
    return A;
  }

  // A cell can change sizes only if it carries mass.
  bool carries(int c) const { return has_add_ ? (contrib_[c] > 0.0 || (has_max_ && absf_[c] > 0.0)) : absf_[c] > 0.0; }

  const std::vector<char>& empty_mask() const {
    if (empty_.size() != sp_.cells.size()) empty_.assign(sp_.cells.size(), 0);
    return empty_;
  }

  const OuterSpace& sp_;
  const SizeSpec& sz_;
  const std::vector<double>& absf_;
  const SpaceIndex& idx_;
  bool has_add_ = false, has_max_ = false, custom_ = false;
  double q_ = 1.0;
  std::vector<double> contrib_;
  std::vector<std::vector<Inc>> inc_;
  std::vector<std::vector<int>> add_members_;
  std::vector<std::vector<int>> sorted_;
  mutable std::vector<char> empty_;
};

struct GreedyOut {
  bool feasible = true;
  Cover cover;
};

// Greedy by excess removed per unit cost.  Ratios are re-evaluated lazily:
// the top of the queue is recomputed and taken when it still beats the next
// stale entry.  Gains are not submodular, so an empty or non-positive queue
// triggers a full rescan before the fallback rule.
GreedyOut greedy_slm(const Engine& en, double lambda) {
  const auto& sp = en.sp_;
  const int nc = static_cast<int>(sp.cells.size());
  const int ng = static_cast<int>(sp.gensets.size());
  std::vector<char> removed(nc, 0), chosen(ng, 0);
  std::vector<double> S(ng), A(ng, 0.0);
  int violated = 0;
  for (int g = 0; g < ng; ++g) {
    S[g] = en.eval(g, removed);
    if (en.has_add_) A[g] = en.current_add(g, removed);
    if (S[g] > lambda) ++violated;
  }
  auto exc = [&](double s) { return s > lambda ? s - lambda : 0.0; };
  std::vector<int> mark(nc, -1), tstamp(ng, -1);
  std::vector<double> dA(ng, 0.0);
  std::vector<int> touched;
  int stamp = 0;
  GreedyOut out;

  auto ratio_of = [&](int G) {
    ++stamp;
    touched.clear();
    bool fresh = false;
    for (int c : sp.gensets[G].members) {
      if (removed[c]) continue;
      fresh = true;
      mark[c] = stamp;
      for (const auto& in : en.inc_[c]) {
        if (!(S[in.g] > lambda)) continue;
        if (tstamp[in.g] != stamp) {
          tstamp[in.g] = stamp;
          dA[in.g] = 0.0;
          touched.push_back(in.g);
        }
        if (in.in_add) dA[in.g] += en.contrib_[c];
      }
    }
    if (!fresh || touched.empty()) return 0.0;
    double gain = 0.0;
    for (int E : touched) {
      double after;
      if (en.custom_) {
        after = en.eval(E, removed, &mark, stamp);
      } else {
        const double M = en.has_max_ ? en.max_after(E, removed, mark, stamp) : 0.0;
        after = en.combine(E, std::max(0.0, A[E] - dA[E]), M);
      }
      gain += exc(S[E]) - exc(after);
    }
    if (!(gain > 0.0)) return 0.0;
    const double sigma = sp.gensets[G].sigma;
    return sigma > 0.0 ? gain / sigma : kInf;
  };

  // max ratio first, lower id on ties
  using Entry = std::pair<double, int>;
  auto worse = [](const Entry& a, const Entry& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); };
  std::vector<Entry> heap;
  // Keys start from the optimistic bound sum of the excess over violated
  // neighbours; only gensets whose bound beats the best exact ratio get evaluated.
  const auto& nb = en.idx_.neighbors;
  auto rescan = [&] {
    heap.clear();
    for (int G = 0; G < ng; ++G) {
      if (chosen[G]) continue;
      double ub = 0.0;
      for (int E : nb[G]) ub += exc(S[E]);
      if (!(ub > 0.0)) continue;
      const double sigma = sp.gensets[G].sigma;
      heap.push_back({sigma > 0.0 ? ub / sigma : kInf, G});
    }
    std::make_heap(heap.begin(), heap.end(), worse);
  };
  rescan();
  bool fresh_scan = true;

  while (violated > 0) {
    int best = -1;
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      const int G = heap.back().second;
      heap.pop_back();
      if (chosen[G]) continue;
      const double r = ratio_of(G);
      if (!(r > 0.0)) continue;
      if (heap.empty() || !worse({r, G}, heap.front())) {
        best = G;
        break;
      }
      heap.push_back({r, G});
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    if (best < 0 && !fresh_scan) {
      rescan();
      fresh_scan = true;
      continue;
    }
    if (best < 0) {
      // No single genset lowers the excess (ties in the sup part).  Remove the
      // top cell of the most violated set with the cheapest genset holding it.
      int worst = -1;
      for (int g = 0; g < ng; ++g)
        if (S[g] > lambda && (worst < 0 || S[g] > S[worst])) worst = g;
      int cell = -1;
      for (int c : sp.gensets[worst].members)
        if (!removed[c] && en.carries(c) && (cell < 0 || en.absf_[c] > en.absf_[cell])) cell = c;
      if (cell >= 0)
        for (int G : en.idx_.cell_gensets[cell])
          if (!chosen[G] && (best < 0 || sp.gensets[G].sigma < sp.gensets[best].sigma)) best = G;
      if (best < 0) {
        out.feasible = false;
        break;
      }
    }
    fresh_scan = false;
    chosen[best] = 1;
    out.cover.ids.push_back(best);
    ++stamp;
    touched.clear();
    for (int c : sp.gensets[best].members) {
      if (removed[c]) continue;
      removed[c] = 1;
      for (const auto& in : en.inc_[c])
        if (tstamp[in.g] != stamp) {
          tstamp[in.g] = stamp;
          touched.push_back(in.g);
        }
    }
    for (int E : touched) {
      const bool was = S[E] > lambda;
      S[E] = en.eval(E, removed);
      if (en.has_add_) A[E] = en.current_add(E, removed);
      if (was && !(S[E] > lambda)) --violated;
    }
  }
  std::sort(out.cover.ids.begin(), out.cover.ids.end());
  out.cover.cost = 0.0;
  for (int g : out.cover.ids) out.cover.cost += sp.gensets[g].sigma;
  return out;
}

class BranchBound {
 public:
  BranchBound(const Engine& en, double lambda, long budget) : en_(en), lambda_(lambda), budget_(budget) {
    const auto& sp = en.sp_;
    nc_ = static_cast<int>(sp.cells.size());
    ng_ = static_cast<int>(sp.gensets.size());
    cnt_.assign(nc_, 0);
    removed_.assign(nc_, 0);
    S_.resize(ng_);
    for (int g = 0; g < ng_; ++g) S_[g] = en.eval(g, removed_);
    incl_.assign(ng_, 0);
    excl_.assign(ng_, 0);
    cap_.assign(ng_, 0.0);
    capstamp_.assign(ng_, -1);
    dirty_.assign(ng_, -1);
    order_.resize(ng_);
    std::iota(order_.begin(), order_.end(), 0);
    const auto& nb = en.idx_.neighbors;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return nb[a].size() < nb[b].size(); });
  }

  void run(double incumbent, const std::vector<int>& incumbent_ids) {
    best_ = incumbent;
    best_ids_ = incumbent_ids;
    dfs();
  }

  double best_ = kInf;
  std::vector<int> best_ids_;
  long nodes_ = 0;
  bool aborted_ = false;

 private:
  struct Undo {
    int g;
    double s;
  };

  void include(int G, std::vector<Undo>& undo) {
    ++stamp_;
    std::vector<int> list;
    for (int c : en_.sp_.gensets[G].members)
      if (cnt_[c]++ == 0) {
        removed_[c] = 1;
        for (const auto& in : en_.inc_[c])
          if (dirty_[in.g] != stamp_) {
            dirty_[in.g] = stamp_;
            list.push_back(in.g);
          }
      }
    for (int E : list) {
      undo.push_back({E, S_[E]});
      S_[E] = en_.eval(E, removed_);
    }
    incl_[G] = 1;
  }

  void revert(int G, std::vector<Undo>& undo) {
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) S_[it->g] = it->s;
    undo.clear();
    for (int c : en_.sp_.gensets[G].members)
      if (--cnt_[c] == 0) removed_[c] = 0;
    incl_[G] = 0;
  }

  // Greedy dual ascent on "each violated set needs one of its neighbours".
  double lower_bound(bool& any_violated) {
    ++capround_;
    double lb = 0.0;
    any_violated = false;
    const auto& nb = en_.idx_.neighbors;
    for (int E : order_) {
      if (!(S_[E] > lambda_)) continue;
      any_violated = true;
      double m = kInf;
      for (int G : nb[E]) {
        if (excl_[G] || incl_[G]) continue;
        if (capstamp_[G] != capround_) {
          capstamp_[G] = capround_;
          cap_[G] = en_.sp_.gensets[G].sigma;
        }
        m = std::min(m, cap_[G]);
      }
      if (m == kInf) return kInf;
      if (m > 0.0) {
        lb += m;
        for (int G : nb[E])
          if (!excl_[G] && !incl_[G]) cap_[G] -= m;
      }
    }
    return lb;
  }

  void dfs() {
    if (aborted_) return;
    if (++nodes_ > budget_) {
      aborted_ = true;
      return;
    }
    bool violated = false;
    const double lb = lower_bound(violated);
    if (!violated) {
      if (cost_ < best_) {
        best_ = cost_;
        best_ids_ = chosen_;
      }
      return;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best_));
    if (lb == kInf || cost_ + lb >= best_ - tol) return;
    int Estar = -1;
    for (int E : order_)
      if (S_[E] > lambda_) {
        Estar = E;
        break;
      }
    std::vector<int> cand;
    ++stamp_;
    for (int c : en_.sp_.gensets[Estar].members) {
      if (removed_[c] || !en_.carries(c)) continue;
      for (int G : en_.idx_.cell_gensets[c])
        if (!excl_[G] && !incl_[G] && dirty_[G] != stamp_) {
          dirty_[G] = stamp_;
          cand.push_back(G);
        }
    }
    const auto& gs = en_.sp_.gensets;
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      if (gs[a].sigma != gs[b].sigma) return gs[a].sigma > gs[b].sigma;
      return a < b;
    });
    std::vector<Undo> undo;
    std::vector<int> excluded_here;
    for (int G : cand) {
      include(G, undo);
      chosen_.push_back(G);
      cost_ += gs[G].sigma;
      dfs();
      cost_ -= gs[G].sigma;
      chosen_.pop_back();
      revert(G, undo);
      excl_[G] = 1;
      excluded_here.push_back(G);
      if (aborted_) break;
    }
    for (int G : excluded_here) excl_[G] = 0;
  }

  const Engine& en_;
  double lambda_;
  long budget_;
  int nc_ = 0, ng_ = 0;
  std::vector<int> cnt_;
  std::vector<char> removed_;
  std::vector<double> S_;
  std::vector<char> incl_, excl_;
  std::vector<double> cap_;
  std::vector<int> capstamp_;
  int capround_ = 0;
  std::vector<int> dirty_;
  int stamp_ = 0;
  std::vector<int> order_;
  std::vector<int> chosen_;
  double cost_ = 0.0;
};

SuperLevelResult solve_slm(const Engine& en, double lambda, SolveMode mode, const SolverOptions& opt) {
  SuperLevelResult r;
  r.lambda = lambda;
  const auto& sp = en.sp_;
  std::vector<char> none(sp.cells.size(), 0);
  double sup = 0.0;
  for (std::size_t g = 0; g < sp.gensets.size(); ++g) sup = std::max(sup, en.eval(static_cast<int>(g), none));
  if (sup <= lambda) {
    r.value = 0.0;
    r.status = SolveStatus::Exact;
    return r;
  }
  GreedyOut gr = greedy_slm(en, lambda);
  if (!gr.feasible) {
    r.value = kInf;
    r.status = SolveStatus::Infeasible;
    return r;
  }
  if (mode == SolveMode::Greedy) {
    r.value = gr.cover.cost;
    r.witness = gr.cover;
    r.status = SolveStatus::GreedyUpperBound;
    return r;
  }
  BranchBound bb(en, lambda, opt.node_budget);
  bb.run(gr.cover.cost, gr.cover.ids);
  r.nodes = bb.nodes_;
  r.witness.ids = bb.best_ids_;
  std::sort(r.witness.ids.begin(), r.witness.ids.end());
  r.witness.cost = 0.0;
  for (int g : r.witness.ids) r.witness.cost += sp.gensets[g].sigma;
  r.value = r.witness.cost;
  r.status = bb.aborted_ ? SolveStatus::GreedyUpperBound : SolveStatus::Exact;
  return r;
}

}  // namespace

double size_value(const OuterSpace& space, const SizeSpec& size, int g, const std::vector<double>& absf,
                  const std::vector<char>& removed) {
  if (g < 0 || g >= static_cast<int>(space.gensets.size())) throw InputError("genset id out of range");
  if (size.kind == SizeKind::Custom) {
    if (!size.custom) throw InputError("custom size without evaluator");
    if (removed.empty()) return size.custom(space, g, absf, std::vector<char>(absf.size(), 0));
    return size.custom(space, g, absf, removed);
  }
  const auto& G = space.gensets[g];
  auto gone = [&](int c) { return !removed.empty() && removed[c]; };
  double A = 0.0, M = 0.0;
  double q = size.exponent;
  bool has_add = false, has_max = false;
  const std::vector<int>* add = &G.members;
  switch (size.kind) {
    case SizeKind::AvgL1:
    case SizeKind::AvgL2:
    case SizeKind::AvgLp: has_add = true; break;
    case SizeKind::AvgLinf: has_max = true; break;
    case SizeKind::SbComposite:
      has_add = has_max = true;
      q = 2.0;
      add = &(*size.l2_members)[g];
      break;
    default: break;
  }
  if (has_add)
    for (int c : *add)
      if (!gone(c)) A += space.cells[c].weight * (q == 1.0 ? absf[c] : std::pow(absf[c], q));
  if (has_max)
    for (int c : G.members)
      if (!gone(c)) M = std::max(M, absf[c]);
  double s = 0.0;
  if (has_add && A > 0.0) s = G.sigma > 0.0 ? std::pow(A / G.sigma, 1.0 / q) : kInf;
  return s + M;
}

double outer_essential_sup_abs(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                               const std::vector<char>& removed) {
  double sup = 0.0;
  for (std::size_t g = 0; g < space.gensets.size(); ++g)
    sup = std::max(sup, size_value(space, size, static_cast<int>(g), absf, removed));
  return sup;
}

double outer_essential_sup(const OuterSpace& space, const SizeSpec& size, const Field& f,
                           const std::vector<int>& excluded) {
  if (f.size() != space.cells.size()) throw InputError("field length does not match the carrier");
  std::vector<char> removed(space.cells.size(), 0);
  for (int c : excluded) {
    if (c < 0 || c >= static_cast<int>(space.cells.size())) throw InputError("excluded cell id out of range");
    removed[c] = 1;
  }
  return outer_essential_sup_abs(space, size, f.abs(), removed);
}

SuperLevelResult super_level_measure_abs(const OuterSpace& space, const SizeSpec& size,
                                         const std::vector<double>& absf, double lambda, SolveMode mode,
                                         const SolverOptions& opt) {
  if (!(lambda >= 0.0)) throw InputError("lambda must be positive");
  Engine en(space, size, absf);
  return solve_slm(en, lambda, mode, opt);
}

SuperLevelResult super_level_measure(const OuterSpace& space, const SizeSpec& size, const Field& f, double lambda,
                                     SolveMode mode, const SolverOptions& opt) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  return super_level_measure_abs(space, size, f.abs(), lambda, mode, opt);
}

bool cover_is_feasible(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                       const std::vector<int>& ids, double lambda) {
  std::vector<char> removed(space.cells.size(), 0);
  for (int g : ids)
    for (int c : space.gensets.at(g).members) removed[c] = 1;
  return outer_essential_sup_abs(space, size, absf, removed) <= lambda;
}

// ------------------------------------------------------- outer measure ----

namespace {

class SetCoverBB {
 public:
  SetCoverBB(const OuterSpace& sp, const std::vector<int>& target, long budget)
      : sp_(sp), idx_(sp.index()), target_(target), budget_(budget) {
    cnt_.assign(sp.cells.size(), 0);
    excl_.assign(sp.gensets.size(), 0);
    cap_.assign(sp.gensets.size(), 0.0);
    capstamp_.assign(sp.gensets.size(), -1);
    order_ = target;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return idx_.cell_gensets[a].size() < idx_.cell_gensets[b].size();
    });
  }

  void run(double incumbent, std::vector<int> ids) {
    best_ = incumbent;
    best_ids_ = std::move(ids);
    dfs();
  }

  double best_ = kInf;
  std::vector<int> best_ids_;
  long nodes_ = 0;
  bool aborted_ = false;

 private:
  void dfs() {
    if (aborted_) return;
    if (++nodes_ > budget_) {
      aborted_ = true;
      return;
    }
    ++round_;
    double lb = 0.0;
    int pick = -1;
    std::size_t pick_deg = 0;
    for (int c : order_) {
      if (cnt_[c] > 0) continue;
      double m = kInf;
      std::size_t deg = 0;
      for (int G : idx_.cell_gensets[c]) {
        if (excl_[G]) continue;
        ++deg;
        if (capstamp_[G] != round_) {
          capstamp_[G] = round_;
          cap_[G] = sp_.gensets[G].sigma;
        }
        m = std::min(m, cap_[G]);
      }
      if (m == kInf) return;
      if (pick < 0 || deg < pick_deg) {
        pick = c;
        pick_deg = deg;
      }
      if (m > 0.0) {
        lb += m;
        for (int G : idx_.cell_gensets[c])
          if (!excl_[G]) cap_[G] -= m;
      }
    }
    if (pick < 0) {
      if (cost_ < best_) {
        best_ = cost_;
        best_ids_ = chosen_;
      }
      return;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best_));
    if (cost_ + lb >= best_ - tol) return;
    std::vector<int> cand;
    for (int G : idx_.cell_gensets[pick])
      if (!excl_[G]) cand.push_back(G);
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      if (sp_.gensets[a].sigma != sp_.gensets[b].sigma) return sp_.gensets[a].sigma > sp_.gensets[b].sigma;
      return a < b;
    });
    std::vector<int> ex;
    for (int G : cand) {
      for (int c : sp_.gensets[G].members) ++cnt_[c];
      chosen_.push_back(G);
      cost_ += sp_.gensets[G].sigma;
      dfs();
      cost_ -= sp_.gensets[G].sigma;
      chosen_.pop_back();
      for (int c : sp_.gensets[G].members) --cnt_[c];
      excl_[G] = 1;
      ex.push_back(G);
      if (aborted_) break;
    }
    for (int G : ex) excl_[G] = 0;
  }

  const OuterSpace& sp_;
  const SpaceIndex& idx_;
  std::vector<int> target_;
  long budget_;
  std::vector<int> cnt_;
  std::vector<char> excl_;
  std::vector<double> cap_;
  std::vector<int> capstamp_;
  int round_ = 0;
  std::vector<int> order_;
  std::vector<int> chosen_;
  double cost_ = 0.0;
};

}  // namespace

MeasureResult outer_measure(const OuterSpace& space, const std::vector<int>& target_in, SolveMode mode,
                            const SolverOptions& opt) {
  const auto& idx = space.index();
  const int nc = static_cast<int>(space.cells.size());
  std::vector<int> target = target_in;
  for (int c : target)
    if (c < 0 || c >= nc) throw InputError("target cell id " + std::to_string(c) + " out of range");
  std::sort(target.begin(), target.end());
  target.erase(std::unique(target.begin(), target.end()), target.end());
  MeasureResult r;
  if (target.empty()) return r;
  for (int c : target)
    if (idx.cell_gensets[c].empty()) {
      r.value = kInf;
      r.status = SolveStatus::Infeasible;
      return r;
    }
  // greedy: most new target cells per unit cost
  std::vector<char> need(nc, 0), taken(space.gensets.size(), 0);
  for (int c : target) need[c] = 1;
  std::size_t left = target.size();
  Cover gc;
  while (left > 0) {
    int best = -1;
    double best_ratio = -1.0;
    for (std::size_t g = 0; g < space.gensets.size(); ++g) {
      if (taken[g]) continue;
      std::size_t k = 0;
      for (int c : space.gensets[g].members) k += need[c];
      if (k == 0) continue;
      const double s = space.gensets[g].sigma;
      const double ratio = s > 0.0 ? static_cast<double>(k) / s : kInf;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = static_cast<int>(g);
      }
    }
    taken[best] = 1;
    gc.ids.push_back(best);
    for (int c : space.gensets[best].members)
      if (need[c]) {
        need[c] = 0;
        --left;
      }
  }
  std::sort(gc.ids.begin(), gc.ids.end());
  for (int g : gc.ids) gc.cost += space.gensets[g].sigma;
  if (mode == SolveMode::Greedy) {
    r.value = gc.cost;
    r.witness = gc;
    r.status = SolveStatus::GreedyUpperBound;
    return r;
  }
  SetCoverBB bb(space, target, opt.node_budget);
  bb.run(gc.cost, gc.ids);
  r.nodes = bb.nodes_;
  r.witness.ids = bb.best_ids_;
  std::sort(r.witness.ids.begin(), r.witness.ids.end());
  for (int g : r.witness.ids) r.witness.cost += space.gensets[g].sigma;
  r.value = r.witness.cost;
  r.status = bb.aborted_ ? SolveStatus::GreedyUpperBound : SolveStatus::Exact;
  return r;
}

// ------------------------------------------------------------ layer cake ----

SuperLevelCurve super_level_curve(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                                  const LambdaGrid& grid, SolveMode mode, const SolverOptions& opt) {
  if (grid.per_binade < 1 || grid.binades < 1) throw InputError("lambda grid needs per_binade >= 1 and binades >= 1");
  SuperLevelCurve cv;
  cv.grid = grid;
  Engine en(space, size, absf);
  std::vector<char> none(space.cells.size(), 0);
  double sup = 0.0;
  for (std::size_t g = 0; g < space.gensets.size(); ++g) sup = std::max(sup, en.eval(static_cast<int>(g), none));
  cv.lambda_max = sup;
  const int N = grid.per_binade * grid.binades;
  cv.lambdas.resize(N + 1);
  for (int i = 0; i <= N; ++i) cv.lambdas[i] = sup * std::exp2(-static_cast<double>(i) / grid.per_binade);
  cv.mu.assign(N + 1, 0.0);
  if (sup == 0.0) return cv;
  if (sup == kInf) throw NumericError("outer essential supremum is infinite");
  std::vector<double> v(N + 1, -1.0);
  v[0] = 0.0;
  auto solve = [&](double lam) {
    SuperLevelResult r = solve_slm(en, lam, mode, opt);
    ++cv.evaluations;
    if (r.status != SolveStatus::Exact) cv.exact = false;
    return r.value;
  };
  auto at = [&](int i) {
    if (v[i] < 0.0) v[i] = solve(cv.lambdas[i]);
    return v[i];
  };
  at(N);
  // Monotone in lambda, so equal endpoint values pin the whole interval (exact
  // mode); with upper bounds the right endpoint still bounds the interior.
  std::vector<std::pair<int, int>> stack{{0, N}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (b - a <= 1) continue;
    if (at(a) == at(b)) {
      for (int k = a + 1; k < b; ++k) v[k] = v[b];
      continue;
    }
    const int m = (a + b) / 2;
    at(m);
    stack.push_back({m, b});
    stack.push_back({a, m});
  }
  cv.mu_floor = solve(0.0);
  double run = cv.mu_floor;
  for (int i = N; i >= 0; --i) {
    run = std::min(run, v[i]);
    cv.mu[i] = run;
  }
  cv.mu[0] = 0.0;
  return cv;
}

NormResult curve_lp(const SuperLevelCurve& c, double p) {
  if (!(p > 0.0)) throw InputError("p must be positive");
  NormResult r;
  if (p == kInf) {
    r.value = r.lower = r.upper = c.lambda_max;
    r.exact = true;
    return r;
  }
  r.exact = c.exact;
  if (c.lambda_max == 0.0) return r;
  const int N = static_cast<int>(c.lambdas.size()) - 1;
  const double B = c.grid.per_binade;
  const double lp0 = std::pow(c.lambda_max, p);
  auto lamp = [&](int i) { return lp0 * std::exp2(-p * i / B); };
  double up = 0.0, lo = 0.0;
  for (int i = 1; i <= N; ++i) {
    const double d = lamp(i - 1) - lamp(i);
    up = sat_add(up, sat_mul(d, c.mu[i]));
    lo = sat_add(lo, sat_mul(d, c.mu[i - 1]));
  }
  up = sat_add(up, sat_mul(lamp(N), c.mu_floor));
  lo = sat_add(lo, sat_mul(lamp(N), c.mu[N]));
  r.upper = std::pow(up, 1.0 / p);
  r.lower = std::pow(lo, 1.0 / p);
  r.value = r.upper;
  r.width = r.upper - r.lower;
  return r;
}

NormResult curve_weak_lp(const SuperLevelCurve& c, double p) {
  if (!(p > 0.0)) throw InputError("p must be positive");
  NormResult r;
  if (p == kInf) {
    r.value = r.lower = r.upper = c.lambda_max;
    return r;
  }
  r.exact = c.exact;
  if (c.lambda_max == 0.0) return r;
  const int N = static_cast<int>(c.lambdas.size()) - 1;
  const double B = c.grid.per_binade;
  const double lp0 = std::pow(c.lambda_max, p);
  auto lamp = [&](int i) { return lp0 * std::exp2(-p * i / B); };
  double up = sat_mul(lamp(N), c.mu_floor), lo = 0.0;
  for (int i = 1; i <= N; ++i) {
    up = std::max(up, sat_mul(lamp(i - 1), c.mu[i]));
    lo = std::max(lo, sat_mul(lamp(i), c.mu[i]));
  }
  r.upper = std::pow(up, 1.0 / p);
  r.lower = std::pow(lo, 1.0 / p);
  r.value = r.upper;
  r.width = r.upper - r.lower;
  return r;
}

NormResult lp_norm(const OuterSpace& space, const SizeSpec& size, const Field& f, double p, const LambdaGrid& grid,
                   SolveMode mode, const SolverOptions& opt) {
  if (!(p > 0.0)) throw InputError("p must be positive");
  if (p == kInf) {
    NormResult r;
    r.value = r.lower = r.upper = outer_essential_sup(space, size, f);
    return r;
  }
  return curve_lp(super_level_curve(space, size, f.abs(), grid, mode, opt), p);
}

NormResult weak_lp_norm(const OuterSpace& space, const SizeSpec& size, const Field& f, double p,
                        const LambdaGrid& grid, SolveMode mode, const SolverOptions& opt) {
  if (!(p > 0.0)) throw InputError("p must be positive");
  if (p == kInf) return lp_norm(space, size, f, p, grid, mode, opt);
  return curve_weak_lp(super_level_curve(space, size, f.abs(), grid, mode, opt), p);
}

// ------------------------------------------------------------- axioms ----

SizeAxiomReport verify_size_axioms(const OuterSpace& space, const SizeSpec& size, const std::vector<Field>& samples,
                                   int trials, std::uint64_t seed) {
  SizeAxiomReport rep;
  if (samples.empty() || space.gensets.empty()) return rep;
  Rng rng(seed);
  const std::size_t n = space.cells.size();
  const int ng = static_cast<int>(space.gensets.size());
  for (int t = 0; t < trials; ++t) {
    const Field& f = samples[rng.below(samples.size())];
    const Field& g = samples[rng.below(samples.size())];
    const auto af = f.abs(), ag = g.abs();
    std::vector<double> sum(n), shrunk(n), scaled(n);
    const double c = rng.uniform(-4.0, 4.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = std::abs(f.values[i] + g.values[i]);
      shrunk[i] = af[i] * rng.uniform();
      scaled[i] = std::abs(c * f.values[i]);
    }
    for (int E = 0; E < ng; ++E) {
      const double sf = size_value(space, size, E, af);
      const double sg = size_value(space, size, E, ag);
      const double ss = size_value(space, size, E, sum);
      const double sm = size_value(space, size, E, shrunk);
      const double sc = size_value(space, size, E, scaled);
      ++rep.checks;
      const double mono = sm - sf;
      if (mono > 1e-12 * std::max(1.0, sf)) {
        rep.monotone_ok = false;
        rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, mono);
      }
      const double serr = std::abs(sc - std::abs(c) * sf);
      rep.max_scaling_error = std::max(rep.max_scaling_error, serr / std::max(1e-300, std::abs(c) * sf));
      if (serr > 1e-12 * std::abs(c) * sf + 1e-300) rep.scaling_ok = false;
      if (sf + sg > 0.0) rep.observed_C = std::max(rep.observed_C, ss / (sf + sg));
    }
  }
  return rep;
}

}  // namespace olp
