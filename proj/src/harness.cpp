#include "olp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "olp/dyadic.hpp"
#include "olp/embeddings.hpp"
#include "olp/forms.hpp"
#include "olp/gentents.hpp"
#include "olp/selection.hpp"

namespace olp {

// ------------------------------------------------------------- signals ----

SignalKind parse_signal_kind(const std::string& s) {
  if (s == "gaussian-mix") return SignalKind::GaussianMix;
  if (s == "step") return SignalKind::Step;
  if (s == "random-trig") return SignalKind::RandomTrig;
  if (s == "wave-packet") return SignalKind::WavePacket;
  if (s == "spike") return SignalKind::Spike;
  throw InputError("unknown signal family '" + s + "'");
}

std::string to_string(SignalKind k) {
  switch (k) {
    case SignalKind::GaussianMix: return "gaussian-mix";
    case SignalKind::Step: return "step";
    case SignalKind::RandomTrig: return "random-trig";
    case SignalKind::WavePacket: return "wave-packet";
    case SignalKind::Spike: return "spike";
  }
  return "?";
}

namespace {

struct Bump {
  double c, w, a, xi, ph;
};

double gauss_cut(double u) { return std::abs(u) > 8.6 ? 0.0 : std::exp(-0.5 * u * u); }

}  // namespace

double signal_extent(const SignalFamily& fam) {
  const double L = fam.extent;
  switch (fam.kind) {
    case SignalKind::GaussianMix:
    case SignalKind::WavePacket: return 0.5 * L + 2.0 * 8.6;
    case SignalKind::Spike: return 0.5 * L + 0.5 * 8.6;
    case SignalKind::Step:
    case SignalKind::RandomTrig: return L;
  }
  return L;
}

std::vector<SignalFn> generate_signals(const SignalFamily& fam) {
  if (fam.count < 0) throw InputError("signal count must be nonnegative");
  if (!(fam.extent > 0.0)) throw InputError("signal extent must be positive");
  const Rng base(fam.seed);
  const double L = fam.extent;
  std::vector<SignalFn> out;
  out.reserve(fam.count);
  for (int i = 0; i < fam.count; ++i) {
    Rng r = base.split(static_cast<std::uint64_t>(i));
    switch (fam.kind) {
      case SignalKind::GaussianMix:
      case SignalKind::WavePacket:
      case SignalKind::Spike: {
        const bool packet = fam.kind == SignalKind::WavePacket;
        const bool spike = fam.kind == SignalKind::Spike;
        const int n = 1 + static_cast<int>(r.below(packet ? 2 : 3));
        std::vector<Bump> bs;
        for (int k = 0; k < n; ++k) {
          Bump b;
          b.c = r.uniform(-0.5 * L, 0.5 * L);
          b.w = spike ? std::exp2(r.uniform(-2.0, -1.0)) : std::exp2(r.uniform(-1.0, 1.0));
          b.a = spike ? r.uniform(1.0, 3.0) : r.uniform(0.5, 1.5);
          if (!packet && r.uniform() < 0.5) b.a = -b.a;
          b.xi = packet ? r.uniform(0.0, 1.5) : 0.0;
          b.ph = 0.0;
          bs.push_back(b);
        }
        const bool real = fam.real;
        out.push_back([bs, packet, real](double x) {
          cplx s = 0.0;
          for (const auto& b : bs) {
            const double g = b.a * gauss_cut((x - b.c) / b.w);
            if (!packet) s += g;
            else if (real) s += g * std::cos(b.xi * x);
            else s += g * std::exp(cplx(0.0, b.xi * x));
          }
          return s;
        });
        break;
      }
      case SignalKind::Step: {
        const int n = 2 + static_cast<int>(r.below(4));
        std::vector<double> cuts(n + 1);
        for (auto& c : cuts) c = r.uniform(-L, L);
        std::sort(cuts.begin(), cuts.end());
        std::vector<double> h(n);
        for (auto& v : h) v = r.uniform(-1.5, 1.5);
        out.push_back([cuts, h](double x) {
          for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            if (x >= cuts[k] && x < cuts[k + 1]) return cplx(h[k], 0.0);
          return cplx(0.0, 0.0);
        });
        break;
      }
      case SignalKind::RandomTrig: {
        std::vector<Bump> ts;
        for (int k = 0; k < 4; ++k) ts.push_back({0.0, r.uniform(0.0, 4.0), 0.5 * r.normal(), 0.0, r.uniform(0.0, 2.0 * kPi)});
        out.push_back([ts, L](double x) {
          if (std::abs(x) >= L) return cplx(0.0, 0.0);
          const double win = std::pow(std::cos(0.5 * kPi * x / L), 2);
          double s = 0.0;
          for (const auto& t : ts) s += t.a * std::cos(t.w * x + t.ph);
          return cplx(s * win, 0.0);
        });
        break;
      }
    }
  }
  return out;
}

std::vector<double> random_field(const OuterSpace& space, Rng& rng) {
  const std::size_t nc = space.cells.size();
  std::vector<double> f(nc, 0.0);
  if (nc == 0) return f;
  const int ng = static_cast<int>(space.gensets.size());
  const int m = ng > 0 ? 1 + static_cast<int>(rng.below(4)) : 0;
  for (int k = 0; k < m; ++k) {
    const auto& G = space.gensets[rng.below(ng)];
    const double level = std::exp2(rng.uniform(-2.0, 2.0));
    for (int c : G.members) f[c] = std::max(f[c], level * rng.uniform(0.5, 1.0));
  }
  for (std::size_t c = 0; c < nc; ++c)
    if (rng.uniform() < 0.2) f[c] = std::max(f[c], rng.uniform(0.0, 0.5));
  return f;
}

// -------------------------------------------------------------- report ----

void SuiteReport::add(TrialRow r) {
  if (!r.pass && pass) {
    pass = false;
    char buf[256];
    std::snprintf(buf, sizeof buf, "trial %d (%s): measured %.6g, bound %.6g, ratio %.6g", r.trial, r.label.c_str(),
                  r.measured, r.bound, r.ratio);
    diagnostic = buf;
  }
  rows.push_back(std::move(r));
}

void SuiteReport::fail(const std::string& why) {
  if (pass) diagnostic = why;
  pass = false;
}

namespace {

std::string field_hash(const std::vector<double>& v, std::uint64_t salt = 0) {
  std::uint64_t h = 1469598103934665603ULL ^ salt;
  return hex64(hash_doubles(v, h));
}

std::string signal_hash(const LineSignal& f) {
  std::vector<double> v{f.x0, f.dx};
  for (const auto& z : f.v) {
    v.push_back(z.real());
    v.push_back(z.imag());
  }
  return field_hash(v);
}

double ratio_of(double a, double b) { return b > 0.0 ? a / b : (a > 0.0 ? kInf : 0.0); }

bool leq(double a, double b, double rel = 1e-12) { return a <= b * (1.0 + rel) + 1e-300; }

SuperLevelCurve curve_of(const OuterSpace& X, const SizeSpec& S, const std::vector<double>& absf,
                         const LambdaGrid& lg, SolveMode mode) {
  return super_level_curve(X, S, absf, lg, mode);
}

double norm_of(const SuperLevelCurve& c, double p) { return curve_lp(c, p).value; }

bool same_collection(const OuterSpace& a, const OuterSpace& b, bool sigma_too) {
  if (a.cells.size() != b.cells.size() || a.gensets.size() != b.gensets.size()) return false;
  for (std::size_t c = 0; c < a.cells.size(); ++c)
    if (a.cells[c].weight != b.cells[c].weight) return false;
  for (std::size_t g = 0; g < a.gensets.size(); ++g) {
    if (a.gensets[g].members != b.gensets[g].members) return false;
    if (sigma_too && a.gensets[g].sigma != b.gensets[g].sigma) return false;
  }
  return true;
}

}  // namespace

// -------------------------------------------------------------- Holder ----

SuiteReport verify_holder(const OuterSpace& X, const OuterSpace& X1, const OuterSpace& X2, const SizeSpec& S,
                          const SizeSpec& S1, const SizeSpec& S2, const HolderOptions& opt) {
  SuiteReport rep;
  rep.suite = "holder";
  const double p = opt.p, p1 = opt.p1, p2 = opt.p2;
  if (!(p > 0.0 && p1 > 0.0 && p2 > 0.0)) throw InputError("Holder exponents must be positive");
  const double inv = 1.0 / p1 + (p2 == kInf ? 0.0 : 1.0 / p2);
  if (std::abs(inv - 1.0 / p) > 1e-12) throw InputError("Holder exponents need 1/p = 1/p1 + 1/p2");
  if (!same_collection(X, X1, false) || !same_collection(X, X2, false))
    throw InputError("Holder check needs the three spaces on one collection of generating sets");
  // mu <= mu_j follows from sigma <= sigma_j on every generating set
  for (std::size_t g = 0; g < X.gensets.size(); ++g) {
    const double s = X.gensets[g].sigma;
    if (!leq(s, X1.gensets[g].sigma) || !leq(s, X2.gensets[g].sigma)) {
      rep.fail("premise mu <= mu_j fails on generating set " + std::to_string(g));
      return rep;
    }
  }
  const int n = opt.trials;
  struct Slot {
    TrialRow row;
    std::string premise;
  };
  std::vector<Slot> slots(n);
  const Rng base(opt.seed);
  parallel_for(n, [&](std::size_t t) {
    Rng rng = base.split(t);
    auto f1 = random_field(X, rng);
    auto f2 = random_field(X, rng);
    if (p2 == kInf && t % 5 == 4) std::fill(f2.begin(), f2.end(), 1.0);  // bounded factor branch
    std::vector<double> f12(f1.size());
    for (std::size_t c = 0; c < f1.size(); ++c) f12[c] = f1[c] * f2[c];
    Slot& s = slots[t];
    for (std::size_t g = 0; g < X.gensets.size(); ++g) {
      const int gi = static_cast<int>(g);
      const double lhs = size_value(X, S, gi, f12);
      const double rhs = size_value(X1, S1, gi, f1) * size_value(X2, S2, gi, f2);
      if (!leq(lhs, rhs, 1e-10)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "size factorization fails on trial %d, generating set %d: %.6g > %.6g",
                      static_cast<int>(t), gi, lhs, rhs);
        s.premise = buf;
        return;
      }
    }
    const double L = norm_of(curve_of(X, S, f12, opt.lambda, opt.mode), p);
    const double R1 = norm_of(curve_of(X1, S1, f1, opt.lambda, opt.mode), p1);
    const double R2 = p2 == kInf ? outer_essential_sup_abs(X2, S2, f2)
                                 : norm_of(curve_of(X2, S2, f2, opt.lambda, opt.mode), p2);
    std::vector<double> key = f1;
    key.insert(key.end(), f2.begin(), f2.end());
    TrialRow& r = s.row;
    r.trial = static_cast<int>(t);
    char lab[96];
    std::snprintf(lab, sizeof lab, "p=%g p1=%g p2=%g %s", p, p1, p2, opt.mode == SolveMode::Exact ? "exact" : "greedy");
    r.label = lab;
    r.hash = field_hash(key);
    r.measured = L;
    r.bound = 2.0 * R1 * R2;
    r.ratio = ratio_of(L, R1 * R2);
    r.pass = leq(L, r.bound);
    r.provenance = "stated-constant";
  });
  double mx = 0.0;
  for (auto& s : slots) {
    if (!s.premise.empty()) {
      rep.fail(s.premise);
      continue;
    }
    mx = std::max(mx, s.row.ratio);
    rep.add(std::move(s.row));
  }
  rep.summary["max_ratio"] = mx;
  rep.summary["bound"] = 2.0;
  return rep;
}

SuiteReport verify_holder(const OuterSpace& space, const SizeSpec& S, const SizeSpec& S1, const SizeSpec& S2,
                          const HolderOptions& opt) {
  return verify_holder(space, space, space, S, S1, S2, opt);
}

// ------------------------------------------------------ log convexity ----

double log_convexity_constant(double p, double p1, double p2) {
  if (!(p1 > 0.0) || !(p1 < p) || !(p < p2)) throw InputError("log convexity needs 0 < p1 < p < p2");
  if (p2 == kInf) return std::pow(p / (p - p1), 1.0 / p);
  return std::pow(p * (1.0 / (p - p1) + 1.0 / (p2 - p)), 1.0 / p);
}

namespace {

double log_convexity_alpha1(double p, double p1, double p2) {
  const double i2 = p2 == kInf ? 0.0 : 1.0 / p2;
  return (1.0 / p - i2) / (1.0 / p1 - i2);
}

double weak_of(const SuperLevelCurve& c, double p) { return curve_weak_lp(c, p).value; }

}  // namespace

double log_convexity_step_ratio(double h, double m, double p, double p1, double p2) {
  // mu = m on (0, h): ||f||_q = ||f||_{q,inf} = h m^{1/q} for every finite q, and h for q = inf
  const double a1 = log_convexity_alpha1(p, p1, p2), a2 = 1.0 - a1;
  auto nq = [&](double q) { return q == kInf ? h : h * std::pow(m, 1.0 / q); };
  return nq(p) / (std::pow(nq(p1), a1) * std::pow(nq(p2), a2));
}

SuiteReport verify_log_convexity(const OuterSpace& space, const SizeSpec& S, const LogConvexityOptions& opt) {
  SuiteReport rep;
  rep.suite = "log-convexity";
  if (opt.p1 == opt.p2) throw InputError("log convexity needs p1 != p2");
  const double C = log_convexity_constant(opt.p, opt.p1, opt.p2);
  const double a1 = log_convexity_alpha1(opt.p, opt.p1, opt.p2), a2 = 1.0 - a1;
  if (!(a1 > 0.0 && a1 < 1.0)) throw InputError("log convexity needs 0 < alpha_i < 1");
  const int n = opt.trials;
  std::vector<TrialRow> rows(n);
  const Rng base(opt.seed);
  parallel_for(n, [&](std::size_t t) {
    Rng rng = base.split(t);
    const auto f = random_field(space, rng);
    const auto c = curve_of(space, S, f, opt.lambda, opt.mode);
    const double L = norm_of(c, opt.p);
    const double A1 = weak_of(c, opt.p1), A2 = weak_of(c, opt.p2);
    TrialRow& r = rows[t];
    r.trial = static_cast<int>(t);
    char lab[96];
    std::snprintf(lab, sizeof lab, "p=%g p1=%g p2=%g", opt.p, opt.p1, opt.p2);
    r.label = lab;
    r.hash = field_hash(f);
    r.measured = L;
    const double G = (A1 > 0.0 && A2 > 0.0) ? std::pow(A1, a1) * std::pow(A2, a2) : 0.0;
    r.bound = C * G;
    r.ratio = ratio_of(L, G);
    r.pass = leq(L, r.bound);
    r.provenance = "proof-constant";
  });
  double mx = 0.0;
  for (auto& r : rows) {
    mx = std::max(mx, r.ratio);
    rep.add(std::move(r));
  }
  rep.summary["constant"] = C;
  rep.summary["alpha1"] = a1;
  rep.summary["max_ratio"] = mx;
  return rep;
}

// ------------------------------------------------------------- pullback ----

PullbackPremise pullback_premise(const OuterSpace& X1, const SizeSpec& S1, const OuterSpace& X2, const SizeSpec& S2,
                                 const std::vector<int>& phi, SolveMode mode) {
  PullbackPremise pr;
  if (phi.size() != X1.cells.size()) throw InputError("pullback map must give an image for every cell of X1");
  for (int c : phi)
    if (c < 0 || c >= static_cast<int>(X2.cells.size())) throw InputError("pullback map leaves the carrier of X2");
  const bool sup = S1.kind == SizeKind::AvgLinf && S2.kind == SizeKind::AvgLinf;
  const bool avg = (S1.kind == SizeKind::AvgL1 || S1.kind == SizeKind::AvgL2 || S1.kind == SizeKind::AvgLp) &&
                   S1.kind == S2.kind && S1.exponent == S2.exponent;
  if (!sup && !avg) throw InputError("pullback premise needs matching AvgLp or sup sizes");
  const double q = S1.exponent;

  // A: mu1(Phi^{-1} E2) <= A mu2(E2)
  std::vector<std::vector<int>> pre(X2.cells.size());
  for (std::size_t c = 0; c < phi.size(); ++c) pre[phi[c]].push_back(static_cast<int>(c));
  for (std::size_t g = 0; g < X2.gensets.size(); ++g) {
    std::vector<int> target;
    for (int c2 : X2.gensets[g].members) target.insert(target.end(), pre[c2].begin(), pre[c2].end());
    std::sort(target.begin(), target.end());
    const double m2 = outer_measure(X2, X2.gensets[g].members, mode).value;
    if (target.empty()) continue;
    const double m1 = outer_measure(X1, target, mode).value;
    if (m1 == kInf) {
      pr.ok = false;
      pr.diagnostic = "preimage of generating set " + std::to_string(g) + " of X2 cannot be covered in X1";
      return pr;
    }
    pr.A = std::max(pr.A, ratio_of(m1, m2));
  }

  // B: for each E1 the best E2 containing Phi(E1)
  const auto& cg2 = X2.index().cell_gensets;
  std::vector<double> mult(X2.cells.size(), 0.0);
  for (std::size_t g = 0; g < X1.gensets.size(); ++g) {
    const auto& E1 = X1.gensets[g];
    std::vector<int> img;
    for (int c1 : E1.members) img.push_back(phi[c1]);
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    if (img.empty()) continue;
    double mw = 0.0;
    if (avg) {
      for (int c2 : img) mult[c2] = 0.0;
      for (int c1 : E1.members) mult[phi[c1]] += X1.cells[c1].weight;
      for (int c2 : img) mw = std::max(mw, mult[c2] / X2.cells[c2].weight);
    }
    double best = kInf;
    for (int G : cg2[img.front()]) {
      const auto& mem = X2.gensets[G].members;
      if (!std::includes(mem.begin(), mem.end(), img.begin(), img.end())) continue;
      const double b = sup ? 1.0 : std::pow(X2.gensets[G].sigma / E1.sigma * mw, 1.0 / q);
      best = std::min(best, b);
    }
    if (best == kInf) {
      pr.ok = false;
      pr.diagnostic = "no generating set of X2 contains the image of generating set " + std::to_string(g) + " of X1";
      return pr;
    }
    pr.B = std::max(pr.B, best);
  }
  return pr;
}

SuiteReport verify_pullback(const OuterSpace& X1, const SizeSpec& S1, const OuterSpace& X2, const SizeSpec& S2,
                            const std::vector<int>& phi, const PullbackOptions& opt) {
  SuiteReport rep;
  rep.suite = "pullback";
  const auto pr = pullback_premise(X1, S1, X2, S2, phi, opt.mode);
  rep.summary["A"] = pr.A;
  rep.summary["B"] = pr.B;
  if (!pr.ok) {
    rep.fail("premise: " + pr.diagnostic);
    return rep;
  }
  const double p = opt.p;
  const int n = opt.fields.empty() ? opt.trials : static_cast<int>(opt.fields.size());
  std::vector<TrialRow> rows(n);
  const Rng base(opt.seed);
  const double scale = std::pow(pr.A, 1.0 / p) * pr.B;
  parallel_for(n, [&](std::size_t t) {
    Rng rng = base.split(t);
    const auto f = opt.fields.empty() ? random_field(X2, rng) : opt.fields[t];
    if (f.size() != X2.cells.size()) throw InputError("pullback field does not match X2");
    std::vector<double> g(X1.cells.size());
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = f[phi[c]];
    const double l = norm_of(curve_of(X1, S1, g, opt.lambda, opt.mode), p);
    const double r2 = norm_of(curve_of(X2, S2, f, opt.lambda, opt.mode), p);
    TrialRow& r = rows[t];
    r.trial = static_cast<int>(t);
    r.label = "p=" + std::to_string(p);
    r.hash = field_hash(f);
    r.measured = l;
    r.bound = scale * r2;
    r.ratio = ratio_of(l, r.bound);
    r.pass = std::isfinite(r.ratio);
    r.provenance = "measured";
  });
  double C = 0.0;
  for (auto& r : rows) {
    C = std::max(C, r.ratio);
    rep.add(std::move(r));
  }
  rep.summary["C"] = C;
  return rep;
}

// ------------------------------------------------------- Marcinkiewicz ----

double marcinkiewicz_constant(double p, double p1, double p2, double K) {
  if (!(p1 > 0.0) || !(p1 < p) || !(p < p2)) throw InputError("interpolation needs 0 < p1 < p < p2");
  if (p2 == kInf) return 2.0 * K * std::pow(p / (p - p1), 1.0 / p);
  return 2.0 * K * std::pow(p / (p - p1) + p / (p2 - p), 1.0 / p);
}

namespace {

LineSignal truncate(const LineSignal& f, double c, bool above) {
  LineSignal g = f;
  for (auto& z : g.v)
    if ((std::abs(z) > c) != above) z = 0.0;
  return g;
}

std::vector<int> union_ids(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

SuiteReport verify_marcinkiewicz(const OuterSpace& space, const SizeSpec& S, const LinearEmbedding& T,
                                 const MarcinkiewiczOptions& opt) {
  SuiteReport rep;
  rep.suite = "marcinkiewicz";
  const double p = opt.p, p1 = opt.p1, p2 = opt.p2, K = S.quasi_const;
  const double C = marcinkiewicz_constant(p, p1, p2, K);
  const double th1 = p2 == kInf ? p1 / p : p1 * (p2 - p) / (p * (p2 - p1)), th2 = 1.0 - th1;
  const int ns = static_cast<int>(opt.signals.size());
  if (ns == 0) throw InputError("interpolation check needs signals");

  // endpoint constants over the signals and their truncation pieces
  struct Piece {
    double w1 = 0.0, w2 = 0.0;  // weak-p1 and p2 ratios
  };
  const int per = 1 + 2 * opt.truncations;
  std::vector<Piece> pieces(static_cast<std::size_t>(ns) * per);
  std::vector<SuperLevelCurve> curves(ns);
  auto endpoint = [&](const LineSignal& f, Piece& pc, SuperLevelCurve* keep) {
    const double n1 = f.norm(p1), n2 = f.norm(p2);
    if (!(n1 > 0.0)) return;
    const auto F = T(f).abs();
    const auto c = curve_of(space, S, F, opt.lambda, opt.mode);
    pc.w1 = weak_of(c, p1) / n1;
    pc.w2 = (p2 == kInf ? c.lambda_max : weak_of(c, p2)) / n2;
    if (keep) *keep = c;
  };
  parallel_for(pieces.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k / per), j = static_cast<int>(k % per);
    const LineSignal& f = opt.signals[i];
    if (j == 0) {
      endpoint(f, pieces[k], &curves[i]);
      return;
    }
    const double c = f.norm(kInf) * std::exp2(-0.5 * ((j + 1) / 2));
    endpoint(truncate(f, c, j % 2 == 1), pieces[k], nullptr);
  });
  double A1 = 0.0, A2 = 0.0;
  for (const auto& pc : pieces) {
    A1 = std::max(A1, pc.w1);
    A2 = std::max(A2, pc.w2);
  }
  rep.summary["A1"] = A1;
  rep.summary["A2"] = A2;
  rep.summary["constant"] = C;
  rep.summary["theta1"] = th1;
  const double bound = std::pow(A1, th1) * std::pow(A2, th2) * C;

  // normalization: A1 lam^{1/p1} = A2 lam^{1/p2} = A and A1^th1 A2^th2 lam^{1/p} = A
  {
    const double i2 = p2 == kInf ? 0.0 : 1.0 / p2;
    const double lam = std::pow(A2 / A1, 1.0 / (1.0 / p1 - i2));
    const double A = A1 * std::pow(lam, 1.0 / p1);
    const double B = std::pow(A1, th1) * std::pow(A2, th2) * std::pow(lam, 1.0 / p);
    TrialRow r;
    r.trial = -1;
    r.label = "normalization";
    r.measured = B;
    r.bound = A;
    r.ratio = ratio_of(B, A);
    r.pass = std::abs(B - A) <= 1e-10 * A;
    r.provenance = "exact";
    rep.add(r);
  }

  double mx = 0.0;
  for (int i = 0; i < ns; ++i) {
    const LineSignal& f = opt.signals[i];
    TrialRow r;
    r.trial = i;
    r.label = "strong p=" + std::to_string(p);
    r.hash = signal_hash(f);
    r.measured = ratio_of(norm_of(curves[i], p), f.norm(p));
    r.bound = bound;
    r.ratio = ratio_of(r.measured, bound);
    r.pass = leq(r.measured, bound);
    r.provenance = "proof-constant";
    mx = std::max(mx, r.ratio);
    rep.add(r);
  }
  rep.summary["max_ratio"] = mx;

  // the splitting, level by level: the union of the two witnesses clears 2K lam
  const double gamma_p2 = p2 == kInf ? 1.0 / A2 : std::pow(std::pow(A2, p2) / std::pow(A1, p1), 1.0 / (p2 - p1));
  const int nc = std::min(opt.cross_checks, ns);
  std::vector<std::vector<TrialRow>> cross(nc);
  parallel_for(nc, [&](std::size_t i) {
    const LineSignal& f = opt.signals[i];
    const auto F = T(f).abs();
    const auto& cv = curves[i];
    const int N = static_cast<int>(cv.lambdas.size()) - 1;
    for (int k = 0; k <= N; k += std::max(1, opt.lambda.per_binade)) {
      const double lam = cv.lambdas[k] / (2.0 * K);
      if (!(lam > 0.0)) continue;
      const double cut = gamma_p2 * lam;
      const auto G = T(truncate(f, cut, true)).abs();
      const auto Bf = T(truncate(f, cut, false)).abs();
      const auto rg = super_level_measure_abs(space, S, G, lam, opt.mode);
      const auto rb = super_level_measure_abs(space, S, Bf, lam, opt.mode);
      const auto U = union_ids(rg.witness.ids, rb.witness.ids);
      const bool ok = cover_is_feasible(space, S, F, U, 2.0 * K * lam);
      TrialRow r;
      r.trial = static_cast<int>(i);
      char lab[96];
      std::snprintf(lab, sizeof lab, "split level %d", k);
      r.label = lab;
      r.hash = signal_hash(f);
      r.measured = cv.mu[k];
      r.bound = rg.value + rb.value;
      r.ratio = ratio_of(r.measured, r.bound);
      r.pass = ok;
      r.provenance = "exact";
      cross[i].push_back(r);
    }
  });
  for (auto& v : cross)
    for (auto& r : v) rep.add(std::move(r));
  return rep;
}

// ----------------------------------------------------------- domination ----

double domination_premise(const OuterSpace& space, const SizeSpec& S, const std::vector<double>& nu, int* worst) {
  if (nu.size() != space.cells.size()) throw InputError("nu needs one weight per cell");
  for (double v : nu)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("nu must be finite and nonnegative");
  double C = 0.0;
  int arg = -1;
  for (std::size_t g = 0; g < space.gensets.size(); ++g) {
    const auto& E = space.gensets[g];
    double c = 0.0;
    switch (S.kind) {
      case SizeKind::AvgL1:
        for (int m : E.members) c = std::max(c, ratio_of(nu[m], space.cells[m].weight));
        break;
      case SizeKind::AvgL2:
      case SizeKind::AvgLp: {
        const double q = S.exponent, qq = q / (q - 1.0);
        if (!(q > 1.0)) throw InputError("AvgLp premise needs p > 1");
        double s = 0.0;
        for (int m : E.members) {
          const double w = space.cells[m].weight;
          if (nu[m] > 0.0) s += w * std::pow(ratio_of(nu[m], w), qq);
        }
        c = std::pow(ratio_of(s, E.sigma), 1.0 / qq);
        break;
      }
      case SizeKind::AvgLinf: {
        double s = 0.0;
        for (int m : E.members) s += nu[m];
        c = ratio_of(s, E.sigma);
        break;
      }
      default: throw InputError("domination premise has a closed form only for AvgLp and sup sizes");
    }
    if (c > C) {
      C = c;
      arg = static_cast<int>(g);
    }
  }
  if (worst) *worst = arg;
  return C;
}

SuiteReport verify_domination(const OuterSpace& space, const SizeSpec& S, const std::vector<double>& nu,
                              const DominationOptions& opt) {
  SuiteReport rep;
  rep.suite = "domination";
  int worst = -1;
  const double C = domination_premise(space, S, nu, &worst);
  rep.summary["premise_C"] = C;
  rep.summary["premise_worst_genset"] = worst;
  if (!std::isfinite(C)) {
    rep.fail("premise: nu charges a zero-weight cell in generating set " + std::to_string(worst));
    return rep;
  }
  // nu outside every generating set cannot be controlled by sizes
  std::vector<char> covered(space.cells.size(), 0);
  for (const auto& E : space.gensets)
    for (int m : E.members) covered[m] = 1;
  for (std::size_t c = 0; c < nu.size(); ++c)
    if (nu[c] > 0.0 && !covered[c]) {
      rep.fail("premise: nu charges cell " + std::to_string(c) + " outside every generating set");
      return rep;
    }
  const int n = opt.trials;
  std::vector<TrialRow> rows(n);
  const Rng base(opt.seed);
  parallel_for(n, [&](std::size_t t) {
    Rng rng = base.split(t);
    auto f = random_field(space, rng);
    double integral = 0.0;
    std::vector<double> signs(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) {
      signs[c] = rng.uniform() < 0.25 ? -1.0 : 1.0;
      integral += signs[c] * f[c] * nu[c];
    }
    const double L1 = norm_of(curve_of(space, S, f, opt.lambda, opt.mode), 1.0);
    TrialRow& r = rows[t];
    r.trial = static_cast<int>(t);
    r.label = "signed field";
    std::vector<double> key = f;
    key.insert(key.end(), signs.begin(), signs.end());
    r.hash = field_hash(key);
    r.measured = std::abs(integral);
    r.bound = 4.0 * C * L1;
    r.ratio = ratio_of(std::abs(integral), C * L1);
    r.pass = leq(r.measured, r.bound);
    r.provenance = "proof-constant";
  });
  double mx = 0.0;
  for (auto& r : rows) {
    mx = std::max(mx, r.ratio);
    rep.add(std::move(r));
  }
  rep.summary["max_ratio"] = mx;
  return rep;
}

}  // namespace olp
