#pragma once

// Upper 3-space grids, generalized tents T_{alpha,beta}(x,xi,s), auxiliary
// tents T^b, the discrete lattice X_Delta and the size S^b.

#include <vector>

#include "olp/outer.hpp"

namespace olp {

// y_j = -Y + (j+1/2) dy; eta_l = eta0 - H + (l+1/2) deta; t_q = 2^{kmin+q}.
// The level-q cell spans [t/sqrt2, t sqrt2] so dt = t/sqrt2.
struct Upper3Grid {
  double Y = 8.0, dy = 0.125;
  double eta0 = 0.0, H = 4.0, deta = 0.0625;
  int kmin = -3, kmax = 4;

  int ny() const;
  int neta() const;
  int nt() const { return kmax - kmin + 1; }
  long num_cells() const { return static_cast<long>(ny()) * neta() * nt(); }
  double y(int j) const { return -Y + (j + 0.5) * dy; }
  double eta(int l) const { return eta0 - H + (l + 0.5) * deta; }
  double t(int q) const;
  double dt(int q) const;
  double weight(int q) const { return dy * deta * dt(q); }
  long index(int j, int l, int q) const { return (static_cast<long>(q) * neta() + l) * ny() + j; }
  void validate() const;
};

struct GenTentParams {
  double alpha = 1.0;
  double beta = 0.0;
  double b = 1.0 / 256;
  void validate() const;
};

struct GenTent {
  double x = 0.0, xi = 0.0, s = 1.0;
};

bool in_gentent(const GenTentParams& p, const GenTent& T, double y, double eta, double t);
bool in_btent(double b, const GenTent& T, double y, double eta, double t);

// One grid level of a tent: cells j0..j1 (y) times l0..l1 (eta); empty when j0 > j1 or l0 > l1.
struct LevelRect {
  int q = 0, j0 = 0, j1 = -1, l0 = 0, l1 = -1;
  bool empty() const { return j0 > j1 || l0 > l1; }
};

// Per-level index ranges (lo > hi when empty); level q must satisfy t_q <= s.
void gentent_y_range(const Upper3Grid& g, const GenTent& T, int q, int& j0, int& j1);
void gentent_eta_range(const Upper3Grid& g, const GenTentParams& p, const GenTent& T, int q, int& l0, int& l1);
void btent_eta_range(const Upper3Grid& g, double b, const GenTent& T, int q, int& l0, int& l1);
// First eta index with eta_l >= xi (neta() when none).
int eta_split(const Upper3Grid& g, double xi);

std::vector<LevelRect> gentent_rects(const Upper3Grid& g, const GenTentParams& p, const GenTent& T);
std::vector<LevelRect> btent_rects(const Upper3Grid& g, double b, const GenTent& T);
std::vector<int> rect_cells(const Upper3Grid& g, const std::vector<LevelRect>& rects);
// True when the continuum tent reaches outside the grid's y or eta box on some grid level.
bool gentent_clipped(const Upper3Grid& g, const GenTentParams& p, const GenTent& T);

// (x, xi, s) = (cx 2^k n, cxi 2^{-k} b l, 2^k).
struct LatticePoint {
  int k = 0;
  long n = 0, l = 0;
  GenTent tent;
  bool clipped = false;
};

struct TentLattice {
  GenTentParams params;
  double cx = 1.0 / 16;
  double cxi = 1.0 / 256;
  int kmin = -3, kmax = 6;  // s levels

  double x_step(int k) const;
  double xi_step(int k) const;
  GenTent point(int k, long n, long l) const;
  // Every lattice tent with at least one grid cell.
  std::vector<LatticePoint> enumerate(const Upper3Grid& g) const;
};

struct GenTentSpace {
  Upper3Grid grid;
  GenTentParams params;
  std::vector<GenTent> tents;  // tents[g] generates genset g
  std::vector<char> clipped;
  OuterSpace space;
  std::vector<std::vector<int>> l2_regions;  // cells of T \ T^b per genset
};

// Tents without grid cells are dropped.
GenTentSpace build_gentent_space(const Upper3Grid& g, const GenTentParams& p, const std::vector<GenTent>& tips);
GenTentSpace build_gentent_space(const Upper3Grid& g, const TentLattice& lat);

// S^b(F 1_{removed^c})(T) evaluated on the grid directly.
double sb_value(const Upper3Grid& g, const GenTentParams& p, const GenTent& T, const std::vector<double>& absF,
                const std::vector<char>& removed = {});

// S^b over the space's tents: L2 part on T \ T^b (normalized by s), plus the sup over T.
SizeSpec size_Sb(const GenTentSpace& gs);

struct CentralContainment {
  int k = 0;
  long n = 0, l_minus = 0, l_plus = 0;
  double x = 0.0, xi_minus = 0.0, xi_plus = 0.0, s = 0.0;
};

// Lattice tents containing (x', xi', s') centrally from both sides in xi.
CentralContainment central_containment(double xp, double xip, double sp, const TentLattice& lat);

struct ContainmentCheck {
  bool scale_ok = true, x_ok = true, xi_ok = true, cover_ok = true, btent_ok = true;
  long points = 0;
  bool all() const { return scale_ok && x_ok && xi_ok && cover_ok && btent_ok; }
};

// Checks the five postconditions, the set inclusions on `points` sample points of T(x',xi',s').
ContainmentCheck check_central_containment(double xp, double xip, double sp, const TentLattice& lat, int points,
                                           Rng& rng);

struct EquivalenceReport {
  int samples = 0;
  double min_ratio = kInf, max_ratio = 0.0;  // lattice cost / continuum cost
  int exact_samples = 0;                     // both measures certified exact
  bool lower_ok = true;                      // mu <= mu_Delta on every exact sample
};

// Cell sets are unions of 1..3 randomly chosen continuum tents; the continuum
// collection contains the lattice one, so mu <= mu_Delta is checked as well.
EquivalenceReport measure_equivalence_check(const GenTentSpace& continuum, const GenTentSpace& lattice,
                                            int samples, std::uint64_t seed, SolveMode mode = SolveMode::Greedy);

}  // namespace olp
