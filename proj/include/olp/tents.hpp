#pragma once

// Upper half-plane grids, tents T(x,s) = {t < s, |x-y| < s-t} and tilted tents.

#include <vector>

#include "olp/outer.hpp"

namespace olp {

// y_j = -Y + (j + 1/2) dy, j = 0..ny-1; t_k = t_max 2^{-k/L}, k = 0..levels-1.
// The level-k cell spans [t_k 2^{-1/2L}, t_k 2^{1/2L}], whose dt/t mass is ln2/L.
struct UpperHalfPlaneGrid {
  double Y = 4.0;
  double dy = 0.125;
  int levels = 6;
  double t_max = 1.0;
  int per_octave = 1;

  int ny() const;
  int num_cells() const { return ny() * levels; }
  double y(int j) const { return -Y + (j + 0.5) * dy; }
  double t(int k) const;
  double weight() const;
  int index(int j, int k) const { return k * ny() + j; }
  void validate() const;
};

struct Tent {
  double x = 0.0, s = 1.0;
  bool contains(double y, double t) const { return t < s && std::abs(x - y) < s - t; }
};

// (z,u) is in T_{alpha,beta}(x,s) iff (z - alpha u/beta, u/beta) is in T(x,s).
struct TiltedTent {
  double x = 0.0, s = 1.0, alpha = 0.0, beta = 1.0;
  bool contains(double z, double u) const { return Tent{x, s}.contains(z - alpha * u / beta, u / beta); }
  double tip_x() const { return x + alpha * s; }
  double tip_t() const { return beta * s; }
};

struct TentSpace {
  UpperHalfPlaneGrid grid;
  OuterSpace space;
  std::vector<TiltedTent> tents;  // tents[g] generates genset g (alpha = 0, beta = 1 when untilted)
};

// Tips x = y_j for every column, s = 2 t_k for every level, so each cell lies in
// the tent directly above it.
std::vector<Tent> default_tip_lattice(const UpperHalfPlaneGrid& grid);
// Same scales with x every floor(s / (per_s dy)) columns; the cell at level k
// stays inside a tent of scale 2 t_k as long as per_s >= 2.
std::vector<Tent> sparse_tip_lattice(const UpperHalfPlaneGrid& grid, double per_s = 4.0);

// Tents with no grid cell are skipped; sigma = s.
TentSpace build_tent_space(const UpperHalfPlaneGrid& grid, const std::vector<Tent>& tips);
TentSpace build_tilted_tent_space(const UpperHalfPlaneGrid& grid, const std::vector<Tent>& tips, double alpha,
                                  double beta);

std::vector<int> tent_cells(const UpperHalfPlaneGrid& grid, const TiltedTent& T);

// S_p with dy dt/t weights normalized by s; p = inf is the sup.
SizeSpec size_Sp(double p);

struct NonMeasurabilityWitness {
  bool found = false;
  int tent = -1;
  std::vector<int> E;  // cells of the splitting set inside the tent
  double mu_T = 0.0, mu_in = 0.0, mu_out = 0.0;
  double deficit = 0.0;
};

// Splits tents T(x,s) by E = {t > s/2}, tallest first, until the split is not additive.
NonMeasurabilityWitness non_measurability_witness(const TentSpace& ts);
// Same with a caller-supplied E (cell ids; only its part inside the tent matters).
NonMeasurabilityWitness non_measurability_witness(const TentSpace& ts, int tent, const std::vector<int>& E);

// Lebesgue length of the union of shadows (x - s, x + s) of the given tents.
double shadow_length(const TentSpace& ts, const std::vector<int>& tent_ids);

}  // namespace olp
