#pragma once

// Dyadic cubes over {0..2^K-1}^m.  Unit cells are the level-0 cubes, cell
// weight 1, and a level-k cube has sigma 2^{mk}.

#include <vector>

#include "olp/outer.hpp"

namespace olp {

struct DyadicGrid {
  int dim = 1;
  int levels = 0;  // K
  long side() const { return 1L << levels; }
  long num_cells() const;
};

// Genset order: level 0 first, then level 1, ...; inside a level, cubes in
// row-major order of their lower corner / 2^k.  Cells are row-major.
OuterSpace build_dyadic_space(int m, int K, long max_gensets = 1L << 20);

// Genset id of the level-k cube whose lower corner index (in units of 2^k) is `corner`.
int dyadic_cube_id(const DyadicGrid& g, int k, const std::vector<long>& corner);

// (sum |f|^p w)^{1/p}, p = inf gives max |f|.
double classical_lp(const std::vector<double>& absf, const std::vector<double>& weights, double p);
double classical_lp(const OuterSpace& space, const Field& f, double p);

struct MeasurabilityReport {
  double mu_E = 0.0, mu_in = 0.0, mu_out = 0.0;
  double deficit = 0.0;  // mu_in + mu_out - mu_E
};

// Caratheodory split of E by a cell set F, all three measures by the exact solver.
MeasurabilityReport caratheodory_split(const OuterSpace& space, const std::vector<int>& E,
                                       const std::vector<int>& F);

}  // namespace olp
