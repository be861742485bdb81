#pragma once

// Greedy tent selection for the weak-L^2 time-frequency embedding bound.
//
// Stage 1 covers every cell with |F| > (1 - 2^{-7/2}) lambda by a lattice tent
// containing it centrally, tallest cells first.  Stage 2 then picks bad lattice
// tents on the upper half X_xi^+ (largest xi first, then largest s) and then on
// the lower half X_xi^- (smallest xi first).  A tent is bad when
//   s^{-1} sum_{(T cap X_xi^+-) \ (T^b cup E)} |F|^2 w >= 2^{-8} lambda^2.
// With both halves below 2^{-8} lambda^2 and the remaining sup at most the
// stage-1 level, S^b(F 1_{E^c}) <= lambda on every lattice tent.

#include <vector>

#include "olp/gentents.hpp"

namespace olp {

// Lattice tents grouped by the grid cells they contain.  Cells of T(x,xi,s)
// factor into a y part (depends on x only) and an eta part (xi only), so
// classes are products of x-classes and xi-classes per scale.
struct LatticeClasses {
  struct XClass {
    long n_first = 0, n_last = 0;
    long clipped = 0;  // members reaching outside the y extent
    std::vector<int> j0, j1;
  };
  struct XiClass {
    long l_first = 0, l_last = 0;
    long clipped = 0;  // members reaching outside the eta extent
    std::vector<int> l0, l1, m0, m1;  // T band and T^b band per level
    int split = 0;                    // first eta index in X_xi^+
  };
  struct Scale {
    int k = 0;
    double s = 0.0;
    int nq = 0;  // grid levels with t <= s
    std::vector<XClass> xs;
    std::vector<XiClass> xis;
  };

  Upper3Grid grid;
  TentLattice lattice;
  std::vector<Scale> scales;

  long lattice_tents() const;
};

LatticeClasses build_lattice_classes(const Upper3Grid& g, const TentLattice& lat);

struct SelectionOptions {
  double stage1_fraction = 0.9116116523516816;  // 1 - 2^{-7/2}
  double bad_fraction = 1.0 / 256;              // of lambda^2
};

struct SelectedTent {
  int stage = 0;  // 0, +1 or -1
  int k = 0;
  long n = 0, l = 0;
  GenTent tent;
  bool clipped = false;
  long reduced_cells = 0;  // |T*| for stage-2 tents
};

struct SelectionCertificate {
  long classes = 0;
  long tents = 0;
  long clipped_tents = 0;
  double max_size = 0.0;  // max over lattice tents of S^b(F 1_{E^c})
  bool holds = true;
  bool disjoint = true;
  long overlap_cells = 0;
};

struct SelectionResult {
  double lambda = 0.0;
  std::vector<SelectedTent> tents;
  double total_sigma = 0.0;
  int stage1 = 0, plus = 0, minus = 0;
  std::vector<char> removed;  // E = union of the selected tents
  SelectionCertificate cert;
};

SelectionResult select_tents_weak2(const LatticeClasses& lc, const std::vector<double>& absF, double lambda,
                                   const SelectionOptions& opt = {});

// max over lattice tents of S^b(F 1_{removed^c}) against lambda.
SelectionCertificate certify_selection(const LatticeClasses& lc, const std::vector<double>& absF,
                                       const std::vector<char>& removed, double lambda);

}  // namespace olp
