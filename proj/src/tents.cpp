#include "olp/tents.hpp"

#include <algorithm>
#include <cmath>

namespace olp {

int UpperHalfPlaneGrid::ny() const { return static_cast<int>(std::llround(2.0 * Y / dy)); }

double UpperHalfPlaneGrid::t(int k) const { return t_max * std::exp2(-static_cast<double>(k) / per_octave); }

double UpperHalfPlaneGrid::weight() const { return dy * std::log(2.0) / per_octave; }

void UpperHalfPlaneGrid::validate() const {
  if (!(Y > 0.0) || !(dy > 0.0) || levels < 1 || !(t_max > 0.0) || per_octave < 1)
    throw InputError("half-plane grid needs Y > 0, dy > 0, levels >= 1, t_max > 0, per_octave >= 1");
  if (std::abs(2.0 * Y / dy - ny()) > 1e-9 * ny()) throw InputError("2Y must be a multiple of dy");
}

std::vector<Tent> default_tip_lattice(const UpperHalfPlaneGrid& grid) {
  grid.validate();
  std::vector<Tent> tips;
  for (int k = 0; k < grid.levels; ++k)
    for (int j = 0; j < grid.ny(); ++j) tips.push_back({grid.y(j), 2.0 * grid.t(k)});
  return tips;
}

std::vector<Tent> sparse_tip_lattice(const UpperHalfPlaneGrid& grid, double per_s) {
  grid.validate();
  if (!(per_s >= 2.0)) throw InputError("sparse tip lattice needs per_s >= 2");
  std::vector<Tent> tips;
  for (int k = 0; k < grid.levels; ++k) {
    const double s = 2.0 * grid.t(k);
    const int stride = std::max(1, static_cast<int>(std::floor(s / (per_s * grid.dy))));
    for (int j = 0; j < grid.ny(); j += stride) tips.push_back({grid.y(j), s});
  }
  return tips;
}

std::vector<int> tent_cells(const UpperHalfPlaneGrid& grid, const TiltedTent& T) {
  std::vector<int> out;
  const int ny = grid.ny();
  for (int k = 0; k < grid.levels; ++k) {
    const double t = grid.t(k);
    for (int j = 0; j < ny; ++j)
      if (T.contains(grid.y(j), t)) out.push_back(grid.index(j, k));
  }
  return out;
}

TentSpace build_tilted_tent_space(const UpperHalfPlaneGrid& grid, const std::vector<Tent>& tips, double alpha,
                                  double beta) {
  grid.validate();
  if (!(alpha >= -1.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
    throw InputError("tilted tents need alpha in [-1,1] and beta in (0,1]");
  TentSpace ts;
  ts.grid = grid;
  const int ny = grid.ny();
  ts.space.cells.resize(grid.num_cells());
  for (int k = 0; k < grid.levels; ++k)
    for (int j = 0; j < ny; ++j) {
      Cell& c = ts.space.cells[grid.index(j, k)];
      c.id = grid.index(j, k);
      c.coords = {grid.y(j), grid.t(k)};
      c.weight = grid.weight();
    }
  for (const Tent& tip : tips) {
    if (!(tip.s > 0.0)) throw InputError("tent height must be positive");
    TiltedTent T{tip.x, tip.s, alpha, beta};
    auto cells = tent_cells(grid, T);
    if (cells.empty()) continue;
    GeneratingSet G;
    G.id = static_cast<int>(ts.space.gensets.size());
    G.members = std::move(cells);
    G.sigma = tip.s;
    ts.space.gensets.push_back(std::move(G));
    ts.tents.push_back(T);
  }
  ts.space.finalize();
  return ts;
}

TentSpace build_tent_space(const UpperHalfPlaneGrid& grid, const std::vector<Tent>& tips) {
  return build_tilted_tent_space(grid, tips, 0.0, 1.0);
}

SizeSpec size_Sp(double p) {
  if (p == kInf) return SizeSpec::avg_linf();
  return SizeSpec::avg_lp(p);
}

NonMeasurabilityWitness non_measurability_witness(const TentSpace& ts, int tent, const std::vector<int>& E) {
  NonMeasurabilityWitness w;
  if (tent < 0 || tent >= static_cast<int>(ts.tents.size())) throw InputError("tent index out of range");
  w.tent = tent;
  const auto& T = ts.space.gensets[tent].members;
  std::vector<char> inE(ts.space.cells.size(), 0);
  for (int c : E) inE.at(c) = 1;
  std::vector<int> a, b;
  for (int c : T) (inE[c] ? a : b).push_back(c);
  w.E = a;
  w.mu_T = outer_measure(ts.space, T, SolveMode::Exact).value;
  w.mu_in = outer_measure(ts.space, a, SolveMode::Exact).value;
  w.mu_out = outer_measure(ts.space, b, SolveMode::Exact).value;
  w.deficit = w.mu_in + w.mu_out - w.mu_T;
  w.found = w.deficit > 1e-12 * std::max(1.0, w.mu_T);
  return w;
}

NonMeasurabilityWitness non_measurability_witness(const TentSpace& ts) {
  // Tallest tents first; the first split with a positive deficit wins.
  std::vector<int> order(ts.tents.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = static_cast<int>(g);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ts.tents[a].s > ts.tents[b].s; });
  NonMeasurabilityWitness last;
  for (int g : order) {
    const double s = ts.tents[g].s;
    std::vector<int> E;
    bool upper = false, lower = false;
    for (int c : ts.space.gensets[g].members) {
      if (ts.space.cells[c].coords[1] > s / 2) {
        E.push_back(c);
        upper = true;
      } else {
        lower = true;
      }
    }
    if (!upper || !lower) continue;
    last = non_measurability_witness(ts, g, E);
    if (last.found) return last;
  }
  return last;
}

double shadow_length(const TentSpace& ts, const std::vector<int>& ids) {
  std::vector<std::pair<double, double>> iv;
  for (int g : ids) {
    const auto& T = ts.tents.at(g);
    iv.push_back({T.x - T.s, T.x + T.s});  // untilted shadow
  }
  std::sort(iv.begin(), iv.end());
  double len = 0.0, lo = 0.0, hi = 0.0;
  bool open = false;
  for (auto [a, b] : iv) {
    if (!open || a > hi) {
      if (open) len += hi - lo;
      lo = a;
      hi = b;
      open = true;
    } else {
      hi = std::max(hi, b);
    }
  }
  if (open) len += hi - lo;
  return len;
}

}  // namespace olp
