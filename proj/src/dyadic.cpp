#include "olp/dyadic.hpp"

#include <algorithm>
#include <cmath>

namespace olp {

long DyadicGrid::num_cells() const {
  long n = 1;
  for (int i = 0; i < dim; ++i) n *= side();
  return n;
}

namespace {

long level_offset(const DyadicGrid& g, int k) {
  long off = 0;
  for (int j = 0; j < k; ++j) {
    long per = 1;
    for (int i = 0; i < g.dim; ++i) per *= 1L << (g.levels - j);
    off += per;
  }
  return off;
}

}  // namespace

int dyadic_cube_id(const DyadicGrid& g, int k, const std::vector<long>& corner) {
  if (k < 0 || k > g.levels || static_cast<int>(corner.size()) != g.dim) throw InputError("bad dyadic cube index");
  const long per_axis = 1L << (g.levels - k);
  long idx = 0;
  for (int i = 0; i < g.dim; ++i) {
    if (corner[i] < 0 || corner[i] >= per_axis) throw InputError("dyadic cube corner out of range");
    idx = idx * per_axis + corner[i];
  }
  return static_cast<int>(level_offset(g, k) + idx);
}

OuterSpace build_dyadic_space(int m, int K, long max_gensets) {
  if (m < 1 || K < 0) throw InputError("dyadic space needs dim >= 1 and levels >= 0");
  if (static_cast<long>(m) * K > 40) throw InputError("dyadic space too large");
  DyadicGrid g{m, K};
  const long ncell = g.num_cells();
  const long total = level_offset(g, K + 1);
  if (total > max_gensets || ncell > max_gensets) throw InputError("dyadic genset count exceeds budget");
  OuterSpace sp;
  sp.cells.resize(ncell);
  const long side = g.side();
  for (long c = 0; c < ncell; ++c) {
    Cell& cell = sp.cells[c];
    cell.id = static_cast<int>(c);
    cell.weight = 1.0;
    cell.coords.assign(m, 0.0);
    long r = c;
    for (int i = m - 1; i >= 0; --i) {
      cell.coords[i] = static_cast<double>(r % side);
      r /= side;
    }
  }
  sp.gensets.reserve(total);
  for (int k = 0; k <= K; ++k) {
    const long per_axis = 1L << (K - k);
    long count = 1;
    for (int i = 0; i < m; ++i) count *= per_axis;
    const double sigma = std::ldexp(1.0, m * k);
    const long edge = 1L << k;
    for (long q = 0; q < count; ++q) {
      std::vector<long> corner(m);
      long r = q;
      for (int i = m - 1; i >= 0; --i) {
        corner[i] = (r % per_axis) * edge;
        r /= per_axis;
      }
      GeneratingSet G;
      G.id = static_cast<int>(sp.gensets.size());
      G.sigma = sigma;
      long inner = 1;
      for (int i = 0; i < m; ++i) inner *= edge;
      G.members.reserve(inner);
      for (long u = 0; u < inner; ++u) {
        long rr = u, cell = 0;
        std::vector<long> off(m);
        for (int i = m - 1; i >= 0; --i) {
          off[i] = rr % edge;
          rr /= edge;
        }
        for (int i = 0; i < m; ++i) cell = cell * side + corner[i] + off[i];
        G.members.push_back(static_cast<int>(cell));
      }
      sp.gensets.push_back(std::move(G));
    }
  }
  sp.finalize();
  return sp;
}

double classical_lp(const std::vector<double>& absf, const std::vector<double>& weights, double p) {
  if (!(p > 0.0)) throw InputError("p must be positive");
  if (absf.size() != weights.size()) throw InputError("field and weights differ in length");
  if (p == kInf) {
    double m = 0.0;
    for (std::size_t i = 0; i < absf.size(); ++i)
      if (weights[i] > 0.0) m = std::max(m, absf[i]);
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < absf.size(); ++i) s += std::pow(absf[i], p) * weights[i];
  return std::pow(s, 1.0 / p);
}

double classical_lp(const OuterSpace& space, const Field& f, double p) {
  std::vector<double> w(space.cells.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = space.cells[i].weight;
  return classical_lp(f.abs(), w, p);
}

MeasurabilityReport caratheodory_split(const OuterSpace& space, const std::vector<int>& E,
                                       const std::vector<int>& F) {
  std::vector<char> inF(space.cells.size(), 0);
  for (int c : F) {
    if (c < 0 || c >= static_cast<int>(space.cells.size())) throw InputError("cell id out of range");
    inF[c] = 1;
  }
  std::vector<int> a, b;
  for (int c : E) (inF.at(c) ? a : b).push_back(c);
  MeasurabilityReport r;
  r.mu_E = outer_measure(space, E, SolveMode::Exact).value;
  r.mu_in = outer_measure(space, a, SolveMode::Exact).value;
  r.mu_out = outer_measure(space, b, SolveMode::Exact).value;
  r.deficit = r.mu_in + r.mu_out - r.mu_E;
  return r;
}

}  // namespace olp
