#pragma once

// Embeddings of line signals into the upper half-plane and upper 3-space,
// the maximal function, the Calderon-Zygmund decomposition and the Calderon
// constant.
//
// Both embeddings are convolutions, evaluated as exact spectral multipliers on
// a zero-padded FFT buffer (the discrete transform of the trapezoid sum):
//   half plane      F(y,t)     = int f(x) t^{-1} conj(phi((y-x)/t)) dx,  multiplier conj(hat phi(-t xi))
//   time-frequency  F(y,eta,t) = int f(x) e^{i eta (y-x)} t^{-1} phi((y-x)/t) dx,  multiplier hat phi(t(xi-eta))
// Output rows are read at grid points, which must lie on the signal lattice.

#include <vector>

#include "olp/gentents.hpp"
#include "olp/outer.hpp"
#include "olp/tents.hpp"
#include "olp/wavelet.hpp"

namespace olp {

Field embed_half_plane(const LineSignal& f, const MotherWavelet& phi, const UpperHalfPlaneGrid& grid);

// F(y + alpha t, beta t): the row at beta t is computed exactly, then read at
// y + alpha t by linear interpolation on the signal lattice (zero off the buffer).
// beta = 2^{-m/L} for an integer m >= 0 is required.
Field embed_tilted(const LineSignal& f, const MotherWavelet& phi, double alpha, double beta,
                   const UpperHalfPlaneGrid& grid);

Field embed_time_frequency(const LineSignal& f, const MotherWavelet& phi, const Upper3Grid& grid);

// Rows of the time-frequency embedding at arbitrary (eta, t) pairs, read at
// the points y0 + i dy, i < ny.  Used by the resampling in the model form.
std::vector<std::vector<cplx>> time_frequency_rows(const LineSignal& f, const MotherWavelet& phi,
                                                   const std::vector<std::pair<double, double>>& eta_t, double y0,
                                                   double dy, int ny);

// Uncentered maximal function over all grid intervals, O(n^2).
LineSignal hl_maximal(const LineSignal& f);

struct CZBad {
  long i0 = 0, i1 = 0;  // inclusive sample range
  double x = 0.0, s = 0.0;  // interval (x - s, x + s) spanned by the cells
  std::vector<cplx> v;      // b_i on i0..i1
};

struct CZDecomposition {
  LineSignal good;
  std::vector<CZBad> bad;
  double level = 0.0;
  double c_phi = 1.0;
};

// Omega = {Mf > c_phi level} in cell runs, each run widened by one cell per
// side and overlapping runs merged, so every interval holds a cell with
// Mf <= c_phi level.
CZDecomposition cz_decompose(const LineSignal& f, double level, double c_phi = 1.0);

// int_0^inf |hat phi(t xi)|^2 dt/t, checked for both signs of xi.
double calderon_constant(const MotherWavelet& phi);

struct CalderonCheck {
  double grid_integral = 0.0;  // sum |F|^2 dy dt/t over the grid
  double predicted = 0.0;      // C_phi ||f||_2^2
  double rel_error = 0.0;
};

CalderonCheck calderon_grid_check(const LineSignal& f, const MotherWavelet& phi, const UpperHalfPlaneGrid& grid);

}  // namespace olp
