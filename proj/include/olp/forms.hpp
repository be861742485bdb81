#pragma once

// Trilinear forms: the paraproduct, the bilinear Hilbert form
//   Lambda_beta(f) = p.v. int [int prod_j f_j(x - beta_j t) dx] dt/t,
// the wave packet model form, the kernel psi(w) = int prod_j phi(z - beta_j w) dz
// with its transform, the reduction identity and the sizes S_j behind the
// outer Holder bound.

#include <array>
#include <string>
#include <vector>

#include "olp/embeddings.hpp"
#include "olp/gentents.hpp"
#include "olp/outer.hpp"
#include "olp/tents.hpp"
#include "olp/wavelet.hpp"

namespace olp {

// beta and alpha are unit vectors orthogonal to (1,1,1) and to each other;
// alpha = beta x (1,1,1) / |beta x (1,1,1)|.
struct BetaVector {
  std::array<double, 3> beta{};
  std::array<double, 3> alpha{};

  // Normalizes the input, checks orthogonality to (1,1,1) to 1e-9 before
  // normalizing, distinct entries, |beta_j| <= 0.9 and alpha_j != 0.
  static BetaVector make(double b1, double b2, double b3);
  static BetaVector standard();  // (1, 0, -1)/sqrt 2
  double min_gap() const;        // min_{i != j} |beta_i - beta_j|
  double max_gap() const;
};

struct PVQuadrature {
  double t_min = 1e-4;
  double t_max = 0.0;   // 0: grow until the inner integrals fall below 1e-15 of their peak
  int per_octave = 32;  // geometric ladder t_i = t_min 2^{i/per_octave}, used as +-t_i
  int x_refine = 1;     // inner trapezoid step = dx / x_refine
  std::vector<double> eps_ladder = {1e-1, 1e-2, 1e-3};
  double tol = 1e-3;    // relative change allowed under grid doubling
};

struct BHTResult {
  cplx value = 0.0;
  cplx refined = 0.0;  // ladder and inner step both halved
  double rel_change = 0.0;
  bool converged = true;
  std::vector<std::pair<double, cplx>> ladder;  // (eps, int_{|t| > eps})
  int nodes = 0;
};

// Inner integrals I(t) = int prod f_j(x - beta_j t) dx on +-t_i, combined as
// sum (I(t_i) - I(-t_i)) ln(ratio), plus I'(0) t_min for the core |t| < t_min.
BHTResult bht_direct(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3, const BetaVector& beta,
                     const PVQuadrature& q = {});

// int f1 f2 f3 dx by trapezoid on the common lattice.
cplx product_integral(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3);

struct ParaproductResult {
  cplx value = 0.0;
  std::array<double, 3> p{};
  std::array<double, 3> outer{};      // ||F1||_{L^p1(S2)}, ||F2||_{L^p2(S2)}, ||F3||_{L^p3(Sinf)}
  std::array<double, 3> classical{};  // ||f_j||_{p_j}
  double chain = 0.0;                 // 4 prod outer: mass domination (C = 1 on S1), then Holder twice
  double implied_C = 0.0;             // |value| / prod classical
  bool chain_holds = true;            // |value| <= chain
};

// Lambda = sum over grid cells of prod_j F_{phi_j}(f_j) with dy dt/t weights.
// phi1, phi2 must have mean zero; 1/p1 + 1/p2 + 1/p3 = 1.
ParaproductResult paraproduct_form(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                                   const MotherWavelet& phi1, const MotherWavelet& phi2, const MotherWavelet& phi3,
                                   const UpperHalfPlaneGrid& grid, double p1 = 3.0, double p2 = 3.0, double p3 = 3.0,
                                   const LambdaGrid& lg = {8, 24});

struct ModelFormOptions {
  int eta_nodes = 257;  // trapezoid nodes across the eta range
  int s_panels = 16;    // Gauss-Legendre panels on s = 1/t in [0, S]
  int s_order = 16;
  int u_nodes = 24;     // trapezoid nodes per axis for u in [-eps, eps]^2
};

// The model form
//   int_0^inf int int prod_j F_j(y, alpha_j eta + beta_j/t, t) dy deta dt
// with the y integral done exactly in Fourier space.  With s = 1/t and
// xi_j = alpha_j eta + (beta_j + u_j) s this is
//   (2 pi)^{-2} int_0^inf ds int deta int_{sum u = 0} prod_j hat f_j(xi_j) hat phi(u_j) du1 du2.
// phi must be frequency compact, real, with hat phi >= 0 and hat phi(0) != 0.
cplx model_form(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3, const BetaVector& beta,
                const MotherWavelet& phi, const ModelFormOptions& opt = {});

// Phi0 = int_{sum u = 0} prod hat phi(u_j) / (1 + u.beta) du1 du2.  The model
// form equals (sqrt3/2) Phi0 int prod f + i sqrt3/(2pi) Phi0 Lambda_beta.
double model_form_phi0(const MotherWavelet& phi, const BetaVector& beta, int u_nodes = 48);

struct PsiResult {
  double h_w = 0.0;
  std::vector<double> w, psi;                 // psi on a uniform symmetric w grid
  std::vector<double> eta;                    // transform grid
  std::vector<double> hat_transform;          // int psi e^{-i eta w} dw (real part)
  std::vector<double> hat_formula;            // (2 pi sqrt 3)^{-1} int prod hat phi(alpha_j xi - beta_j eta) dxi
  double hat_imag_max = 0.0;                  // largest imaginary part of the transform route
  double max_rel_diff = 0.0;                  // max |transform - formula| / max |formula|
  double support_radius = 0.0;                // largest grid |eta| with |hat| > 1e-8 hat(0)
  double hat0 = 0.0;
  double min_hat = 0.0;
  double even_error = 0.0;                    // max |psi(w) - psi(-w)| / max |psi|
  double psi_at(double w) const;              // six-point Lagrange on the w grid, zero outside
};

// Throws NumericError when the two routes disagree beyond 1e-6 relative.
PsiResult psi_and_hat(const MotherWavelet& phi, const BetaVector& beta, double tol = 1e-6);

// Closed form K = int_0^inf hat psi(1 - r) dr / r from the formula route; the
// identity gives a = K/2 and b = -i K/(2 pi).
double psi_hat_formula(const MotherWavelet& phi, const BetaVector& beta, double eta);
double reduction_K(const MotherWavelet& phi, const BetaVector& beta);

struct ReductionConstants {
  cplx a = 0.0, b = 0.0;
  cplx lhs_even = 0.0, lhs_odd = 0.0, lhs_third = 0.0;
  double residual = 0.0;  // |LHS3 - a g3(0) - b pv3| / |LHS3|
};

// LHS(g) = int_0^inf int g(v) t^{-2} e^{-iv/t} psi(v/t) dv dt for
// g1 = e^{-v^2/2}, g2 = v e^{-v^2/2} and g3 = e^{-(v-1/2)^2/2}; (a, b) solve the
// 2x2 system from g1, g2 and g3 gives the residual.
ReductionConstants reduction_constants(const PsiResult& psi);

// p.v. int g(v) dv / v by symmetric pairing on [0, L].
double pv_integral(const std::function<double(double)>& g, double L = 40.0, int n = 40000);

struct ReductionFit {
  cplx a = 0.0, b = 0.0;  // a' and b'
};

struct ReductionReport {
  cplx model = 0.0, product = 0.0, lambda = 0.0;
  cplx predicted = 0.0;
  double residual = 0.0;  // |model - a' prod - b' Lambda| / max(|model|, |a' prod|, |b' Lambda|)
};

// a' from an even triple (Lambda = 0), then b' from a triple with Lambda != 0.
ReductionFit calibrate_reduction(const std::array<LineSignal, 3>& even, const std::array<LineSignal, 3>& odd,
                                 const MotherWavelet& phi, const BetaVector& beta, const ModelFormOptions& mo = {},
                                 const PVQuadrature& pq = {});
ReductionReport verify_reduction(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                                 const MotherWavelet& phi, const BetaVector& beta, const ReductionFit& fit,
                                 const ModelFormOptions& mo = {}, const PVQuadrature& pq = {});

// Sizes S_j on tents T(x, xi, s) = {t <= s, |y - x| <= s - t, |eta - xi| <= 1/t}:
//   S_j(G)(T) = (s^{-1} int_{T \ T^(j)} |G|^2)^{1/2} + sup_T |G|,
//   T^(j) = {|alpha_j^{-1}(eta - xi) - alpha_j^{-1} beta_j / t| <= b / t} inside T,
// with b = 2^{-8} min_{i != j} |beta_i - beta_j|.
struct BHTSizes {
  Upper3Grid grid;
  BetaVector beta;
  double b = 0.0;
  GenTentSpace tents;                            // alpha = 1, beta = 0 tents
  std::array<std::vector<std::vector<int>>, 3> l2;  // T \ T^(j) per genset
  std::array<SizeSpec, 3> sizes;
  bool disjoint = true;                          // T^(1), T^(2), T^(3) pairwise disjoint on every tent
  long overlap_cells = 0;
  long checked_cells = 0;
};

BHTSizes sizes_Sj(const Upper3Grid& grid, const BetaVector& beta, const std::vector<GenTent>& tips);
// Tips on the cell centres: x = y_j every `stride` columns, xi = eta_l, s = 2 t_q.
std::vector<GenTent> bht_tip_lattice(const Upper3Grid& grid, int ystride = 4, int estride = 4);

struct FactorizationReport {
  long tents = 0;
  double max_ratio = 0.0;  // max S(G1 G2 G3)(T) / prod S_k(G_k)(T)
  bool holds = true;       // S <= 4 prod S_k on every tent
  int worst = -1;
};

FactorizationReport factorization_check(const BHTSizes& bs, const std::array<Field, 3>& G);

// G_j(y, eta, t) = F_j(y, alpha_j eta + beta_j/t, t), each row computed exactly
// at the shifted frequency.
Field bht_G(const LineSignal& f, int j, const BetaVector& beta, const MotherWavelet& phi, const Upper3Grid& grid);

struct PhiMapCheck {
  long forward = 0, backward = 0;  // points tested each way
  bool holds = true;
};

// Phi_j maps T_{alpha_j,beta_j}(x, xi/alpha_j, s) onto T(x, xi, s): cell centres
// of T pulled back land in the tilted tent, random points of the tilted tent
// land in T.
PhiMapCheck check_phi_map(const BetaVector& beta, const Upper3Grid& grid, const std::vector<GenTent>& tents,
                          int samples, std::uint64_t seed);

struct BHTBoundReport {
  std::array<double, 3> p{};
  cplx lambda_value = 0.0;
  cplx model_value = 0.0;
  ReductionFit fit;
  double residual = 0.0;
  std::array<double, 3> outer_norms{};
  std::array<double, 3> classical{};
  double ratio_lambda = 0.0;        // |Lambda| / prod ||f_j||_{p_j}
  double ratio_model = 0.0;         // |model| / prod ||f_j||_{p_j}
  double ratio_model_outer = 0.0;   // |model| / prod outer norms
  FactorizationReport factorization;
  bool disjoint = true;
};

BHTBoundReport bht_outer_bound(const LineSignal& f1, const LineSignal& f2, const LineSignal& f3,
                               const BetaVector& beta, double p1, double p2, double p3, const MotherWavelet& phi,
                               const Upper3Grid& grid, const ReductionFit& fit, const LambdaGrid& lg = {4, 24});

}  // namespace olp
