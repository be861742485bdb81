#pragma once

// Outer measure spaces on finite carriers.
//
// A space is a list of cells (reference mass = weight) and a list of
// generating sets with pre-measure sigma.  The outer measure of a cell set is
// the cheapest cover by generating sets.  The super level measure
// mu(S(f) > lambda) is the cheapest collection Q of generating sets such that
// every generating set E satisfies S(f 1_{U^c})(E) <= lambda with U = union Q.
//
// Restricting the removed set F to unions of generating sets loses nothing:
// if F is feasible and Q covers F with cost <= mu(F) + eps, then U = union Q
// contains F, sizes are monotone, so U is feasible as well.

#include <memory>
#include <string>
#include <vector>

#include "olp/common.hpp"

namespace olp {

struct Cell {
  int id = 0;
  std::vector<double> coords;
  double weight = 1.0;
};

struct GeneratingSet {
  int id = 0;
  std::vector<int> members;
  double sigma = 0.0;
};

struct SpaceIndex;

struct OuterSpace {
  std::vector<Cell> cells;
  std::vector<GeneratingSet> gensets;
  bool covers_carrier = false;

  // Validates ids (cell and genset ids must equal their position), sorts and
  // dedups member lists, builds incidence tables, sets covers_carrier.
  void finalize();
  const SpaceIndex& index() const;
  std::size_t num_cells() const { return cells.size(); }
  std::size_t num_gensets() const { return gensets.size(); }

 private:
  std::shared_ptr<const SpaceIndex> index_;
};

struct SpaceIndex {
  std::vector<std::vector<int>> cell_gensets;  // gensets containing each cell
  std::vector<std::vector<int>> neighbors;     // gensets sharing a cell, self included
};

enum class SizeKind { AvgL1, AvgL2, AvgLinf, AvgLp, SbComposite, Custom };

struct SizeSpec;
using CustomSize = std::function<double(const OuterSpace&, int g, const std::vector<double>& absf,
                                        const std::vector<char>& removed)>;

// S(f)(E) for the built-in kinds (sigma = sigma(E), w = cell weight):
//   AvgLp      (sigma^{-1} sum_{E} w |f|^p)^{1/p}      (AvgL1, AvgL2 fix p)
//   AvgLinf    max_E |f|
//   SbComposite (sigma^{-1} sum_{R_E} w |f|^2)^{1/2} + max_E |f|
// where R_E = l2_members[E] is a subset of E.
struct SizeSpec {
  SizeKind kind = SizeKind::AvgL1;
  double exponent = 1.0;
  double quasi_const = 1.0;
  std::shared_ptr<const std::vector<std::vector<int>>> l2_members;
  CustomSize custom;

  static SizeSpec avg_l1();
  static SizeSpec avg_l2();
  static SizeSpec avg_linf();
  static SizeSpec avg_lp(double p);
  static SizeSpec sb_composite(std::vector<std::vector<int>> l2_members);
  static SizeSpec make_custom(CustomSize fn, double quasi_const);
  // [S(|f|^{1/alpha})]^alpha on top of another size.
  static SizeSpec fractional(const SizeSpec& base, double alpha);

  std::string name() const;
};

struct Field {
  std::vector<cplx> values;

  Field() = default;
  explicit Field(std::size_t n, cplx v = 0.0) : values(n, v) {}
  static Field from_real(const std::vector<double>& v);
  std::vector<double> abs() const;
  std::size_t size() const { return values.size(); }
};

struct Cover {
  std::vector<int> ids;
  double cost = 0.0;
};

enum class SolveMode { Exact, Greedy };
enum class SolveStatus { Exact, GreedyUpperBound, Infeasible };
std::string to_string(SolveStatus s);

struct SolverOptions {
  long node_budget = 2000000;
};

struct MeasureResult {
  double value = 0.0;
  Cover witness;
  SolveStatus status = SolveStatus::Exact;
  long nodes = 0;
};

struct SuperLevelResult {
  double lambda = 0.0;
  double value = 0.0;
  Cover witness;
  SolveStatus status = SolveStatus::Exact;
  long nodes = 0;
};

// Size of |f| restricted to cells with removed[c] == 0 (empty mask = nothing removed).
double size_value(const OuterSpace& space, const SizeSpec& size, int g, const std::vector<double>& absf,
                  const std::vector<char>& removed = {});

MeasureResult outer_measure(const OuterSpace& space, const std::vector<int>& target, SolveMode mode,
                            const SolverOptions& opt = {});

double outer_essential_sup(const OuterSpace& space, const SizeSpec& size, const Field& f,
                           const std::vector<int>& excluded = {});
double outer_essential_sup_abs(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                               const std::vector<char>& removed = {});

// lambda > 0 is required by the public contract; lambda == 0 is accepted and
// returns the cost of removing every cell that carries size mass.
SuperLevelResult super_level_measure(const OuterSpace& space, const SizeSpec& size, const Field& f, double lambda,
                                     SolveMode mode, const SolverOptions& opt = {});
SuperLevelResult super_level_measure_abs(const OuterSpace& space, const SizeSpec& size,
                                         const std::vector<double>& absf, double lambda, SolveMode mode,
                                         const SolverOptions& opt = {});

// True when the cover in `ids` removes enough: outsup over the complement <= lambda.
bool cover_is_feasible(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                       const std::vector<int>& ids, double lambda);

struct LambdaGrid {
  int per_binade = 64;
  int binades = 40;
};

// lambda_i = lambda_max 2^{-i/per_binade}, i = 0..N.  mu[i] is a value of
// mu(S(f) > lambda_i) (an upper bound when not exact), made monotone, and
// mu_floor bounds mu on (0, lambda_N].
struct SuperLevelCurve {
  double lambda_max = 0.0;
  LambdaGrid grid;
  std::vector<double> lambdas;
  std::vector<double> mu;
  double mu_floor = 0.0;
  bool exact = true;
  long evaluations = 0;
};

SuperLevelCurve super_level_curve(const OuterSpace& space, const SizeSpec& size, const std::vector<double>& absf,
                                  const LambdaGrid& grid, SolveMode mode, const SolverOptions& opt = {});

struct NormResult {
  double value = 0.0;  // upper sum
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
  bool exact = true;
};

NormResult curve_lp(const SuperLevelCurve& c, double p);
NormResult curve_weak_lp(const SuperLevelCurve& c, double p);

NormResult lp_norm(const OuterSpace& space, const SizeSpec& size, const Field& f, double p,
                   const LambdaGrid& grid = {}, SolveMode mode = SolveMode::Exact, const SolverOptions& opt = {});
NormResult weak_lp_norm(const OuterSpace& space, const SizeSpec& size, const Field& f, double p,
                        const LambdaGrid& grid = {}, SolveMode mode = SolveMode::Exact,
                        const SolverOptions& opt = {});

struct SizeAxiomReport {
  double observed_C = 0.0;
  double max_monotonicity_violation = 0.0;
  double max_scaling_error = 0.0;
  bool monotone_ok = true;
  bool scaling_ok = true;
  long checks = 0;
};

SizeAxiomReport verify_size_axioms(const OuterSpace& space, const SizeSpec& size,
                                   const std::vector<Field>& samples, int trials, std::uint64_t seed = 1);

// Space with every generating set's sigma multiplied by c.
OuterSpace scaled_space(const OuterSpace& space, double c);

}  // namespace olp
