#pragma once

// Inequality verification suites, signal families and report artifacts.
//
// A suite produces one row per trial (inputs hash, measured value, bound,
// ratio, pass flag, where the bound came from), optional curves for plotting
// and a summary.  Trials run through parallel_for into fixed slots, so the
// rows do not depend on the thread count.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "olp/outer.hpp"
#include "olp/tents.hpp"
#include "olp/wavelet.hpp"

namespace olp {

enum class SignalKind { GaussianMix, Step, RandomTrig, WavePacket, Spike };

SignalKind parse_signal_kind(const std::string& s);
std::string to_string(SignalKind k);

// Signals live on [-extent, extent]; Gaussian tails are cut at 1e-16 relative.
struct SignalFamily {
  SignalKind kind = SignalKind::GaussianMix;
  int count = 1;
  std::uint64_t seed = 1;
  double extent = 4.0;
  bool real = true;  // wave packets carry e^{i xi x} when false, cos(xi x) otherwise
};

using SignalFn = std::function<cplx(double)>;

// Member i depends on (seed, i) only.
std::vector<SignalFn> generate_signals(const SignalFamily& fam);
// Every kind has compact support, so all norms are finite.
double signal_extent(const SignalFamily& fam);

// Seeded nonnegative test fields on an outer space: a few generating sets
// carrying random levels plus sparse noise.
std::vector<double> random_field(const OuterSpace& space, Rng& rng);

struct TrialRow {
  int trial = 0;
  std::string label;
  std::string hash;  // hex of the FNV-1a hash of the trial inputs
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = true;
  std::string provenance;  // stated-constant | proof-constant | measured | exact | stability | premise
};

struct CurveRow {
  std::string series;
  double x = 0.0, y = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::vector<TrialRow> rows;
  std::vector<CurveRow> curves;
  std::map<std::string, double> summary;
  bool pass = true;
  std::string diagnostic;  // first failing trial or premise violation
  double seconds = 0.0;    // wall time, kept out of the CSV

  void add(TrialRow r);
  void fail(const std::string& why);
};

// ---------------------------------------------------------------------------
// Outer Lebesgue space propositions

struct HolderOptions {
  double p = 1.0, p1 = 2.0, p2 = 2.0;
  int trials = 100;
  std::uint64_t seed = 1;
  LambdaGrid lambda{16, 24};
  SolveMode mode = SolveMode::Greedy;
};

// ||f1 f2||_{L^p(S)} <= 2 ||f1||_{L^p1(S1)} ||f2||_{L^p2(S2)} on three spaces
// with identical collections.  The premise S(f1 f2)(E) <= S1(f1)(E) S2(f2)(E)
// is checked on every generating set of every trial before the norms.
// p2 = inf uses the outer essential supremum.
SuiteReport verify_holder(const OuterSpace& space, const SizeSpec& S, const SizeSpec& S1, const SizeSpec& S2,
                          const HolderOptions& opt);
// Three spaces; the premise mu <= mu_j is checked on every generating set.
SuiteReport verify_holder(const OuterSpace& X, const OuterSpace& X1, const OuterSpace& X2, const SizeSpec& S,
                          const SizeSpec& S1, const SizeSpec& S2, const HolderOptions& opt);

// C = (p (1/(p - p1) + 1/(p2 - p)))^{1/p}, or (p/(p - p1))^{1/p} for p2 = inf.
double log_convexity_constant(double p, double p1, double p2);

struct LogConvexityOptions {
  double p = 2.0, p1 = 1.0, p2 = 4.0;
  int trials = 50;
  std::uint64_t seed = 1;
  LambdaGrid lambda{16, 24};
  SolveMode mode = SolveMode::Greedy;
};

// ||f||_p <= C ||f||_{p1,inf}^{a1} ||f||_{p2,inf}^{a2}, 1/p = a1/p1 + a2/p2,
// all from one super level curve per trial.
SuiteReport verify_log_convexity(const OuterSpace& space, const SizeSpec& S, const LogConvexityOptions& opt);

// Same inequality for a given step curve mu = m on (0, h): the ratio is 1.
double log_convexity_step_ratio(double h, double m, double p, double p1, double p2);

struct PullbackOptions {
  double p = 2.0;
  int trials = 20;
  std::uint64_t seed = 1;
  LambdaGrid lambda{16, 24};
  SolveMode mode = SolveMode::Greedy;
  std::vector<std::vector<double>> fields;  // fields on X2; random fields when empty
};

struct PullbackPremise {
  double A = 0.0;  // max over E2 of mu1(Phi^{-1} E2) / mu2(E2)
  double B = 0.0;  // max over E1 of the best S1(f o Phi)(E1) / S2(f)(E2) constant
  bool ok = true;
  std::string diagnostic;
};

// Sizes must share the kind (AvgLp with one exponent, or AvgLinf) so that B
// has a closed form; E2 ranges over generating sets containing Phi(E1).
PullbackPremise pullback_premise(const OuterSpace& X1, const SizeSpec& S1, const OuterSpace& X2, const SizeSpec& S2,
                                 const std::vector<int>& phi, SolveMode mode);

// ||f o Phi||_{L^p(X1)} / (A^{1/p} B ||f||_{L^p(X2)}) per trial; the sup is reported as C.
SuiteReport verify_pullback(const OuterSpace& X1, const SizeSpec& S1, const OuterSpace& X2, const SizeSpec& S2,
                            const std::vector<int>& phi, const PullbackOptions& opt);

// Constant of the truncation argument: 2K (p/(p - p1) + p/(p2 - p))^{1/p},
// 2K (p/(p - p1))^{1/p} for p2 = inf, K the quasi-triangle constant of the size.
double marcinkiewicz_constant(double p, double p1, double p2, double K);

struct MarcinkiewiczOptions {
  double p = 2.0, p1 = 1.0, p2 = kInf;
  std::vector<LineSignal> signals;
  int cross_checks = 3;   // signals whose splitting is re-run level by level
  int truncations = 6;    // truncation pieces per signal entering A1, A2
  LambdaGrid lambda{8, 24};
  SolveMode mode = SolveMode::Greedy;
};

using LinearEmbedding = std::function<Field(const LineSignal&)>;

// Weak endpoint constants A1, A2 measured over the signals and their
// truncations f 1_{|f| > c}, f 1_{|f| <= c}; every strong ratio is held
// against A1^th1 A2^th2 C.  The cross-check verifies mu(S(Tf) > 2K lam) via
// the union of the witnesses for the two pieces of the split at that level.
SuiteReport verify_marcinkiewicz(const OuterSpace& space, const SizeSpec& S, const LinearEmbedding& T,
                                 const MarcinkiewiczOptions& opt);

struct DominationOptions {
  int trials = 50;
  std::uint64_t seed = 1;
  LambdaGrid lambda{16, 24};
  SolveMode mode = SolveMode::Greedy;
};

// Premise constant C = max_E sup_f int_E |f| dnu / (S(f)(E) sigma(E)), in
// closed form for AvgLp and AvgLinf sizes.
double domination_premise(const OuterSpace& space, const SizeSpec& S, const std::vector<double>& nu, int* worst = nullptr);

// |int f dnu| <= 4 C ||f||_{L^1(S)}: the layer decomposition over lambda = 2^k
// with a cover per level loses 2 from the level step and 2 from the layer cake.
SuiteReport verify_domination(const OuterSpace& space, const SizeSpec& S, const std::vector<double>& nu,
                              const DominationOptions& opt);

// ---------------------------------------------------------------------------
// Suites and artifacts

struct ExperimentConfig {
  std::string suite;
  std::uint64_t seed = 1;
  int trials = 0;               // 0: suite default
  LambdaGrid lambda{0, 0};      // per_binade = 0: suite default
  SolveMode mode = SolveMode::Greedy;
  std::vector<double> exponents;  // suite-specific exponent list, empty: default
  int resolution = 0;             // refinement steps, 0: default
  std::string out_dir;
  std::map<std::string, double> params;  // named numeric overrides

  double param(const std::string& key, double dflt) const;
};

// Suite names in acceptance order, then the remaining propositions.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

// Throws InputError for unknown names.
SuiteReport run_suite(const ExperimentConfig& cfg);

// rows.csv, summary.json and curves.tsv in dir (created when missing).
void write_artifacts(const SuiteReport& rep, const ExperimentConfig& cfg, const std::string& dir);
std::string rows_csv(const SuiteReport& rep);
std::string curves_tsv(const SuiteReport& rep);

}  // namespace olp
