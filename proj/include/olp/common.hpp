#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace olp {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Bad arguments or malformed input documents (CLI exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical procedure could not reach its stated accuracy.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Saturating arithmetic on [0, +inf]; 0 * inf is taken to be 0.
inline double sat_add(double a, double b) { return (a == kInf || b == kInf) ? kInf : a + b; }
inline double sat_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

// xoshiro256** seeded through splitmix64.  Only raw 64-bit output and the
// helpers below are used, so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  std::uint64_t next();
  double uniform();                       // [0, 1), 53 random bits
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // Box-Muller, no cached second value
  std::uint64_t below(std::uint64_t n);   // [0, n) by rejection
  Rng split(std::uint64_t stream) const;  // independent child stream

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Worker count: OLP_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n), indices interleaved across workers.  Callers
// write into per-index slots so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// FNV-1a over bytes of doubles, used to tag trial inputs in reports.
std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t h = 1469598103934665603ULL);
std::string hex64(std::uint64_t v);

}  // namespace olp
