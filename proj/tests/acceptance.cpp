// One PASS/FAIL line per acceptance criterion.  Artifacts go to
// $OLP_ACCEPTANCE_OUT/<suite>/ when that variable is set.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "olp/harness.hpp"

int main() {
  const char* out = std::getenv("OLP_ACCEPTANCE_OUT");
  const std::string suites[] = {"dyadic-coincidence", "tent-premeasure", "holder",         "log-convexity",
                                "calderon",           "carleson-stability", "central-containment", "tent-selection",
                                "psi-hat",            "reduction",       "bht-bound"};
  int failed = 0, k = 0;
  for (const auto& s : suites) {
    ++k;
    olp::ExperimentConfig cfg;
    cfg.suite = s;
    try {
      const auto rep = olp::run_suite(cfg);
      if (out) olp::write_artifacts(rep, cfg, std::string(out) + "/" + s);
      std::printf("%s %2d %-20s rows=%zu time=%.1fs%s%s\n", rep.pass ? "PASS" : "FAIL", k, s.c_str(), rep.rows.size(),
                  rep.seconds, rep.pass ? "" : " ", rep.diagnostic.c_str());
      failed += !rep.pass;
    } catch (const std::exception& e) {
      std::printf("FAIL %2d %-20s exception: %s\n", k, s.c_str(), e.what());
      ++failed;
    }
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", k - failed, k);
  return failed == 0 ? 0 : 1;
}
