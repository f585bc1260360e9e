// Tracks a CUR approximation of the synthetic matrix-exponential family with
// both drivers and prints one line per step.

#include <adacur/adacur.hpp>

#include <cstdio>

int main() {
  using namespace adacur;
  const ParamMatrixSequence seq = make_synthetic_expm(100, 11, 7);

  AdaCurConfig ada;
  ada.tol = 1e-8;
  ada.seed = 7;
  ada.true_error = true;
  std::puts("AdaCUR");
  adacur_run(seq, ada, [](const CURFactors& f, const StepTrace& t) {
    std::printf("  t=%.2f rank=%ld est=%.2e true=%.2e %s\n", t.t, static_cast<long>(f.rank()), t.est_rel_error.value_or(0.0),
                t.true_rel_error.value_or(0.0), std::string(action_name(t.action)).c_str());
  });

  FastConfig fast;
  fast.tol = 1e-8;
  fast.seed = 7;
  fast.true_error = true;
  std::puts("FastAdaCUR");
  fastadacur_run(seq, fast, [](const CURFactors& f, const StepTrace& t) {
    std::printf("  t=%.2f rank=%ld true=%.2e reads=%llu %s\n", t.t, static_cast<long>(f.rank()),
                t.true_rel_error.value_or(0.0), static_cast<unsigned long long>(t.entries_read),
                std::string(action_name(t.action)).c_str());
  });
}
