// Wall-time comparison of the suite fan-out running serially vs on the
// full OpenMP pool. Usage: spincm_bench [trials] (default 300).
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "spincm/verify.hpp"

namespace {

double time_suite(int trials, unsigned long long seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const spincm::Report rep =
      spincm::dk_suite(spincm::ChainKind::periodic, trials, {}, seed);
  const auto t1 = std::chrono::steady_clock::now();
  if (!rep.pass) std::cerr << "warning: benchmark suite did not pass\n";
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int trials = 300;
  if (argc > 1) trials = std::max(1, std::atoi(argv[1]));
  const unsigned long long seed = 1;

#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double serial = time_suite(trials, seed);
  omp_set_num_threads(max_threads);
  const double parallel = time_suite(trials, seed);
  std::cout << "trials:    " << trials << '\n'
            << "serial:    " << serial << " s (1 thread)\n"
            << "parallel:  " << parallel << " s (" << max_threads
            << " threads)\n"
            << "speedup:   " << (parallel > 0 ? serial / parallel : 0.0)
            << "x\n";
#else
  const double serial = time_suite(trials, seed);
  std::cout << "trials:    " << trials << '\n'
            << "serial:    " << serial << " s (built without OpenMP)\n";
#endif
  return 0;
}
