#include "lcrt/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcrt {

#ifdef _OPENMP
int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}
#else
int max_threads() { return 1; }
void set_threads(int) {}
#endif

void apply_thread_env() {
  if (const char* v = std::getenv("CE_LCRT_THREADS")) {
    try {
      set_threads(std::stoi(v));
    } catch (...) {
    }
  }
}

}  // namespace lcrt
