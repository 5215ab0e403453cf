#include "pseudoview/parallel.h"

namespace pseudoview {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ThreadLimit::ThreadLimit(int threads) : previous_(max_threads()) {
#ifdef _OPENMP
  omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

ThreadLimit::~ThreadLimit() {
#ifdef _OPENMP
  omp_set_num_threads(previous_);
#endif
}

}  // namespace pseudoview
