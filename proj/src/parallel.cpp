#include "cortigraph/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace cortigraph {

int configured_threads() {
  const char* env = std::getenv("CORTIGRAPH_THREADS");
  if (env != nullptr) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

void apply_thread_limit() { omp_set_num_threads(configured_threads()); }

}  // namespace cortigraph
