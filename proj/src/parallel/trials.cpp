#include <cstdlib>
#include <exception>
#include <vector>

#include <omp.h>

#include "imk/sim.hpp"

namespace imk {

int configured_threads() {
  const char* env = std::getenv("IMK_THREADS");
  if (!env || !*env) return omp_get_max_threads();
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return omp_get_max_threads();
  return static_cast<int>(v);
}

void parallel_for(int n, const std::function<void(int)>& body, int threads) {
  if (threads <= 0) threads = configured_threads();
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void serial_for(int n, const std::function<void(int)>& body) {
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace imk
