#include "erw/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace erw {

namespace {

int default_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int from_env() {
  const char* env = std::getenv("ERW_THREADS");
  if (env == nullptr) return 0;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

std::atomic<int>& cap() {
  static std::atomic<int> value{from_env()};
  return value;
}

}  // namespace

int thread_count() {
  const int n = cap().load();
  return n > 0 ? n : default_threads();
}

void set_thread_count(int n) { cap().store(n > 0 ? n : 0); }

}  // namespace erw
