#include "bsdelab/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace bsdelab {
namespace {

int initial_jobs() {
  if (const char* env = std::getenv("BSDELAB_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

std::atomic<int>& job_cap() {
  static std::atomic<int> cap{initial_jobs()};
  return cap;
}

}  // namespace

void set_jobs(int n) { job_cap().store(n > 0 ? n : 1); }

int jobs() { return job_cap().load(); }

}  // namespace bsdelab
