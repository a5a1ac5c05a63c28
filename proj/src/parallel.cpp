#include "bdgraphtv/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bdgraphtv {

int thread_count(int requested) {
#ifdef _OPENMP
  int available = omp_get_max_threads();
#else
  int available = 1;
#endif
  if (const char* env = std::getenv("BDGRAPHTV_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap > 0) available = std::min(available, cap);
    } catch (...) {
      // unparsable value: ignore the cap
    }
  }
  if (requested > 0) available = std::min(available, requested);
  return std::max(1, available);
}

std::uint64_t shard_seed(std::uint64_t master, std::uint64_t shard) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (shard + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bdgraphtv
