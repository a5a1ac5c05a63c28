#pragma once

#include <cstdint>

namespace bdgraphtv {

/// Worker count for internal parallel loops. Honors BDGRAPHTV_THREADS as an
/// upper bound; `requested == 0` means "use the default".
int thread_count(int requested = 0);

/// Deterministic 64-bit seed for shard `shard` of a computation seeded by
/// `master`. Independent of thread scheduling.
std::uint64_t shard_seed(std::uint64_t master, std::uint64_t shard);

}  // namespace bdgraphtv
