#pragma once

#include <functional>

namespace e2s {

// Number of virtual chunks a batch is partitioned into. The partition is
// fixed regardless of worker count, so per-chunk accumulators combined in
// chunk order give bit-identical reductions for any thread count.
inline constexpr int kBatchChunks = 8;

// Worker count: E2S_THREADS env override, else hardware concurrency, clamped
// to [1, kBatchChunks].
int worker_count();

// Runs fn(chunk, begin, end) for each chunk of [0, total) split into n_chunks
// near-equal contiguous ranges. Chunks may execute on any worker; each chunk
// body runs sequentially.
void parallel_chunks(int total, int n_chunks, const std::function<void(int, int, int)>& fn);

}  // namespace e2s
