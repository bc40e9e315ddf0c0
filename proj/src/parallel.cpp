#include "eeg2shape/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace e2s {

int worker_count() {
  static const int count = [] {
    if (const char* env = std::getenv("E2S_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return n < kBatchChunks ? n : kBatchChunks;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    const int n = hw == 0 ? 1 : static_cast<int>(hw);
    return n < kBatchChunks ? n : kBatchChunks;
  }();
  return count;
}

void parallel_chunks(int total, int n_chunks, const std::function<void(int, int, int)>& fn) {
  if (total <= 0) return;
  if (n_chunks > total) n_chunks = total;

  auto chunk_range = [&](int c) {
    const int begin = static_cast<int>(static_cast<long long>(total) * c / n_chunks);
    const int end = static_cast<int>(static_cast<long long>(total) * (c + 1) / n_chunks);
    return std::pair<int, int>(begin, end);
  };

  const int workers = worker_count() < n_chunks ? worker_count() : n_chunks;
  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) {
      auto [b, e] = chunk_range(c);
      fn(c, b, e);
    }
    return;
  }

  std::atomic<int> next{0};
  auto body = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chunks) break;
      auto [b, e] = chunk_range(c);
      fn(c, b, e);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace e2s
