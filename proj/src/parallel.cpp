#include "carnot_fbp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace cfbp {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads = std::max(1, n); }

int thread_count() noexcept { return g_threads.load(); }

int reduction_chunks() noexcept { return 16; }

void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& body) {
  const int chunks = reduction_chunks();
  const std::size_t step = (n + chunks - 1) / static_cast<std::size_t>(chunks);
  auto run = [&](int c) {
    const std::size_t b = std::min(n, c * step);
    const std::size_t e = std::min(n, b + step);
    body(c, b, e);
  };
  const int workers_wanted = std::min(thread_count(), chunks);
  if (workers_wanted == 1 || n < 1024) {
    for (int c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(workers_wanted));
  for (int t = 0; t < workers_wanted; ++t)
    workers.emplace_back([&run, t, workers_wanted, chunks] {
      for (int c = t; c < chunks; c += workers_wanted) run(c);
    });
}

}  // namespace cfbp
