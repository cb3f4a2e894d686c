#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tnl {

// Runs body(0..paths-1) on a small worker pool.  Results land in a vector
// indexed by path, so reductions are order-deterministic regardless of the
// thread count.  A path that throws is recorded as an abort (its slot stays
// default-constructed) and the first message is kept for diagnostics.
template <class R>
struct PathResults {
  std::vector<R> values;
  std::vector<char> ok;
  int aborts = 0;
  std::string first_error;
};

template <class R>
PathResults<R> run_paths(int paths, int threads, const std::function<R(int)>& body) {
  PathResults<R> out;
  out.values.resize(paths);
  out.ok.assign(paths, 0);
  if (threads < 1) threads = 1;
  std::atomic<int> next{0};
  std::atomic<int> aborts{0};
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= paths) return;
      try {
        out.values[i] = body(i);
        out.ok[i] = 1;
      } catch (const std::exception& e) {
        aborts.fetch_add(1);
        std::lock_guard<std::mutex> lock(err_mutex);
        if (out.first_error.empty()) out.first_error = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  out.aborts = aborts.load();
  return out;
}

int default_thread_count();

}  // namespace tnl
