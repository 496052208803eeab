#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace subfinsler {

/// Worker count: SUBFINSLER_THREADS when set (>= 1), else hardware concurrency.
inline unsigned thread_cap()
{
  if (const char * env = std::getenv("SUBFINSLER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) { return static_cast<unsigned>(v); }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on up to thread_cap() threads. Results land in
/// index order; the first exception (by index) is rethrown.
template<typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t count, Fn && fn)
{
  std::vector<Result> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) { pool.emplace_back(worker); }
    for (auto & th : pool) { th.join(); }
  }
  for (auto & e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
  return out;
}

}  // namespace subfinsler
