#include "ueglab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>
#include <vector>

namespace ueglab {

std::size_t default_lane_count() {
  if (const char* env = std::getenv("UEGLAB_THREADS")) {
    std::size_t value = 0;
    const auto end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec == std::errc() && ptr == end && value > 0) return value;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t lanes, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  if (lanes == 0) lanes = default_lane_count();
  lanes = std::min(lanes, count);

  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (lanes == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(lanes - 1);
    for (std::size_t t = 1; t < lanes; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ueglab
