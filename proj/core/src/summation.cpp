#include "accspec/summation.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace accspec {
namespace {

constexpr std::size_t kLeafSize = 32;

double sum_range(const double* data, std::size_t n) {
  if (n <= kLeafSize) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return sum_range(data, half) + sum_range(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return sum_range(values.data(), values.size());
}

unsigned worker_threads() {
  static const unsigned threads = [] {
    const char* env = std::getenv("ACCSPEC_THREADS");
    if (env == nullptr) return 1u;
    try {
      const int n = std::stoi(env);
      return static_cast<unsigned>(std::clamp(n, 1, 256));
    } catch (...) {
      return 1u;
    }
  }();
  return threads;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned threads = std::min<std::size_t>(worker_threads(), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace accspec
