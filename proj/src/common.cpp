#include "zpc/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>

namespace zpc {

HeightRange::HeightRange(double lo, double hi) : t_lo(lo), t_hi(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("height range: bounds must be finite");
  }
  if (lo < 0.0) {
    throw InvalidArgument("height range: t_lo must be >= 0");
  }
  if (!(lo < hi)) {
    throw InvalidArgument("height range: empty range (t_lo must be < t_hi)");
  }
}

bool HeightRange::is_dyadic() const {
  return t_lo > 0.0 && std::abs(t_hi - 2.0 * t_lo) <= 1e-12 * t_hi;
}

double HeightRange::reference_height() const { return is_dyadic() ? t_lo : t_hi; }

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ZPC_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_blocks(std::size_t n_blocks, int workers,
                     const std::function<void(std::size_t)>& body) {
  const std::size_t n_threads =
      std::min<std::size_t>(n_blocks, static_cast<std::size_t>(std::max(1, workers)));
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        try {
          body(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace zpc
