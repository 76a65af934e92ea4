#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace pshlab {

/// Number of worker threads. Reads PSHLAB_THREADS, falls back to the
/// hardware concurrency.
std::size_t worker_count();

/// Runs body(chunk, begin, end) for every chunk of [0, n) of size `chunk_size`.
/// Chunks may run concurrently; callers that reduce must store per-chunk
/// partials and merge them in chunk order.
void for_each_chunk(std::size_t n, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

/// Neumaier compensated accumulator. Order of add() calls fixes the result.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace pshlab
