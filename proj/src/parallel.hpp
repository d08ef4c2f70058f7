#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "errors.hpp"

// Replicate-level parallelism with determinism guarantees.  Work items write
// into preallocated slots indexed by replicate, so execution order cannot
// influence results; reductions then run sequentially in index order with
// compensated summation.  Consequently every reported number is byte-identical
// for any worker count.

namespace tvar {

// Neumaier-compensated accumulator.
struct KahanAcc {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double get() const { return sum + comp; }
};

// Runs fn(i) for i in [0, count) across `workers` threads (inline if <= 1).
// The first failing index's exception is rethrown after all threads join.
inline void parallel_for(long count, int workers,
                         const std::function<void(long)>& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<long> next{0};
  std::atomic<long> first_error_index{count};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<long>(workers, count));
  pool.reserve(static_cast<std::size_t>(spawn));

  for (int w = 0; w < spawn; ++w) {
    pool.emplace_back([&, w]() {
      for (;;) {
        const long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count || first_error_index.load() < count) break;
        try {
          fn(i);
        } catch (...) {
          long expected = count;
          while (i < expected &&
                 !first_error_index.compare_exchange_weak(expected, i)) {
          }
          if (first_error_index.load() == i)
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  const long bad = first_error_index.load();
  if (bad < count) {
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    throw NumericError("parallel_for: worker failed at index " +
                       std::to_string(bad));
  }
}

}  // namespace tvar
