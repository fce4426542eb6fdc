#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <type_traits>
#include <vector>

#include "stochlyap/matrix.hpp"

namespace stochlyap {

/// Serial is the reference path; Parallel must produce identical results.
enum class Execution { Serial, Parallel };

/// out[t] = fn(t) for t in [0, trials). Each trial owns its state (seeded by
/// trial index), so results are independent of thread count and schedule.
template <class Fn>
auto map_trials(std::size_t trials, Fn&& fn, Execution exec = Execution::Parallel)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(trials);
  if (exec == Execution::Serial) {
    for (std::size_t t = 0; t < trials; ++t) out[t] = fn(t);
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<long>(trials);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < count; ++t) {
    try {
      out[static_cast<std::size_t>(t)] = fn(static_cast<std::size_t>(t));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// OpenMP row-pair version of tau(); the serial tau() is its reference.
double tau_parallel(const StochasticMatrix& a);

int available_threads();

}  // namespace stochlyap
