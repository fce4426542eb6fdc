#include "stochlyap/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace stochlyap {

double tau_parallel(const StochasticMatrix& a) {
  const auto n = static_cast<long>(a.size());
  const Matrix& e = a.entries();
  double min_overlap = 1.0;
#pragma omp parallel for reduction(min : min_overlap) schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      double overlap = 0.0;
      for (long s = 0; s < n; ++s) overlap += std::min(e(i, s), e(j, s));
      min_overlap = std::min(min_overlap, overlap);
    }
  }
  return std::clamp(1.0 - min_overlap, 0.0, 1.0);
}

int available_threads() { return omp_get_max_threads(); }

}  // namespace stochlyap
