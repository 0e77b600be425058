#ifndef SIGMA2_SUMMATION_HPP
#define SIGMA2_SUMMATION_HPP

#include <cstddef>
#include <span>

namespace sigma2 {

// Pairwise (cascade) summation. Deterministic for a fixed element order and
// independent of how the caller distributed work across threads.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace sigma2

#endif
