#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hyk {

// Worker count: explicit override if set, else HYK_THREADS, else hardware.
int thread_count();
void set_thread_count(int n);  // n <= 0 clears the override

// Runs body(i) for i in [0, n) on thread_count() workers. Work is handed out
// in index order; callers that write to slot i get thread-independent results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Evaluates unit(i) for every work unit, then combines the results with a
// fixed pairwise tree, so the value does not depend on the worker count.
template <class T, class Unit, class Combine>
T deterministic_reduce(std::size_t n_units, Unit unit, Combine combine, T identity) {
  if (n_units == 0) return identity;
  std::vector<T> part(n_units, identity);
  parallel_for(n_units, [&](std::size_t i) { part[i] = unit(i); });
  for (std::size_t stride = 1; stride < n_units; stride *= 2)
    for (std::size_t i = 0; i + stride < n_units; i += 2 * stride) part[i] = combine(part[i], part[i + stride]);
  return part[0];
}

}  // namespace hyk
