#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace dmlab {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; `parallel` distributes independent indices over OpenMP threads.
/// Both paths produce bit-identical results: work items never share RNG
/// state and every reduction happens afterwards, in index order.
enum class Exec { serial, parallel };

void set_threads(int threads);
int max_threads();

/// Calls `body(i)` for every i in [0, count). Exceptions thrown by any index
/// are collected; the one from the lowest index is rethrown after the loop.
void for_each_index(Exec exec, std::size_t count, const std::function<void(std::size_t)>& body);

/// Evaluates `fn(i)` for all indices into a vector (the usual first half of an
/// ordered reduction).
template <class T, class Fn>
std::vector<T> map_indices(Exec exec, std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  for_each_index(exec, count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace dmlab
