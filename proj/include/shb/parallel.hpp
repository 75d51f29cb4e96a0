// Index-parallel loop with a serial reference path. Bodies write only to
// their own slot, so both paths produce identical results.
#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace shb {

enum class Execution { Serial, Parallel };

/// Calls body(i) for i in [0, count). The first exception (lowest index) is
/// rethrown after the loop.
template <class Body>
void parallel_for(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Worker count the parallel path will use.
int worker_count();

}  // namespace shb
