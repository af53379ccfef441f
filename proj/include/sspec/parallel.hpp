#pragma once

#include <cstddef>
#include <functional>

namespace sspec {

/// Worker count used when a caller passes threads = 0. Defaults to 1.
void set_default_threads(int threads);
int default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results to slot i, so reductions done
/// afterwards in index order are independent of scheduling. The first
/// exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace sspec
