#pragma once

#include <functional>

namespace resdeploy::util {

// Number of hardware threads, at least 1.
int default_workers();

// Calls body(i) for i in [0, n) on up to `workers` threads. Results must be
// written by index so the outcome does not depend on scheduling. The first
// exception (lowest index) is rethrown after all threads finish.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace resdeploy::util
