#pragma once

#include <functional>

namespace nirfuse {

/// Worker count used by row-parallel kernels. 0 or 1 means serial.
void set_thread_count(int n);
int thread_count();

/// Runs body(row) for row in [0, rows). Rows are split into contiguous
/// blocks; each row is computed by exactly one worker, so results never
/// depend on the worker count as long as body only writes its own row.
void parallel_rows(int rows, const std::function<void(int)>& body);

}  // namespace nirfuse
