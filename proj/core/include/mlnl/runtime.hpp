#pragma once

#include <functional>

namespace mlnl {

/// Process-wide worker count for row-parallel loops (1 = serial). Output
/// slots are disjoint per row, so results are identical for any count.
void set_worker_count(int n);
int worker_count();

/// Run fn(row) for row in [0, n) across the configured workers.
void parallel_rows(int n, const std::function<void(int)>& fn);

} // namespace mlnl
