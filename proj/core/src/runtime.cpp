#include "mlnl/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mlnl {

namespace {
std::atomic<int> g_workers{1};
} // namespace

void set_worker_count(int n) { g_workers.store(std::max(1, n)); }
int worker_count() { return g_workers.load(); }

void parallel_rows(int n, const std::function<void(int)>& fn) {
    int W = std::min(worker_count(), n);
    if (W <= 1 || n < 256) {
        for (int r = 0; r < n; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(W));
    for (int w = 0; w < W; ++w) {
        pool.emplace_back([&, w]() {
            for (int r = w; r < n; r += W) fn(r);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace mlnl
