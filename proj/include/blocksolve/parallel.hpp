#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace blocksolve {

/// Runs fn(0..count-1) over up to `workers` threads in contiguous
/// chunks. Each call must write only its own output slot; the caller
/// performs any reduction afterwards in index order, so results are
/// bitwise independent of the worker count. Exceptions are rethrown on
/// the calling thread.
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (workers <= 1 || count == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    const int used = std::min(workers, count);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(used));
    std::exception_ptr first_error;
    std::mutex err_mutex;
    const int base = count / used;
    const int extra = count % used;
    int start = 0;
    for (int w = 0; w < used; ++w) {
        const int len = base + (w < extra ? 1 : 0);
        threads.emplace_back([&, start, len]() {
            try {
                for (int i = start; i < start + len; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        start += len;
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace blocksolve
