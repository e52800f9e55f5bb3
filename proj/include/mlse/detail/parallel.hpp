#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace mlse {

template <class T, class Fn, class Sink>
std::vector<T> parallel_map(std::size_t count, int threads, Fn fn, Sink sink) {
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mutex;  // guards error, slots publication and the sink
    std::size_t flushed = 0;

    const auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                T value = fn(i);
                std::lock_guard<std::mutex> lock(mutex);
                slots[i].emplace(std::move(value));
                while (flushed < count && slots[flushed] && !error) {
                    sink(flushed, *slots[flushed]);
                    ++flushed;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, threads));
    if (n == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < std::min(n, count); ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int threads, Fn fn) {
    return parallel_map<T>(count, threads, fn, [](std::size_t, const T&) {});
}

}  // namespace mlse
