#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <future>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace solid {

// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
}

inline std::size_t default_parallelism() {
    return std::max(1u, std::thread::hardware_concurrency());
}

// Memoises make(key). Concurrent callers on the same missing key wait for
// one computation; failed computations are not memoised.
template <class Key, class Value>
class SingleFlight {
public:
    template <class Make>
    Value get(const Key& key, Make&& make) {
        std::promise<Value> promise;
        std::shared_future<Value> fut;
        bool owner = false;
        {
            std::lock_guard lock(mu_);
            auto it = entries_.find(key);
            if (it != entries_.end()) {
                fut = it->second;
            } else {
                fut = promise.get_future().share();
                entries_.emplace(key, fut);
                owner = true;
            }
        }
        if (owner) {
            try {
                promise.set_value(make());
            } catch (...) {
                {
                    std::lock_guard lock(mu_);
                    entries_.erase(key);
                }
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

private:
    std::mutex mu_;
    std::map<Key, std::shared_future<Value>> entries_;
};

}  // namespace solid
