#ifndef MBGR_COMMON_HPP
#define MBGR_COMMON_HPP

#include <charconv>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mbgr {

/// Error type thrown by every module for contract violations
/// (shape mismatches, malformed files, non-finite values, ...).
class MbgrError : public std::runtime_error {
public:
    explicit MbgrError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw MbgrError(msg);
}

// ---------------------------------------------------------------------------
// Deterministic hashing / seeding helpers
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and a stream id.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x51ed2701a9b3c4d5ULL));
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// ---------------------------------------------------------------------------
// Number formatting (round-trip exact, stable across runs)
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Data-parallel helper. Work is split into fixed index ranges, so results
// are bitwise identical for any worker count. Nested/concurrent calls fall
// back to inline execution.
// ---------------------------------------------------------------------------

namespace detail {

class WorkerPool {
public:
    static WorkerPool& instance() {
        static WorkerPool pool;
        return pool;
    }

    int threads() const { return threads_; }

    // fn(lo, hi) over [0, n) split into `threads_` contiguous chunks.
    void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
        if (threads_ <= 1 || n < 2 || !lock_.try_lock()) {
            fn(0, n);
            return;
        }
        std::size_t chunk = (n + threads_ - 1) / threads_;
        {
            std::unique_lock<std::mutex> lk(m_);
            task_ = &fn;
            task_n_ = n;
            task_chunk_ = chunk;
            pending_ = 0;
            for (int t = 1; t < threads_; ++t) {
                std::size_t lo = std::size_t(t) * chunk;
                if (lo < n) ++pending_;
            }
            ++generation_;
        }
        cv_.notify_all();
        fn(0, std::min(chunk, n));
        {
            std::unique_lock<std::mutex> lk(m_);
            done_cv_.wait(lk, [&] { return pending_ == 0; });
            task_ = nullptr;
        }
        lock_.unlock();
    }

private:
    WorkerPool() {
        threads_ = 2;
        if (const char* env = std::getenv("MBGR_THREADS")) {
            threads_ = std::max(1, std::atoi(env));
        } else {
            unsigned hw = std::thread::hardware_concurrency();
            if (hw > 0) threads_ = std::min<unsigned>(hw, 4);
        }
        for (int t = 1; t < threads_; ++t) {
            workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    ~WorkerPool() {
        {
            std::unique_lock<std::mutex> lk(m_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    void worker_loop(int t) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t, std::size_t)>* task = nullptr;
            std::size_t lo = 0, hi = 0;
            {
                std::unique_lock<std::mutex> lk(m_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                if (!task_) continue;
                lo = std::size_t(t) * task_chunk_;
                if (lo >= task_n_) continue;
                hi = std::min(lo + task_chunk_, task_n_);
                task = task_;
            }
            (*task)(lo, hi);
            {
                std::unique_lock<std::mutex> lk(m_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    int threads_ = 1;
    std::vector<std::thread> workers_;
    std::mutex m_;
    std::mutex lock_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* task_ = nullptr;
    std::size_t task_n_ = 0, task_chunk_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace detail

/// Run fn(lo, hi) over [0, n). `cost` is an estimate of total scalar work;
/// small jobs run inline to skip synchronization overhead.
inline void parallel_for(std::size_t n, std::size_t cost,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (cost < 200000) {
        fn(0, n);
        return;
    }
    detail::WorkerPool::instance().run(n, fn);
}

} // namespace mbgr

#endif // MBGR_COMMON_HPP
