#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace maxstable {

/// Worker count: MAXSTABLE_THREADS if set, else hardware concurrency. Never affects results.
inline unsigned default_threads()
{
    if (const char* env = std::getenv("MAXSTABLE_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) {
            return static_cast<unsigned>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Thread count override for the current thread (0 = use default_threads()).
inline unsigned& thread_override()
{
    thread_local unsigned value = 0;
    return value;
}

inline unsigned active_threads()
{
    return thread_override() != 0 ? thread_override() : default_threads();
}

/// RAII scope that pins the worker count.
class ThreadScope
{
  public:
    explicit ThreadScope(unsigned threads) : saved_(thread_override()) { thread_override() = threads; }
    ~ThreadScope() { thread_override() = saved_; }
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

  private:
    unsigned saved_;
};

/// Evaluates fn(i) for i in [0, count) and returns results in index order.
/// Work is split into contiguous blocks; each index is computed exactly once
/// with no shared state, so the output does not depend on the thread count.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using T = decltype(fn(std::size_t{}));
    std::vector<T> out(count);
    const std::size_t workers = std::min<std::size_t>(active_threads(), std::max<std::size_t>(1, count / 64));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = fn(i);
        }
        return out;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    out[i] = fn(i);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& thread : pool) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

/// Neumaier-compensated sum in index order.
inline double compensated_sum(std::span<const double> values)
{
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

struct SampleSummary
{
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

/// Sample mean and standard error (sample sd / sqrt(n)). A sample of identical
/// values reports that value with zero error.
inline SampleSummary summarize(std::span<const double> values)
{
    SampleSummary s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) {
        s.mean = *lo;
        return s;
    }
    const double n = static_cast<double>(values.size());
    s.mean = compensated_sum(values) / n;
    std::vector<double> squares(values.size());
    std::transform(values.begin(), values.end(), squares.begin(), [&](double v) { return (v - s.mean) * (v - s.mean); });
    if (values.size() > 1) {
        s.std_error = std::sqrt(compensated_sum(squares) / (n - 1.0) / n);
    }
    return s;
}

}  // namespace maxstable
