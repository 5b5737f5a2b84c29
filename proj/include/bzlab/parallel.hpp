#pragma once

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bzlab {

namespace detail {
inline std::atomic<int>& thread_setting()
{
    static std::atomic<int> n{1};
    return n;
}
} // namespace detail

/// Upper bound on the worker threads used by the library's parallel loops.
inline int thread_count() { return detail::thread_setting().load(); }

inline void set_thread_count(int n) { detail::thread_setting().store(std::max(1, n)); }

/// Runs body(chunk) for every chunk in [0, n_chunks). Chunks are claimed dynamically, so
/// callers must write results into per-chunk slots and combine them afterwards.
template <class Body>
void parallel_for_chunks(std::size_t n_chunks, Body&& body)
{
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            body(c);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) {
                return;
            }
            try {
                body(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n_chunks);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) {
        pool.emplace_back(work);
    }
    work();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
  public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline constexpr std::size_t reduction_chunk = 2048;

/// Sum of term(i) for i in [0, n). The reduction tree is fixed by `reduction_chunk`, so the
/// result is bit-identical for any thread count.
template <class Term>
double deterministic_sum(std::size_t n, Term&& term)
{
    const std::size_t n_chunks = (n + reduction_chunk - 1) / reduction_chunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        CompensatedSum acc;
        const std::size_t end = std::min(n, (c + 1) * reduction_chunk);
        for (std::size_t i = c * reduction_chunk; i < end; ++i) {
            acc.add(term(i));
        }
        partial[c] = acc.value();
    });
    CompensatedSum total;
    for (double p : partial) {
        total.add(p);
    }
    return total.value();
}

/// Element-wise parallel map into a pre-sized output, chunked like deterministic_sum.
template <class Fn>
void parallel_for_each_index(std::size_t n, Fn&& fn, std::size_t chunk = reduction_chunk)
{
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            fn(i);
        }
    });
}

} // namespace bzlab
