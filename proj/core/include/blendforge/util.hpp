#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace blendforge {

std::string trim(std::string_view s);

/// Strips one pair of wrapping double quotes, if both ends carry one.
std::string strip_wrapping_quotes(std::string_view s);

int count_words(std::string_view s);

std::string base64_encode(const std::uint8_t* data, size_t len);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Runs fn(i) for i in [0, n) on `workers` threads; at most `workers` calls
/// are in flight at any time and results land at their input index, so the
/// output is identical to a serial run. The first exception, if any, is
/// rethrown after all workers finish.
template <typename Out>
std::vector<Out> parallel_map(size_t n, int workers, const std::function<Out(size_t)>& fn) {
    std::vector<Out> results(n);
    if (n == 0) return results;
    if (workers < 1) workers = 1;
    if (static_cast<size_t>(workers) > n) workers = static_cast<int>(n);

    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    results[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace blendforge
