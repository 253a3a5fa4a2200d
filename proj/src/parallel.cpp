#include "prescurv/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace prescurv {

unsigned worker_count() {
    static const unsigned count = [] {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("PRESCURV_THREADS")) {
            try {
                int v = std::stoi(env);
                if (v >= 1) return std::min(static_cast<unsigned>(v), hw * 4);
            } catch (const std::exception&) {
            }
        }
        return hw;
    }();
    return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(worker_count(), (n + 255) / 256);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    auto run = [&](std::size_t w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        try {
            if (begin < end) body(begin, end);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run, w);
    run(0);
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace prescurv
