#include "igram/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace igram {

namespace {

int read_budget() {
    const char* env = std::getenv("INTERFERO_THREADS");
    int requested = 0;
    if (env != nullptr && *env != '\0') {
        try {
            requested = std::stoi(env);
        } catch (...) {
            requested = 0;
        }
    }
    if (requested <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        requested = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return std::max(1, requested);
}

}  // namespace

int thread_budget() {
    static const int budget = read_budget();
    return budget;
}

void parallel_chunks(int n, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    const int base = n / workers;
    const int extra = n % workers;
    int begin = 0;
    for (int w = 0; w < workers; ++w) {
        const int len = base + (w < extra ? 1 : 0);
        const int end = begin + len;
        if (w + 1 == workers) {
            fn(begin, end);
        } else {
            pool.emplace_back([&fn, begin, end] { fn(begin, end); });
        }
        begin = end;
    }
    for (auto& t : pool) t.join();
}

}  // namespace igram
