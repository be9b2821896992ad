#pragma once

#include <cstddef>
#include <vector>

namespace placement::par {

int max_threads();
void set_threads(int n); // n <= 0 leaves the OpenMP default in place

// Deterministic pairwise summation. The result depends only on the order of
// x, never on thread count, so reductions built on it are bit-stable.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

// Execution mode for kernels that keep a serial reference path.
enum class Exec { Serial, Parallel };

// Static-schedule parallel map over [0, n). f(i) must be independent across i.
template <class F>
void for_each_index(int n, Exec mode, F&& f) {
    if (mode == Exec::Serial) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) f(i);
}

} // namespace placement::par
