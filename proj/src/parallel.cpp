#include "cellhom/parallel.hpp"

#include <atomic>
#include <cassert>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cellhom::par {

namespace {
std::atomic<int> g_threads{0};
std::atomic<bool> g_deterministic{true};

#ifdef _OPENMP
int effective_threads() {
    int t = g_threads.load(std::memory_order_relaxed);
    return t > 0 ? t : omp_get_max_threads();
}
#endif
} // namespace

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n, std::memory_order_relaxed); }

int threads() {
#ifdef _OPENMP
    return effective_threads();
#else
    return 1;
#endif
}

void set_deterministic(bool on) { g_deterministic.store(on, std::memory_order_relaxed); }
bool deterministic() { return g_deterministic.load(std::memory_order_relaxed); }

namespace {

// In-order pairwise combination of the chunk partials. Iterative halving:
// same association tree regardless of how many threads produced the partials.
double pairwise_combine(std::vector<double>& p) {
    std::size_t m = p.size();
    if (m == 0) return 0.0;
    while (m > 1) {
        const std::size_t half = m / 2;
        for (std::size_t i = 0; i < half; ++i) p[i] = p[2 * i] + p[2 * i + 1];
        if (m & 1) {
            p[half] = p[m - 1];
            m = half + 1;
        } else {
            m = half;
        }
    }
    return p[0];
}

} // namespace

double sum(std::size_t n, double (*f)(std::size_t, const void*), const void* ctx) {
    if (n == 0) return 0.0;
    if (!deterministic()) {
        double s = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : s) num_threads(effective_threads()) schedule(static)
#endif
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            s += f(static_cast<std::size_t>(i), ctx);
        return s;
    }
    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunks);
#ifdef _OPENMP
#pragma omp parallel for num_threads(effective_threads()) schedule(static)
#endif
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nchunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i, ctx);
        partial[static_cast<std::size_t>(c)] = s;
    }
    return pairwise_combine(partial);
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const double* pa = a.data();
    const double* pb = b.data();
    return sum(a.size(), [pa, pb](std::size_t i) { return pa[i] * pb[i]; });
}

double norm2(std::span<const double> a) {
    const double* pa = a.data();
    double s = sum(a.size(), [pa](std::size_t i) { return pa[i] * pa[i]; });
    return s > 0.0 ? std::sqrt(s) : 0.0;
}

void for_each(std::size_t n, void (*f)(std::size_t, void*), void* ctx) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(effective_threads()) schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        f(static_cast<std::size_t>(i), ctx);
}

} // namespace cellhom::par
