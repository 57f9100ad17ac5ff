#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cellhom::par {

// Thread count used by all parallel loops. 0 = OpenMP default.
void set_threads(int n);
int threads();

// Deterministic reductions are the default: sums are computed over fixed-size
// chunks (split points independent of the thread count) and the partials are
// combined pairwise in index order, so the result is bit-identical for any
// number of threads. set_deterministic(false) switches to plain OpenMP
// reduction clauses; only the benchmark target does that.
void set_deterministic(bool on);
bool deterministic();

inline constexpr std::size_t kChunk = 1024;

// sum over i in [0, n) of f(i)
double sum(std::size_t n, double (*f)(std::size_t, const void*), const void* ctx);

template <class F>
double sum(std::size_t n, const F& f) {
    auto thunk = [](std::size_t i, const void* c) -> double {
        return (*static_cast<const F*>(c))(i);
    };
    return sum(n, +thunk, &f);
}

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a); // Euclidean norm

// parallel for over [0, n); body must write disjoint outputs per index
void for_each(std::size_t n, void (*f)(std::size_t, void*), void* ctx);

template <class F>
void for_each(std::size_t n, const F& f) {
    auto thunk = [](std::size_t i, void* c) { (*static_cast<const F*>(c))(i); };
    void* ctx = const_cast<void*>(static_cast<const void*>(&f));
    for_each(n, +thunk, ctx);
}

} // namespace cellhom::par
