#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace selq::quad {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(1 + e^y) without overflow.
inline double softplus(double y)
{
    return y > 0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

/// log(e^x + e^y).
inline double log_add(double x, double y)
{
    if (x == neg_inf) return y;
    if (y == neg_inf) return x;
    if (x < y) std::swap(x, y);
    return x + std::log1p(std::exp(y - x));
}

/// One tanh-sinh node on (0, 1), kept entirely in log form:
/// x = 1 / (1 + e^{-2u}), u = (pi/2) sinh t.
struct Node {
    double lx;   // log x
    double l1x;  // log (1 - x)
    double lw;   // log of the weight h * dx/dt
};

/// Nodes t = k h for |t| <= t_max, where t_max puts the extreme node at
/// log x ~ -two_u_max. Ordered by increasing x.
inline std::vector<Node> tanh_sinh_nodes(int level, double two_u_max)
{
    const double pi = 3.14159265358979323846;
    const double h = std::ldexp(1.0, -level);
    const double t_max = std::asinh(two_u_max / pi);
    const int n = int(std::ceil(t_max / h));
    std::vector<Node> out;
    out.reserve(2 * n + 1);
    for (int k = -n; k <= n; ++k) {
        double t = k * h;
        double two_u = pi * std::sinh(t);
        double lx = -softplus(-two_u);
        double l1x = -softplus(two_u);
        out.push_back({lx, l1x, std::log(h * pi * std::cosh(t)) + lx + l1x});
    }
    return out;
}

/// Pairwise (tree) sum; the reduction order depends only on the length.
template <class T>
T pairwise_sum(const T* p, std::size_t n)
{
    if (n == 0) return T{};
    if (n <= 8) {
        T s = p[0];
        for (std::size_t i = 1; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

/// Worker count: explicit request, else SELQ_THREADS, else hardware concurrency.
inline int thread_count(int requested = 0)
{
    if (requested > 0) return requested;
    if (const char* s = std::getenv("SELQ_THREADS")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(i) for i in [0, n) on up to `threads` workers, each owning a
/// contiguous block. Results are written by index, so the caller's reduction
/// is independent of the worker count.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    std::size_t w = std::min<std::size_t>(std::max(1, threads), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        std::size_t lo = n * k / w, hi = n * (k + 1) / w;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace selq::quad
