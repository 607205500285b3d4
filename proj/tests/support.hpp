#pragma once

#include <cmath>
#include <random>

#include <selq/connection.hpp>
#include <selq/qkernel.hpp>

namespace selq::testing {

// High-precision reference values, computed once and frozen.
namespace ref {
inline constexpr double gamma_0_3 = 2.9915689876875907446;
inline const cplx gamma_m1_7_p0_4i{1.1356438824316395205, -0.26890799072916941431};
inline const cplx gamma_4_25_m2i{-4.5795842034255241973, -1.9677789828674683497};
inline constexpr double gamma_m0_5 = -3.5449077018110320546;

struct F21 {
    double a, b, c, z, value;
};
inline constexpr F21 f21[] = {
    {-0.4, 0.2, 1.3, 0.3, 0.98056283861247636146},
    {0.4, -0.8, -0.6, 0.7, 1.5691202183985835552},
    {0.4, 0.2, 0.8, -2.0, 0.88706186626270103441},
    {-0.3, 0.6, 1.2, 0.9, 0.80158035941543226667},
    {0.4, -0.2, 0.3, -0.5, 1.1112616987409623139},
};

inline constexpr double selberg_2 = 0.086929531626456982052;  // S_2(1.2, 1.2, 0.4)
inline constexpr double selberg_3 = 0.011654062419649778221;  // S_3(0.7, 1.5, 0.35)

// m = 1, a = b = c = -0.4, z = 0.3.
inline constexpr double m1_I[2] = {6.0790366667885527145, 2.0341365365029176527};
inline constexpr double m1_J[2] = {6.5447858919010354473, 2.7877346129688407819};

// m = 2, a = b = c = -0.4, g = -0.3, z = 0.5 (two-dimensional reference quadrature).
inline constexpr double m2_I1 = 15.67508176000029;
}  // namespace ref

/// Random real chart away from the integer conditions that make the
/// closed forms singular.
inline ExponentChart random_chart(std::mt19937& rng, int m, double margin = 0.02)
{
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (;;) {
        ExponentChart ch{m, U(rng), U(rng), U(rng), U(rng)};
        if (std::fabs(ch.g.real()) < 0.05) continue;
        if (!genericity_check(ch, margin).empty()) continue;
        try {
            for (auto v : all_variants()) {
                (void)connect_01(ch, v);
                (void)connect_01(ExponentChart{m, ch.b, ch.a, ch.c, ch.g}, v);
            }
        } catch (const std::exception&) {
            continue;
        }
        return ch;
    }
}

inline double rel_entry_diff(cplx x, cplx y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

/// The m = 2 connection matrix as displayed in closed form, with p_11 in its
/// first form (second = false) or second form (second = true).
inline CMatrix displayed_m2(const ExponentChart& ch, bool second = false)
{
    const double a = ch.a.real(), b = ch.b.real(), c = ch.c.real(), g = ch.g.real(), h = g / 2;
    auto s = [](double x) { return sin_pi(x); };
    CMatrix P(3, 3);
    P(0, 0) = s(a) * s(a + h) / (s(b + c) * s(b + c + h));
    P(0, 1) = -s(a) * s(c) / (s(b + c) * s(b + c + g));
    P(0, 2) = s(c) * s(c + h) / (s(b + c + g) * s(b + c + h));
    P(1, 0) = -s(a + h) * s(a + b + c + h) * s(g) / (s(b + c) * s(b + c + h) * s(h));
    P(1, 1) = second ? s(c) * s(a + b + c + h) / (s(b + c) * s(b + c + h)) -
                           s(a) * s(b + h) / (s(b + c + g) * s(b + c + h))
                     : -s(b) * s(a + h) / (s(b + c) * s(b + c + h)) +
                           s(a + b + c + g) * s(c + h) / (s(b + c + g) * s(b + c + h));
    P(1, 2) = s(b + h) * s(c + h) * s(g) / (s(b + c + g) * s(b + c + h) * s(h));
    P(2, 0) = s(a + b + c + h) * s(a + b + c + g) / (s(b + c) * s(b + c + h));
    P(2, 1) = s(b) * s(a + b + c + g) / (s(b + c) * s(b + c + g));
    P(2, 2) = s(b + h) * s(b) / (s(b + c + g) * s(b + c + h));
    return P;
}

/// The degenerate-point matrices at rho = 1 and rho = 2 as displayed.
inline CMatrix displayed_dtype(int rho)
{
    if (rho == 1) {
        CMatrix P(3, 3);
        P << 0.5, -1, 0.5, -0.5, 0, 0.5, 0.5, 1, 0.5;
        return P;
    }
    const double r5 = std::sqrt(5.0), u = (r5 - 1) / 4, v = (r5 + 1) / 4;
    CMatrix P(5, 5);
    P << u, -v, 1, -v, u,
        -u, 0.5, 0, -0.5, u,
        u, 0, -2 * u, 0, u,
        -u, -0.5, 0, 0.5, u,
        u, v, 1, v, u;
    return P;
}

}  // namespace selq::testing
