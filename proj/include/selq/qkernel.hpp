#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace selq {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline const cplx I_unit{0.0, 1.0};

// Bad input: out-of-range index, non-generic chart, pole at an argument.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The computation ran but did not reach its tolerance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class... Ts>
std::string cat(const Ts&... xs)
{
    std::ostringstream os;
    os.precision(17);
    (os << ... << xs);
    return os.str();
}

// Reduce x into [-1/2, 1/2] so that sin(pi*x) = sign * sin(pi*r).
inline double reduce_sin(double x, int& sign)
{
    double r = x - 2.0 * std::nearbyint(0.5 * x);  // [-1, 1]
    sign = 1;
    if (r > 0.5) r = 1.0 - r;
    else if (r < -0.5) r = -1.0 - r;
    return r;
}

}  // namespace detail

inline double sin_pi(double x)
{
    int sg;
    double r = detail::reduce_sin(x, sg);
    if (r == 0.0) return 0.0;
    return std::sin(pi * r);
}

inline double cos_pi(double x)
{
    double r = std::fabs(x - 2.0 * std::nearbyint(0.5 * x));  // [0, 1]
    // cos(pi r) = sin(pi (1/2 - r)); the subtraction is exact near r = 1/2.
    double t = 0.5 - r;
    if (t == 0.0) return 0.0;
    return std::sin(pi * t);
}

/// s(A) = sin(pi A). The real part is reduced modulo 2 before scaling by pi.
inline cplx sin_pi(cplx z)
{
    if (z.imag() == 0.0) return sin_pi(z.real());
    double x = z.real(), y = pi * z.imag();
    return {sin_pi(x) * std::cosh(y), cos_pi(x) * std::sinh(y)};
}

inline cplx cos_pi(cplx z)
{
    if (z.imag() == 0.0) return cos_pi(z.real());
    double x = z.real(), y = pi * z.imag();
    return {cos_pi(x) * std::cosh(y), -sin_pi(x) * std::sinh(y)};
}

/// e(A) = exp(pi i A).
inline cplx e_half(cplx a)
{
    double mod = std::exp(-pi * a.imag());
    return {mod * cos_pi(a.real()), mod * sin_pi(a.real())};
}

/// [n]_q = 1 + q + ... + q^(n-1).
inline cplx q_bracket(int n, cplx q)
{
    if (n < 0) throw domain_error(detail::cat("q_bracket: negative n = ", n));
    cplx s = 0.0, p = 1.0;
    for (int k = 0; k < n; ++k) {
        s += p;
        p *= q;
    }
    return s;
}

/// The deformation parameter q = e(g) on the unit circle.
struct QContext {
    double g = 0.0;
    cplx q = 1.0;

    QContext() = default;
    explicit QContext(double g_) : g(g_), q(e_half(g_)) {}

    /// q^x for real x, computed from the exponent rather than by repeated products.
    cplx pow(double x) const { return e_half(g * x); }
};

/// <A>_n = A [n]_q - A^{-1} [n]_{1/q}.
inline cplx angle_bracket(cplx a, int n, const QContext& ctx)
{
    if (a == 0.0) throw domain_error("angle_bracket: A = 0");
    if (n < 0) throw domain_error(detail::cat("angle_bracket: negative n = ", n));
    return a * q_bracket(n, ctx.q) - q_bracket(n, std::conj(ctx.q)) / a;
}

// ---------------------------------------------------------------------------
// Gamma

namespace detail {

// Lanczos coefficients for g = 7, n = 9.
inline constexpr std::array<double, 9> lanczos_c{
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline cplx gamma_right(cplx z)
{
    z -= 1.0;
    cplx x = lanczos_c[0];
    for (int i = 1; i < 9; ++i) x += lanczos_c[i] / (z + double(i));
    cplx t = z + 7.5;
    return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

}  // namespace detail

/// Distance from z to the nearest non-positive integer (inf when Re z > 0.5).
inline double gamma_pole_distance(cplx z)
{
    if (z.real() > 0.5) return INFINITY;
    double n = std::min(0.0, std::nearbyint(z.real()));
    return std::abs(z - n);
}

inline cplx complex_gamma(cplx z)
{
    double d = gamma_pole_distance(z);
    if (d < 1e-12)
        throw domain_error(detail::cat("complex_gamma: argument ", z.real(), "+", z.imag(),
                                       "i is ", d, " from a pole"));
    if (z.real() < 0.5) return pi / (sin_pi(z) * detail::gamma_right(1.0 - z));
    return detail::gamma_right(z);
}

inline cplx beta_fn(cplx a, cplx b)
{
    return complex_gamma(a) * complex_gamma(b) / complex_gamma(a + b);
}

inline double binom(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

inline double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

/// Closed-form Selberg integral S_m(alpha, beta, gamma), normalised by 1/m!.
inline cplx selberg(int m, cplx alpha, cplx beta, cplx gamma)
{
    if (m < 0) throw domain_error("selberg: negative m");
    cplx r = 1.0 / factorial(m);
    auto G = [&](cplx x, int j, const char* which) {
        if (gamma_pole_distance(x) < 1e-12)
            throw domain_error(detail::cat("selberg: pole at j=", j, " in factor ", which));
        return complex_gamma(x);
    };
    for (int j = 1; j <= m; ++j) {
        double jm1 = j - 1;
        r *= G(alpha + jm1 * gamma, j, "Gamma(alpha+(j-1)gamma)");
        r *= G(beta + jm1 * gamma, j, "Gamma(beta+(j-1)gamma)");
        r *= G(double(j) * gamma + 1.0, j, "Gamma(j gamma+1)");
        r /= G(alpha + beta + double(m + j - 2) * gamma, j, "Gamma(alpha+beta+(m+j-2)gamma)");
        r /= G(gamma + 1.0, j, "Gamma(gamma+1)");
    }
    return r;
}

/// Self-intersection number J_m(alpha, beta, gamma) of the loaded simplex.
inline cplx intersection_Jm(int m, cplx alpha, cplx beta, cplx gamma)
{
    if (m < 0) throw domain_error("intersection_Jm: negative m");
    cplx r = factorial(m) * std::pow(0.5 * I_unit, m);
    auto den = [&](cplx x, int j, const char* which) {
        cplx s = sin_pi(x);
        if (std::abs(s) < 1e-12)
            throw domain_error(detail::cat("intersection_Jm: vanishing ", which, " at j=", j));
        return s;
    };
    for (int j = 1; j <= m; ++j) {
        double jm1 = j - 1;
        r *= sin_pi(alpha + beta + double(m + j - 2) * gamma) * sin_pi(gamma);
        r /= den(alpha + jm1 * gamma, j, "s(alpha+(j-1)gamma)") *
             den(beta + jm1 * gamma, j, "s(beta+(j-1)gamma)") *
             den(double(j) * gamma, j, "s(j gamma)");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Exponent chart

/// (m, a, b, c, g) with the exponent at infinity derived on demand.
struct ExponentChart {
    int m = 1;
    cplx a = 0.0, b = 0.0, c = 0.0, g = 0.0;

    cplx lambda_inf() const { return -a - b - c - double(m - 1) * g; }
    bool is_real() const
    {
        return a.imag() == 0.0 && b.imag() == 0.0 && c.imag() == 0.0 && g.imag() == 0.0;
    }
};

/// The non-generic point m = 2 rho, a = b = c = -rho/(2 rho + 1), g = 1/(2 rho + 1).
inline ExponentChart dtype_chart(int rho)
{
    if (rho < 1) throw domain_error("dtype_chart: rho must be >= 1");
    double d = 2.0 * rho + 1.0;
    return {2 * rho, -rho / d, -rho / d, -rho / d, 1.0 / d};
}

struct GenericityViolation {
    std::string family;  // "a", "b", "c", "lambda_inf" or "g"
    int i = 0;
    cplx value;
    double nearest = 0.0;
};

inline std::vector<GenericityViolation> genericity_check(const ExponentChart& ch,
                                                         double tol = 1e-9)
{
    std::vector<GenericityViolation> out;
    auto test = [&](const char* fam, int i, cplx v) {
        double n = std::nearbyint(v.real());
        if (std::abs(v - n) < tol) out.push_back({fam, i, v, n});
    };
    for (int i = 1; i <= ch.m; ++i) {
        cplx pair = binom(i, 2) * ch.g;
        test("a", i, double(i) * ch.a + pair);
        test("b", i, double(i) * ch.b + pair);
        test("c", i, double(i) * ch.c + pair);
        test("lambda_inf", i, double(i) * ch.lambda_inf() + pair);
        if (i >= 2) test("g", i, pair);
    }
    return out;
}

enum class Singularity { Zero, One, Infinity };

struct CharExponents {
    Singularity at;
    std::vector<cplx> values;
};

inline CharExponents char_exponents(const ExponentChart& ch, Singularity at)
{
    CharExponents r{at, {}};
    const int m = ch.m;
    for (int j = 0; j <= m; ++j) {
        double cj2 = binom(j, 2);
        switch (at) {
        case Singularity::Zero: r.values.push_back((ch.a + ch.c + 1.0) * double(j) + cj2 * ch.g); break;
        case Singularity::One: r.values.push_back((ch.b + ch.c + 1.0) * double(j) + cj2 * ch.g); break;
        case Singularity::Infinity:
            r.values.push_back(-(ch.a + ch.b + 1.0) * double(j) - ch.c * double(m) -
                               (cj2 + double(j * (m - j))) * ch.g);
            break;
        }
    }
    return r;
}

struct Resonance {
    Singularity at;
    int j = 0, k = 0;
    cplx difference;
};

/// Pairs j < k of local exponents whose difference is (within tol) an integer.
/// The five-family condition does not rule these out for every chart.
inline std::vector<Resonance> exponent_resonances(const ExponentChart& ch, double tol = 1e-9)
{
    std::vector<Resonance> out;
    for (auto at : {Singularity::Zero, Singularity::One, Singularity::Infinity}) {
        auto e = char_exponents(ch, at).values;
        for (int j = 0; j <= ch.m; ++j)
            for (int k = j + 1; k <= ch.m; ++k) {
                cplx d = e[k] - e[j];
                if (std::abs(d - std::nearbyint(d.real())) < tol) out.push_back({at, j, k, d});
            }
    }
    return out;
}

/// C_k . C_k = binom(m,k) J_k(a, c, g/2) J_{m-k}(b, lambda_inf, g/2).
inline cplx cycle_self_intersection(int k, const ExponentChart& ch)
{
    if (k < 0 || k > ch.m)
        throw domain_error(detail::cat("cycle_self_intersection: k=", k, " outside [0, m]"));
    cplx h = 0.5 * ch.g;
    return binom(ch.m, k) * intersection_Jm(k, ch.a, ch.c, h) *
           intersection_Jm(ch.m - k, ch.b, ch.lambda_inf(), h);
}

}  // namespace selq
