#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qkernel.hpp"

namespace selq {

/// (a; q)_n = prod_{0 <= i < n} (1 - a q^i).
inline cplx qpoch(cplx a, cplx q, int n)
{
    if (n < 0) throw domain_error(detail::cat("qpoch: negative n = ", n));
    cplx r = 1.0, p = a;
    for (int i = 0; i < n; ++i) {
        r *= 1.0 - p;
        p *= q;
    }
    return r;
}

/// Neumaier-compensated complex accumulator.
class CompensatedSum {
public:
    void add(cplx x)
    {
        add1(sr_, cr_, x.real());
        add1(si_, ci_, x.imag());
    }
    cplx value() const { return {sr_ + cr_, si_ + ci_}; }

private:
    static void add1(double& s, double& c, double x)
    {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x)) c += (s - t) + x;
        else c += (x - t) + s;
        s = t;
    }
    double sr_ = 0, cr_ = 0, si_ = 0, ci_ = 0;
};

/// A terminating r phi_{r-1} series; `n` is the index at which it stops.
struct TerminatingSeries {
    std::vector<cplx> num;
    std::vector<cplx> den;
    cplx q = 0.0;
    cplx z = 0.0;
    int n = 0;
};

struct SeriesValue {
    cplx value;
    int terms = 0;
    double magnitude = 0.0;  // sum of |term|, the scale against which cancellation is judged
};

inline SeriesValue phi_eval(const TerminatingSeries& s)
{
    if (s.n < 0) throw domain_error("phi: negative termination index");
    cplx qn = 1.0 / std::pow(s.q, s.n);
    bool terminates = std::any_of(s.num.begin(), s.num.end(),
                                  [&](cplx a) { return std::abs(a - qn) < 1e-10; });
    if (s.n > 0 && !terminates)
        throw domain_error(detail::cat("phi: no numerator parameter equals q^-", s.n));

    // Term ratios applied in index order; no reordering.
    const bool compensate = s.n + 1 > 16;
    CompensatedSum acc;
    cplx plain = 0.0, term = 1.0, qk = 1.0;
    double mag = 0.0;
    for (int k = 0; k <= s.n; ++k) {
        mag += std::abs(term);
        if (compensate) acc.add(term);
        else plain += term;
        if (k == s.n) break;
        cplx r = s.z;
        for (cplx a : s.num) r *= 1.0 - a * qk;
        for (std::size_t j = 0; j < s.den.size(); ++j) {
            cplx f = 1.0 - s.den[j] * qk;
            if (std::abs(f) < 1e-12)
                throw domain_error(detail::cat("phi: denominator parameter ", j,
                                               " vanishes at k=", k + 1));
            r /= f;
        }
        cplx fq = 1.0 - qk * s.q;
        if (std::abs(fq) < 1e-12) throw domain_error(detail::cat("phi: (q;q)_k vanishes at k=", k + 1));
        r /= fq;
        term *= r;
        qk *= s.q;
    }
    return {compensate ? acc.value() : plain, s.n + 1, mag};
}

inline cplx phi(const TerminatingSeries& s) { return phi_eval(s).value; }

// ---------------------------------------------------------------------------
// Gauss 2F1

namespace detail {

inline cplx f21_series(cplx a, cplx b, cplx c, cplx z)
{
    CompensatedSum acc;
    cplx term = 1.0;
    acc.add(term);
    for (int k = 0; k < 200000; ++k) {
        term *= (a + double(k)) * (b + double(k)) / ((c + double(k)) * double(k + 1)) * z;
        acc.add(term);
        if (term == 0.0) break;
        if (std::abs(term) < 1e-17 * std::abs(acc.value()) && k > 4) {
            // Stop only once the ratio has settled below one as well.
            cplx rn = (a + double(k + 1)) * (b + double(k + 1)) / ((c + double(k + 1)) * double(k + 2)) * z;
            if (std::abs(rn) < 1.0) return acc.value();
        }
    }
    throw numeric_error("gauss_2f1: series did not converge");
}

}  // namespace detail

/// 2F1(a, b; c; z). Direct series for |z| <= 1/2; otherwise the Pfaff map
/// z -> z/(z-1) when it shrinks the argument, else the slow direct series for |z| < 1.
inline cplx gauss_2f1(cplx a, cplx b, cplx c, cplx z)
{
    if (gamma_pole_distance(c) < 1e-12)
        throw domain_error("gauss_2f1: c is a non-positive integer");
    if (z == 0.0) return 1.0;
    double az = std::abs(z);
    if (az <= 0.5) return detail::f21_series(a, b, c, z);
    cplx w = z / (z - 1.0);
    if (std::abs(w) < std::min(az, 0.9))
        return std::pow(1.0 - z, -a) * detail::f21_series(a, c - b, c, w);
    if (az < 0.995) return detail::f21_series(a, b, c, z);
    throw domain_error(detail::cat("gauss_2f1: |z| = ", az,
                                   " outside the series disk and the Pfaff image was tried"));
}

// ---------------------------------------------------------------------------
// q-Racah polynomials

struct QRacahSpec {
    cplx a = 0.0, b = 0.0, c = 0.0;
    int N = 0;
    cplx q = 0.0;

    cplx mu(int x) const { return std::pow(q, -x) + c * std::pow(q, x - N); }
};

namespace detail {

inline TerminatingSeries qracah_series(int n, int x, const QRacahSpec& s)
{
    if (n < 0 || n > s.N || x < 0 || x > s.N)
        throw domain_error(detail::cat("qracah_w: n=", n, ", x=", x, " outside [0, ", s.N, "]"));
    const cplx q = s.q;
    TerminatingSeries t;
    t.num = {std::pow(q, -n), s.a * s.b * std::pow(q, n + 1), std::pow(q, -x), s.c * std::pow(q, x - s.N)};
    t.den = {s.a * q, std::pow(q, -s.N), s.b * s.c * q};
    t.q = q;
    t.z = q;
    t.n = std::min(n, x);
    return t;
}

}  // namespace detail

inline cplx qracah_w(int n, int x, const QRacahSpec& s) { return phi(detail::qracah_series(n, x, s)); }

inline cplx qracah_weight(int x, const QRacahSpec& s)
{
    if (x < 0 || x > s.N) throw domain_error(detail::cat("qracah_weight: x=", x, " out of range"));
    const cplx q = s.q, a = s.a, b = s.b, c = s.c;
    const cplx qN = std::pow(q, -s.N);
    cplx num = (1.0 - c * std::pow(q, 2 * x - s.N)) * qpoch(c * qN, q, x) * qpoch(qN, q, x) *
               qpoch(a * q, q, x) * qpoch(b * c * q, q, x);
    cplx den = (1.0 - c * qN) * qpoch(c / a * qN, q, x) * qpoch(qN / b, q, x) * qpoch(q, q, x) *
               qpoch(c * q, q, x);
    if (std::abs(den) < 1e-14) throw domain_error(detail::cat("qracah_weight: vanishing denominator at x=", x));
    return num / den * std::pow(a * b * q, -x);
}

inline cplx qracah_norm(int n, const QRacahSpec& s)
{
    if (n < 0 || n > s.N) throw domain_error(detail::cat("qracah_norm: n=", n, " out of range"));
    const cplx q = s.q, a = s.a, b = s.b, c = s.c;
    const int N = s.N;
    cplx lead = qpoch(b * q, q, N) * qpoch(a * q / c, q, N) /
                (qpoch(a * b * q * q, q, N) * qpoch(1.0 / c, q, N));
    cplx num = (1.0 - a * b * std::pow(q, 2 * n + 1)) * qpoch(a * q, q, n) * qpoch(a * b * q, q, n) *
               qpoch(b * c * q, q, n) * qpoch(std::pow(q, -N), q, n);
    cplx den = (1.0 - a * b * q) * qpoch(q, q, n) * qpoch(b * q, q, n) * qpoch(a * q / c, q, n) *
               qpoch(a * b * std::pow(q, N + 2), q, n);
    if (std::abs(den) < 1e-14 || std::abs(lead) == 0.0)
        throw domain_error(detail::cat("qracah_norm: vanishing factor at n=", n));
    return lead * num / den * std::pow(std::pow(q, N) / c, n);
}

/// max over (m, n) of |sum_x rho(x) W_m(x) W_n(x) - delta_mn / h_n|, relative to
/// max(1, sum_x |rho(x)| |W_m|(x) |W_n|(x)) where |W| sums the term magnitudes
/// of each series, so cancellation inside W is accounted for.
inline double qracah_orthogonality_residual(const QRacahSpec& s)
{
    std::vector<cplx> w(s.N + 1);
    std::vector<std::vector<SeriesValue>> W(s.N + 1, std::vector<SeriesValue>(s.N + 1));
    for (int x = 0; x <= s.N; ++x) {
        w[x] = qracah_weight(x, s);
        for (int n = 0; n <= s.N; ++n) W[n][x] = phi_eval(detail::qracah_series(n, x, s));
    }
    double worst = 0.0;
    for (int m = 0; m <= s.N; ++m)
        for (int n = 0; n <= s.N; ++n) {
            cplx sum = 0.0;
            double scale = 0.0;
            for (int x = 0; x <= s.N; ++x) {
                sum += w[x] * W[m][x].value * W[n][x].value;
                scale += std::abs(w[x]) * W[m][x].magnitude * W[n][x].magnitude;
            }
            if (m == n) sum -= 1.0 / qracah_norm(n, s);
            worst = std::max(worst, std::abs(sum) / std::max(1.0, scale));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Transformation identities as residuals

/// Residuals of the transformation formulas are taken relative to the larger
/// of 1 and the summed term magnitudes on either side, so that a draw with
/// large cancelling terms is judged by its rounding level rather than by size.
inline double watson_check(cplx a, cplx b, cplx c, cplx d, cplx e, int n, cplx q)
{
    cplx sa = std::sqrt(a);
    cplx qn = std::pow(q, -n);
    TerminatingSeries lhs{{a, q * sa, -q * sa, b, c, d, e, qn},
                          {sa, -sa, a * q / b, a * q / c, a * q / d, a * q / e, a * std::pow(q, n + 1)},
                          q,
                          a * a * std::pow(q, n + 2) / (b * c * d * e),
                          n};
    TerminatingSeries rhs{{a * q / (b * c), d, e, qn}, {a * q / b, a * q / c, d * e * qn / a}, q, q, n};
    cplx pre = qpoch(a * q, q, n) * qpoch(a * q / (d * e), q, n) /
               (qpoch(a * q / d, q, n) * qpoch(a * q / e, q, n));
    auto L = phi_eval(lhs), R = phi_eval(rhs);
    return std::abs(L.value - pre * R.value) / std::max({1.0, L.magnitude, std::abs(pre) * R.magnitude});
}

inline bool sears_balanced(int n, cplx a1, cplx a2, cplx a3, cplx b1, cplx b2, cplx b3, cplx q)
{
    return std::abs(b1 * b2 * b3 - std::pow(q, 1 - n) * a1 * a2 * a3) < 1e-10;
}

inline double sears_check(int n, cplx a1, cplx a2, cplx a3, cplx b1, cplx b2, cplx b3, cplx q)
{
    if (!sears_balanced(n, a1, a2, a3, b1, b2, b3, q))
        throw domain_error("sears_check: series is not balanced (b1 b2 b3 != q^(1-n) a1 a2 a3)");
    cplx qn = std::pow(q, -n);
    TerminatingSeries lhs{{qn, a1, a2, a3}, {b1, b2, b3}, q, q, n};
    cplx q1n = std::pow(q, 1 - n);
    TerminatingSeries rhs{{qn, a1, b1 / a2, b1 / a3}, {b1, a1 * q1n / b2, a1 * q1n / b3}, q, q, n};
    cplx pre = qpoch(b2 / a1, q, n) * qpoch(b3 / a1, q, n) / (qpoch(b2, q, n) * qpoch(b3, q, n)) *
               std::pow(a1, n);
    auto L = phi_eval(lhs), R = phi_eval(rhs);
    return std::abs(L.value - pre * R.value) / std::max({1.0, L.magnitude, std::abs(pre) * R.magnitude});
}

}  // namespace selq
